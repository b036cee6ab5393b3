// Command-line driver: solve, sequence, model, bench, validate, scaling.
#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include <twrouter/twrouter.hpp>

#ifndef TWROUTER_DEFAULT_DATA
#define TWROUTER_DEFAULT_DATA "data"
#endif

namespace {

    using namespace twrouter;

    constexpr int exit_ok = 0;
    constexpr int exit_failure = 1;
    constexpr int exit_input = 2;
    constexpr int exit_infeasible = 3;

    // Raised for bad user input that should exit with code 2.
    class InputError : public std::runtime_error {
    public:
        using std::runtime_error::runtime_error;
    };

    std::string data_dir() {
        if (const char* env = std::getenv("TWROUTER_DATA"); env != nullptr && *env != '\0') {
            return env;
        }
        return TWROUTER_DEFAULT_DATA;
    }

    // A path that exists is used as given; otherwise a bare name such as "R101" is looked up in the data directory.
    std::string resolve_instance(const std::string& spec) {
        namespace fs = std::filesystem;
        if (fs::exists(spec)) {
            return spec;
        }
        const fs::path dir = data_dir();
        for (const fs::path& candidate : {dir / spec, dir / (spec + ".txt"), dir / "solomon" / spec, dir / "solomon" / (spec + ".txt")}) {
            if (fs::exists(candidate)) {
                return candidate.string();
            }
        }
        return spec;
    }

    Instance load_instance(const std::string& spec, std::optional<std::size_t> customers) {
        Instance inst = load_solomon(resolve_instance(spec));
        if (customers) {
            if (*customers == 0 || *customers > inst.customer_count()) {
                throw InputError("--customers must lie in 1.." + std::to_string(inst.customer_count()));
            }
            inst = inst.truncated(*customers);
        }
        return inst;
    }

    std::vector<NodeId> parse_id_list(const std::string& text) {
        std::vector<NodeId> ids;
        std::stringstream in(text);
        std::string item;
        while (std::getline(in, item, ',')) {
            std::size_t used = 0;
            int value = 0;
            try {
                value = std::stoi(item, &used);
            } catch (const std::exception&) {
                throw InputError("bad customer id '" + item + "'");
            }
            if (used != item.size()) {
                throw InputError("bad customer id '" + item + "'");
            }
            ids.push_back(value);
        }
        if (ids.empty()) {
            throw InputError("empty customer list");
        }
        return ids;
    }

    std::string fixed(double v, int decimals) {
        char buf[64];
        std::snprintf(buf, sizeof(buf), "%.*f", decimals, v);
        return buf;
    }

    std::string join(const Route& r) {
        std::string out;
        for (std::size_t i = 0; i < r.size(); ++i) {
            out += (i ? "," : "") + std::to_string(r[i]);
        }
        return out;
    }

    BksTable load_bks(const std::string& path) {
        if (!path.empty()) {
            return BksTable::load_csv(path);
        }
        const std::string shipped = data_dir() + "/bks.csv";
        return std::filesystem::exists(shipped) ? BksTable::load_csv(shipped) : BksTable::published();
    }

    struct Options {
        std::string instance;
        std::vector<std::string> instances;
        std::uint64_t seed = 1;
        std::string backend = "anneal";
        std::string cache_key = "sorted";
        std::optional<std::size_t> truncate;
        std::string id_list;
        std::string output;
        std::string trace;
        std::string plot;
        std::string bks;
        std::string comparison;
        std::string solution;
        std::string repair = "on";
        std::vector<std::uint64_t> seeds{1, 2, 3};
        std::vector<std::size_t> stops{10, 13, 35};
        int jobs = 1;
        bool timing = false;
        AnnealOverrides anneal;
        TabuParams tabu;
    };

    SolverConfig solver_config(const Options& o) {
        SolverConfig c;
        c.backend = parse_backend_kind(o.backend);
        c.anneal = o.anneal;
        c.tabu = o.tabu;
        c.cache_key = o.cache_key == "ordered" ? CacheKeyMode::ordered : CacheKeyMode::sorted;
        c.tabu.validate();
        return c;
    }

    int cmd_solve(const Options& o) {
        const Instance inst = load_instance(o.instance, o.truncate);
        const SolverConfig config = solver_config(o);
        std::ofstream trace_file;
        std::ostream* trace_out = nullptr;
        if (o.trace == "-") {
            trace_out = &std::cerr;
        } else if (!o.trace.empty()) {
            trace_file.open(o.trace, std::ios::binary | std::ios::trunc);
            if (!trace_file) {
                throw std::runtime_error("cannot write '" + o.trace + "'");
            }
            trace_out = &trace_file;
        }
        TraceSink sink;
        if (trace_out != nullptr) {
            sink = [trace_out](const TraceRecord& r) {
                nlohmann::ordered_json line{{"iteration", r.iteration},
                                            {"incumbent", r.incumbent},
                                            {"current", r.current},
                                            {"move", to_string(r.move)},
                                            {"sequencer_adopted", r.sequencer_adopted}};
                *trace_out << line.dump() << '\n';
            };
        }
        const Solution s = solve_cvrptw(inst, config, o.seed, sink);
        const ViolationReport violations = verify_solution(s, inst);

        std::cout << "instance " << inst.name() << " customers " << inst.customer_count() << " seed " << o.seed
                  << " backend " << to_string(config.backend) << "\n";
        for (std::size_t k = 0; k < s.routes.size(); ++k) {
            const Schedule sched = simulate_route(s.routes[k], inst);
            double wait = 0.0;
            for (const auto& st : sched.stops) {
                wait += st.wait;
            }
            std::cout << "route " << k << ": 0," << join(s.routes[k]) << ",0  distance " << fixed(sched.total_distance, 2)
                      << "  demand " << fixed(route_demand(s.routes[k], inst), 0) << "  wait " << fixed(wait, 2)
                      << "  return " << fixed(sched.return_arrival, 2) << (sched.time_feasible ? "" : "  LATE") << "\n";
        }
        std::cout << "vehicles " << s.routes.size() << "  total distance " << fixed(s.total_distance, 4);
        if (const auto bks = load_bks(o.bks).find(inst.name())) {
            std::cout << "  gap " << fixed(optimality_gap(s.total_distance, *bks), 2) << "%";
        }
        std::cout << "\n";
        for (const auto& v : violations) {
            std::cout << "violation " << v.label << " " << v.slack << "\n";
        }

        const std::string out = o.output.empty() ? inst.name() + "-seed" + std::to_string(o.seed) + ".json" : o.output;
        write_text_file(out, solution_to_string(s, inst, o.seed));
        std::cout << "wrote " << out << "\n";
        if (!o.plot.empty()) {
            write_text_file(o.plot, render_route_map(inst, s));
        }
        return violations.empty() ? exit_ok : exit_failure;
    }

    int cmd_sequence(const Options& o) {
        const Instance inst = load_instance(o.instance, std::nullopt);
        const SolverConfig config = solver_config(o);
        const Route route = parse_id_list(o.id_list);
        try {
            validate_route(route, inst);
        } catch (const RouteError& e) {
            throw InputError(e.what());
        }
        if (config.backend == BackendKind::exact && route.size() > held_karp_limit) {
            throw InputError("exact backend accepts at most " + std::to_string(held_karp_limit) + " customers per route");
        }
        const auto backend = make_backend(config);
        RouteCache cache(config.cache_key);
        const RouteEval pre = evaluate_route(route, inst);
        const SequenceReport rep = sequence_route_report(route, inst, *backend, cache, {o.seed, o.repair == "on"});
        std::cout << "stops,pre_cost,pre_violated,optimized_cost,optimized_violated,repair,final_cost,final_violated,route\n";
        std::cout << route.size() << ',' << fixed(pre.cost, 4) << ',' << (pre.violations > 0) << ',' << fixed(rep.raw_cost, 4)
                  << ',' << (rep.raw_violations > 0) << ',' << to_string(rep.repair) << ',' << fixed(rep.final_cost, 4) << ','
                  << !rep.final_feasible << ',' << join(rep.route) << "\n";
        return exit_ok;
    }

    int cmd_model(const Options& o) {
        const Instance inst = load_instance(o.instance, std::nullopt);
        std::vector<NodeId> ids;
        if (o.id_list.empty()) {
            for (NodeId c = 1; c < static_cast<NodeId>(inst.size()); ++c) {
                ids.push_back(c);
            }
        } else {
            ids = parse_id_list(o.id_list);
        }
        CqmModel model;
        try {
            model = build_tsptw_model(inst, ids);
        } catch (const ModelError& e) {
            throw InputError(e.what());
        }
        const std::string lp = export_lp(model);
        if (o.output.empty() || o.output == "-") {
            std::cout << lp;
        } else {
            write_text_file(o.output, lp);
        }
        return exit_ok;
    }

    int cmd_bench(const Options& o) {
        std::vector<Instance> instances;
        for (const auto& spec : o.instances) {
            instances.push_back(load_instance(spec, o.truncate));
        }
        const SolverConfig config = solver_config(o);
        const BksTable bks = load_bks(o.bks);
        const auto rows = run_benchmark(instances, config, o.seeds, bks, {o.jobs});
        const std::string csv = bench_csv(rows, {o.timing});
        if (o.output.empty() || o.output == "-") {
            std::cout << csv;
        } else {
            write_text_file(o.output, csv);
        }
        if (!o.comparison.empty()) {
            write_text_file(o.comparison, comparison_csv(rows));
        }
        if (!o.plot.empty()) {
            std::vector<std::string> categories;
            GapSeries ortools{"OR-Tools", {}};
            GapSeries published{"hybrid (reference)", {}};
            GapSeries achieved{"achieved mean", {}};
            for (const auto& ref : published_comparison()) {
                for (const auto& r : rows) {
                    if (r.instance == ref.instance && !r.seed && r.gap_percent) {
                        categories.push_back(ref.instance);
                        ortools.gaps.push_back(ref.ortools_gap);
                        published.gaps.push_back(ref.hybrid_gap);
                        achieved.gaps.push_back(*r.gap_percent);
                    }
                }
            }
            write_text_file(o.plot, render_gap_chart(categories, {ortools, published, achieved}, "Optimality gap (%)"));
        }
        const bool all_feasible = std::all_of(rows.begin(), rows.end(), [](const BenchRow& r) { return r.feasible; });
        return all_feasible ? exit_ok : exit_failure;
    }

    int cmd_validate(const Options& o) {
        const Instance inst = load_instance(o.instance, o.truncate);
        Solution s;
        try {
            s = load_solution(o.solution, inst);
        } catch (const RouteError& e) {
            throw InputError(e.what());
        }
        const ViolationReport rep = verify_solution(s, inst);
        for (const auto& v : rep) {
            std::cout << "violation " << v.label << " " << v.slack << "\n";
        }
        std::cout << (rep.empty() ? "valid" : "invalid") << "  total distance " << fixed(s.total_distance, 4) << "\n";
        return rep.empty() ? exit_ok : exit_failure;
    }

    int cmd_scaling(const Options& o) {
        const Instance inst = load_instance(o.instance, std::nullopt);
        const SolverConfig config = solver_config(o);
        for (const std::size_t n : o.stops) {
            if (n == 0 || n > inst.customer_count()) {
                throw InputError("stop count " + std::to_string(n) + " out of range");
            }
            if (config.backend == BackendKind::exact && n > held_karp_limit) {
                throw InputError("exact backend accepts at most " + std::to_string(held_karp_limit) + " customers per route");
            }
        }
        const auto backend = make_backend(config);
        const auto raw = scaling_study(inst, o.stops, o.seeds, *backend, {false});
        std::vector<ScalingPoint> repaired;
        if (o.repair == "on") {
            repaired = scaling_study(inst, o.stops, o.seeds, *backend, {true});
        }
        const std::string csv = scaling_csv(raw, repaired);
        if (o.output.empty() || o.output == "-") {
            std::cout << csv;
        } else {
            write_text_file(o.output, csv);
        }
        if (!o.plot.empty()) {
            write_text_file(o.plot, render_scaling_chart(raw, repaired));
        }
        return exit_ok;
    }

    void add_solver_flags(CLI::App* cmd, Options& o) {
        cmd->add_option("--seed", o.seed, "Root seed")->capture_default_str();
        cmd->add_option("--backend", o.backend, "Route sequencer")->check(CLI::IsMember({"exact", "anneal"}))->capture_default_str();
        cmd->add_option("--cache-key", o.cache_key, "Route cache key")->check(CLI::IsMember({"sorted", "ordered"}))->capture_default_str();
        cmd->add_option("--temperature", o.anneal.initial_temperature, "Annealer initial temperature");
        cmd->add_option("--cooling", o.anneal.cooling_rate, "Annealer cooling rate");
        cmd->add_option("--sweeps", o.anneal.sweeps, "Annealer sweeps");
        cmd->add_option("--moves-per-sweep", o.anneal.moves_per_sweep, "Annealer moves per sweep");
        cmd->add_option("--penalty", o.anneal.violation_penalty, "Annealer penalty per violated window");
        cmd->add_option("--tenure", o.tabu.tenure, "Tabu tenure")->capture_default_str();
        cmd->add_option("--max-iterations", o.tabu.max_iterations, "Tabu iteration cap")->capture_default_str();
        cmd->add_option("--no-improve-limit", o.tabu.no_improve_limit, "Stop after this many non-improving iterations")
            ->capture_default_str();
        cmd->add_option("--sequence-period", o.tabu.sequence_period, "Iterations between sequencing passes")->capture_default_str();
        cmd->add_option("--diversification", o.tabu.diversification, "Frequency penalty weight")->capture_default_str();
    }

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Vehicle routing with time windows: tabu search with per-route sequencing"};
    app.require_subcommand(1);
    Options o;

    auto* solve = app.add_subcommand("solve", "Solve an instance and write the solution JSON");
    solve->add_option("instance", o.instance, "Instance file or name")->required();
    add_solver_flags(solve, o);
    solve->add_option("--customers", o.truncate, "Keep only the first N customers");
    solve->add_option("-o,--output", o.output, "Solution JSON path");
    solve->add_option("--trace", o.trace, "Write per-iteration trace lines (- for stderr)");
    solve->add_option("--plot", o.plot, "Route map SVG path");
    solve->add_option("--bks", o.bks, "BKS CSV (instance,bks)");

    auto* sequence = app.add_subcommand("sequence", "Sequence one route and report costs and violations");
    sequence->add_option("instance", o.instance, "Instance file or name")->required();
    sequence->add_option("route", o.id_list, "Comma-separated customer ids")->required();
    add_solver_flags(sequence, o);
    sequence->add_option("--repair", o.repair, "Repair infeasible output")->check(CLI::IsMember({"on", "off"}))->capture_default_str();

    auto* model = app.add_subcommand("model", "Export the single-route model as an LP file");
    model->add_option("instance", o.instance, "Instance file or name")->required();
    model->add_option("--customers", o.id_list, "Comma-separated customer ids (default all)");
    model->add_option("-o,--output", o.output, "LP path (default stdout)");

    auto* bench = app.add_subcommand("bench", "Run several seeds per instance and write the results CSV");
    bench->add_option("instances", o.instances, "Instance files or names")->required();
    add_solver_flags(bench, o);
    bench->add_option("--seeds", o.seeds, "Seeds")->delimiter(',')->capture_default_str();
    bench->add_option("--customers", o.truncate, "Keep only the first N customers");
    bench->add_option("--jobs", o.jobs, "Parallel runs")->check(CLI::PositiveNumber)->capture_default_str();
    bench->add_option("-o,--output", o.output, "Results CSV path (default stdout)");
    bench->add_option("--comparison", o.comparison, "Comparison CSV against published values");
    bench->add_option("--plot", o.plot, "Gap chart SVG path");
    bench->add_option("--bks", o.bks, "BKS CSV (instance,bks)");
    bench->add_flag("--timing", o.timing, "Fill the runtime_s column");

    auto* validate = app.add_subcommand("validate", "Check a solution JSON against an instance");
    validate->add_option("instance", o.instance, "Instance file or name")->required();
    validate->add_option("solution", o.solution, "Solution JSON path")->required();
    validate->add_option("--customers", o.truncate, "Keep only the first N customers");

    auto* scaling = app.add_subcommand("scaling", "Violation rate of sequenced routes by stop count");
    scaling->add_option("instance", o.instance, "Instance file or name")->required();
    add_solver_flags(scaling, o);
    scaling->add_option("--stops", o.stops, "Stop counts")->delimiter(',')->capture_default_str();
    scaling->add_option("--seeds", o.seeds, "Seeds")->delimiter(',')->capture_default_str();
    scaling->add_option("--repair", o.repair, "Also measure repaired output")->check(CLI::IsMember({"on", "off"}))->capture_default_str();
    scaling->add_option("-o,--output", o.output, "CSV path (default stdout)");
    scaling->add_option("--plot", o.plot, "Line chart SVG path");

    CLI11_PARSE(app, argc, argv);

    try {
        if (solve->parsed()) return cmd_solve(o);
        if (sequence->parsed()) return cmd_sequence(o);
        if (model->parsed()) return cmd_model(o);
        if (bench->parsed()) return cmd_bench(o);
        if (validate->parsed()) return cmd_validate(o);
        return cmd_scaling(o);
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_input;
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_input;
    } catch (const SolutionFormatError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_input;
    } catch (const InputError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_input;
    } catch (const InfeasibleInstanceError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_infeasible;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_failure;
    }
}
