#ifndef TWROUTER_BENCH_HPP_
#define TWROUTER_BENCH_HPP_

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "assignment.hpp"
#include "instance.hpp"
#include "rng.hpp"
#include "schedule.hpp"
#include "sequencer.hpp"
#include "solver.hpp"

namespace twrouter {

    // Percentage above the best known distance.
    inline double optimality_gap(double distance, double bks) {
        if (!(bks > 0.0)) {
            throw std::invalid_argument("best known solution must be positive");
        }
        return 100.0 * (distance - bks) / bks;
    }

    inline double round_to(double value, int decimals) {
        const double scale = std::pow(10.0, decimals);
        return std::round(value * scale) / scale;
    }

    // One row of the published OR-Tools vs. hybrid tabu comparison on the Solomon subset.
    struct PublishedRow {
        std::string instance;
        double bks;
        double ortools_distance;
        double ortools_gap;
        double hybrid_distance;
        double hybrid_gap;
    };

    inline const std::vector<PublishedRow>& published_comparison() {
        static const std::vector<PublishedRow> rows = {
            {"R101", 1637.7, 1651.2, 0.82, 1675.9, 2.33},  {"R102", 1466.6, 1487.0, 1.39, 1512.6, 3.13},
            {"R103", 1208.7, 1303.5, 7.84, 1247.6, 3.22},  {"RC101", 1619.8, 1632.0, 0.75, 1674.3, 3.37},
            {"RC102", 1457.4, 1528.8, 4.89, 1510.4, 3.64}, {"RC103", 1258.0, 1326.1, 5.41, 1351.9, 7.46},
        };
        return rows;
    }

    class BksTable {
    public:
        BksTable() = default;

        static BksTable published() {
            BksTable t;
            for (const auto& row : published_comparison()) {
                t.set(row.instance, row.bks);
            }
            return t;
        }

        // CSV with header `instance,bks`.
        static BksTable parse_csv(const std::string& text) {
            BksTable t;
            std::istringstream in(text);
            std::string line;
            std::size_t number = 0;
            while (std::getline(in, line)) {
                ++number;
                if (!line.empty() && line.back() == '\r') {
                    line.pop_back();
                }
                if (line.empty()) {
                    continue;
                }
                if (number == 1) {
                    if (line != "instance,bks") {
                        throw ParseError(number, "BKS file must start with header 'instance,bks'");
                    }
                    continue;
                }
                const auto comma = line.find(',');
                if (comma == std::string::npos || comma == 0) {
                    throw ParseError(number, "expected 'instance,bks'");
                }
                const double value = detail::parse_number(std::string_view(line).substr(comma + 1), number);
                if (!(value > 0.0)) {
                    throw ParseError(number, "BKS value must be positive");
                }
                t.set(line.substr(0, comma), value);
            }
            return t;
        }

        static BksTable load_csv(const std::string& path) {
            std::ifstream in(path);
            if (!in) {
                throw ParseError(0, "cannot open BKS file '" + path + "'");
            }
            std::ostringstream buf;
            buf << in.rdbuf();
            return parse_csv(buf.str());
        }

        void set(const std::string& instance, double bks) {
            values_[instance] = bks;
        }

        std::optional<double> find(const std::string& instance) const {
            const auto it = values_.find(instance);
            if (it == values_.end()) {
                return std::nullopt;
            }
            return it->second;
        }

        std::size_t size() const noexcept {
            return values_.size();
        }

    private:
        std::map<std::string, double> values_;
    };

    struct BenchRow {
        std::string instance;
        std::string solver;
        std::optional<std::uint64_t> seed;  // empty on the per-instance mean row
        std::optional<double> distance;     // empty when the run failed
        std::optional<double> gap_percent;
        double runtime_seconds = 0.0;
        bool feasible = false;
    };

    struct BenchOptions {
        int jobs = 1;
    };

    namespace detail {

        template <typename Fn>
        void parallel_for(std::size_t count, int jobs, Fn&& fn) {
            const std::size_t workers = std::min<std::size_t>(count, static_cast<std::size_t>(std::max(jobs, 1)));
            if (workers <= 1) {
                for (std::size_t i = 0; i < count; ++i) {
                    fn(i);
                }
                return;
            }
            std::atomic<std::size_t> next{0};
            std::vector<std::thread> pool;
            for (std::size_t w = 0; w < workers; ++w) {
                pool.emplace_back([&] {
                    for (std::size_t i = next++; i < count; i = next++) {
                        fn(i);
                    }
                });
            }
            for (auto& t : pool) {
                t.join();
            }
        }

    }  // namespace detail

    // One detail row per (instance, seed) followed by a mean row per instance. Gaps are filled when the BKS
    // table knows the instance. Failures become infeasible rows.
    inline std::vector<BenchRow> run_benchmark(const std::vector<Instance>& instances, const SolverConfig& config,
                                               const std::vector<std::uint64_t>& seeds, const BksTable& bks,
                                               const BenchOptions& options = {}) {
        const std::string tag = std::string("tabu-") + to_string(config.backend);
        const std::size_t per = seeds.size();
        std::vector<BenchRow> detail_rows(instances.size() * per);
        detail::parallel_for(detail_rows.size(), options.jobs, [&](std::size_t task) {
            const Instance& inst = instances[task / per];
            const std::uint64_t seed = seeds[task % per];
            BenchRow row{inst.name(), tag, seed, std::nullopt, std::nullopt, 0.0, false};
            const auto start = std::chrono::steady_clock::now();
            try {
                const Solution s = solve_cvrptw(inst, config, seed);
                row.feasible = s.feasible() && verify_solution(s, inst).empty();
                row.distance = s.total_distance;
            } catch (const std::exception&) {
                row.feasible = false;
            }
            row.runtime_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
            if (row.distance) {
                if (const auto b = bks.find(inst.name())) {
                    row.gap_percent = optimality_gap(*row.distance, *b);
                }
            }
            detail_rows[task] = std::move(row);
        });

        std::vector<BenchRow> rows;
        for (std::size_t i = 0; i < instances.size(); ++i) {
            BenchRow mean{instances[i].name(), tag + "-mean", std::nullopt, std::nullopt, std::nullopt, 0.0, per > 0};
            double distance_sum = 0.0;
            std::size_t distances = 0;
            for (std::size_t k = 0; k < per; ++k) {
                const BenchRow& r = detail_rows[i * per + k];
                rows.push_back(r);
                mean.runtime_seconds += r.runtime_seconds / static_cast<double>(per);
                mean.feasible = mean.feasible && r.feasible;
                if (r.distance) {
                    distance_sum += *r.distance;
                    ++distances;
                }
            }
            if (per == 0) {
                continue;
            }
            if (distances == per) {
                mean.distance = distance_sum / static_cast<double>(per);
                if (const auto b = bks.find(instances[i].name())) {
                    mean.gap_percent = optimality_gap(*mean.distance, *b);
                }
            }
            rows.push_back(std::move(mean));
        }
        return rows;
    }

    inline constexpr const char* bench_csv_header = "instance,solver,seed,distance,gap_percent,feasible,runtime_s";

    struct CsvOptions {
        // Wall-clock time is not reproducible; when false the runtime column is left empty.
        bool include_runtime = false;
    };

    namespace detail {

        inline std::string fixed(double v, int decimals) {
            char buf[64];
            std::snprintf(buf, sizeof(buf), "%.*f", decimals, v);
            return buf;
        }

    }  // namespace detail

    inline std::string bench_csv(const std::vector<BenchRow>& rows, const CsvOptions& options = {}) {
        std::string out = std::string(bench_csv_header) + "\n";
        for (const auto& r : rows) {
            out += r.instance + ',' + r.solver + ',';
            out += r.seed ? std::to_string(*r.seed) : std::string("mean");
            out += ',';
            out += r.distance ? detail::fixed(*r.distance, 4) : std::string();
            out += ',';
            out += r.gap_percent ? detail::fixed(*r.gap_percent, 2) : std::string();
            out += ',';
            out += r.feasible ? "true" : "false";
            out += ',';
            out += options.include_runtime ? detail::fixed(r.runtime_seconds, 3) : std::string();
            out += '\n';
        }
        return out;
    }

    // Achieved results next to the published reference values, one line per published instance present in `rows`.
    inline std::string comparison_csv(const std::vector<BenchRow>& rows) {
        std::string out =
            "instance,bks,reference_ortools_distance,reference_ortools_gap_percent,reference_hybrid_distance,reference_hybrid_gap_percent,"
            "achieved_mean_distance,achieved_mean_gap_percent,achieved_best_distance,achieved_best_gap_percent\n";
        for (const auto& ref : published_comparison()) {
            std::optional<double> mean;
            std::optional<double> best;
            for (const auto& r : rows) {
                if (r.instance != ref.instance || !r.distance) {
                    continue;
                }
                if (!r.seed) {
                    mean = r.distance;
                } else if (r.feasible && (!best || *r.distance < *best)) {
                    best = r.distance;
                }
            }
            if (!mean && !best) {
                continue;
            }
            const auto cell = [&](const std::optional<double>& d, bool gap) {
                if (!d) {
                    return std::string(",");
                }
                return ',' + detail::fixed(gap ? optimality_gap(*d, ref.bks) : *d, gap ? 2 : 4);
            };
            out += ref.instance + ',' + detail::fixed(ref.bks, 1) + ',' + detail::fixed(ref.ortools_distance, 1) + ',' +
                   detail::fixed(ref.ortools_gap, 2) + ',' + detail::fixed(ref.hybrid_distance, 1) + ',' +
                   detail::fixed(ref.hybrid_gap, 2);
            out += cell(mean, false) + cell(mean, true) + cell(best, false) + cell(best, true) + '\n';
        }
        return out;
    }

    inline void write_text_file(const std::string& path, const std::string& content) {
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw std::runtime_error("cannot write '" + path + "'");
        }
        out << content;
        if (!out) {
            throw std::runtime_error("failed writing '" + path + "'");
        }
    }

    struct ScalingPoint {
        std::size_t stops = 0;
        int runs = 0;
        int runs_with_violation = 0;
        double proportion_with_violation = 0.0;
        // Mean over runs of violations / (stops + 1); the depot return is a checked stop.
        double mean_violation_proportion = 0.0;
    };

    struct ScalingOptions {
        bool repair = false;
    };

    // Route of `stops` customers: Clarke-Wright routes in seed-shuffled order, concatenated, truncated.
    inline Route sample_scaling_route(const Instance& instance, const Solution& savings, std::size_t stops, std::uint64_t seed) {
        if (stops == 0 || stops > instance.customer_count()) {
            throw std::invalid_argument("stop count " + std::to_string(stops) + " out of range");
        }
        std::vector<std::size_t> order(savings.routes.size());
        for (std::size_t k = 0; k < order.size(); ++k) {
            order[k] = k;
        }
        Rng rng(derive_seed(seed, streams::scaling));
        std::shuffle(order.begin(), order.end(), rng);
        Route route;
        for (const std::size_t k : order) {
            for (const NodeId c : savings.routes[k]) {
                if (route.size() == stops) {
                    return route;
                }
                route.push_back(c);
            }
        }
        return route;
    }

    // Violation statistics of backend output (optionally repaired) for routes of increasing length.
    inline std::vector<ScalingPoint> scaling_study(const Instance& instance, const std::vector<std::size_t>& stop_counts,
                                                   const std::vector<std::uint64_t>& seeds, const SequencerBackend& backend,
                                                   const ScalingOptions& options = {}) {
        const Solution savings = clarke_wright(instance);
        std::vector<ScalingPoint> series;
        for (const std::size_t stops : stop_counts) {
            ScalingPoint point;
            point.stops = stops;
            double proportion_sum = 0.0;
            for (const std::uint64_t seed : seeds) {
                const Route start = sample_scaling_route(instance, savings, stops, seed);
                std::vector<NodeId> ids = start;
                std::sort(ids.begin(), ids.end());
                Route out = backend.solve(instance, ids, start, SolveBudget{derive_seed(seed, stops)});
                if (options.repair) {
                    out = fix_route(out, instance).route;
                }
                const int violations = evaluate_route(out, instance).violations;
                ++point.runs;
                point.runs_with_violation += violations > 0 ? 1 : 0;
                proportion_sum += static_cast<double>(violations) / static_cast<double>(stops + 1);
            }
            if (point.runs > 0) {
                point.proportion_with_violation = static_cast<double>(point.runs_with_violation) / point.runs;
                point.mean_violation_proportion = proportion_sum / point.runs;
            }
            series.push_back(point);
        }
        return series;
    }

    inline std::string scaling_csv(const std::vector<ScalingPoint>& raw, const std::vector<ScalingPoint>& repaired) {
        std::string out = "stops,runs,raw_runs_with_violation,raw_mean_violation_proportion,repaired_runs_with_violation,"
                          "repaired_mean_violation_proportion\n";
        for (std::size_t i = 0; i < raw.size(); ++i) {
            out += std::to_string(raw[i].stops) + ',' + std::to_string(raw[i].runs) + ',' +
                   std::to_string(raw[i].runs_with_violation) + ',' + detail::fixed(raw[i].mean_violation_proportion, 4) + ',';
            if (i < repaired.size()) {
                out += std::to_string(repaired[i].runs_with_violation) + ',' +
                       detail::fixed(repaired[i].mean_violation_proportion, 4);
            } else {
                out += ',';
            }
            out += '\n';
        }
        return out;
    }

    struct GapSeries {
        std::string label;
        std::vector<double> gaps;  // one per category
    };

    // Grouped bar chart: one group per category, one bar per series (class "bar").
    inline std::string render_gap_chart(const std::vector<std::string>& categories, const std::vector<GapSeries>& series,
                                        const std::string& title) {
        static const char* colors[] = {"#4c72b0", "#dd8452", "#55a868", "#c44e52"};
        const double width = 640;
        const double height = 360;
        const double left = 50;
        const double bottom = 40;
        const double top = 40;
        double max_gap = 1.0;
        for (const auto& s : series) {
            for (const double g : s.gaps) {
                max_gap = std::max(max_gap, g);
            }
        }
        const double plot_h = height - top - bottom;
        const double group_w = (width - left - 20) / static_cast<double>(std::max<std::size_t>(categories.size(), 1));
        const double bar_w = group_w * 0.8 / static_cast<double>(std::max<std::size_t>(series.size(), 1));
        std::string svg = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"360\" viewBox=\"0 0 640 360\">\n";
        svg += "<text x=\"320\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">" + title + "</text>\n";
        svg += "<line x1=\"50\" y1=\"" + detail::fixed(height - bottom, 1) + "\" x2=\"630\" y2=\"" +
               detail::fixed(height - bottom, 1) + "\" stroke=\"black\"/>\n";
        for (std::size_t c = 0; c < categories.size(); ++c) {
            const double gx = left + group_w * static_cast<double>(c) + group_w * 0.1;
            for (std::size_t s = 0; s < series.size(); ++s) {
                const double g = c < series[s].gaps.size() ? std::max(series[s].gaps[c], 0.0) : 0.0;
                const double h = plot_h * g / max_gap;
                svg += "<rect class=\"bar\" data-series=\"" + series[s].label + "\" data-category=\"" + categories[c] +
                       "\" x=\"" + detail::fixed(gx + bar_w * static_cast<double>(s), 1) + "\" y=\"" +
                       detail::fixed(height - bottom - h, 1) + "\" width=\"" + detail::fixed(bar_w, 1) + "\" height=\"" +
                       detail::fixed(h, 1) + "\" fill=\"" + colors[s % 4] + "\"/>\n";
            }
            svg += "<text x=\"" + detail::fixed(gx + group_w * 0.4, 1) + "\" y=\"" + detail::fixed(height - bottom + 16, 1) +
                   "\" text-anchor=\"middle\" font-size=\"11\">" + categories[c] + "</text>\n";
        }
        for (std::size_t s = 0; s < series.size(); ++s) {
            svg += "<text class=\"legend\" x=\"60\" y=\"" + detail::fixed(top + 14.0 * static_cast<double>(s), 1) +
                   "\" font-size=\"11\" fill=\"" + colors[s % 4] + "\">" + series[s].label + "</text>\n";
        }
        svg += "</svg>\n";
        return svg;
    }

    // Line chart of mean violation proportion against stop count (class "series" per polyline).
    inline std::string render_scaling_chart(const std::vector<ScalingPoint>& raw, const std::vector<ScalingPoint>& repaired) {
        const double left = 50;
        const double right = 620;
        const double top = 40;
        const double bottom = 320;
        std::size_t max_stops = 1;
        for (const auto& p : raw) {
            max_stops = std::max(max_stops, p.stops);
        }
        const auto line = [&](const std::vector<ScalingPoint>& pts, const char* label, const char* color) {
            std::string poly = "<polyline class=\"series\" data-series=\"" + std::string(label) +
                               "\" fill=\"none\" stroke=\"" + color + "\" points=\"";
            for (std::size_t i = 0; i < pts.size(); ++i) {
                const double x = left + (right - left) * static_cast<double>(pts[i].stops) / static_cast<double>(max_stops);
                const double y = bottom - (bottom - top) * pts[i].mean_violation_proportion;
                poly += (i ? " " : "") + detail::fixed(x, 1) + "," + detail::fixed(y, 1);
            }
            return poly + "\"/>\n";
        };
        std::string svg = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"360\" viewBox=\"0 0 640 360\">\n";
        svg += "<text x=\"320\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">Violation proportion by stop count</text>\n";
        svg += "<line x1=\"50\" y1=\"320\" x2=\"620\" y2=\"320\" stroke=\"black\"/>\n";
        svg += "<line x1=\"50\" y1=\"40\" x2=\"50\" y2=\"320\" stroke=\"black\"/>\n";
        svg += line(raw, "raw", "#c44e52");
        if (!repaired.empty()) {
            svg += line(repaired, "repaired", "#55a868");
        }
        svg += "</svg>\n";
        return svg;
    }

    // Route map: depot square, customer dots, one polyline per route.
    inline std::string render_route_map(const Instance& instance, const Solution& solution) {
        double min_x = instance.depot().x;
        double max_x = min_x;
        double min_y = instance.depot().y;
        double max_y = min_y;
        for (const auto& n : instance.nodes()) {
            min_x = std::min(min_x, n.x);
            max_x = std::max(max_x, n.x);
            min_y = std::min(min_y, n.y);
            max_y = std::max(max_y, n.y);
        }
        const double span = std::max({max_x - min_x, max_y - min_y, 1.0});
        const auto px = [&](double x) { return 20.0 + 460.0 * (x - min_x) / span; };
        const auto py = [&](double y) { return 480.0 - 460.0 * (y - min_y) / span; };
        static const char* colors[] = {"#4c72b0", "#dd8452", "#55a868", "#c44e52", "#8172b3", "#937860", "#da8bc3", "#8c8c8c"};
        std::string svg = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"500\" height=\"500\" viewBox=\"0 0 500 500\">\n";
        for (std::size_t k = 0; k < solution.routes.size(); ++k) {
            std::string pts = detail::fixed(px(instance.depot().x), 1) + "," + detail::fixed(py(instance.depot().y), 1);
            for (const NodeId c : solution.routes[k]) {
                pts += " " + detail::fixed(px(instance.node(c).x), 1) + "," + detail::fixed(py(instance.node(c).y), 1);
            }
            pts += " " + detail::fixed(px(instance.depot().x), 1) + "," + detail::fixed(py(instance.depot().y), 1);
            svg += "<polyline class=\"route\" fill=\"none\" stroke=\"" + std::string(colors[k % 8]) + "\" points=\"" + pts + "\"/>\n";
        }
        for (std::size_t i = 1; i < instance.size(); ++i) {
            const Node& n = instance.nodes()[i];
            svg += "<circle cx=\"" + detail::fixed(px(n.x), 1) + "\" cy=\"" + detail::fixed(py(n.y), 1) + "\" r=\"2\"/>\n";
        }
        svg += "<rect class=\"depot\" x=\"" + detail::fixed(px(instance.depot().x) - 4, 1) + "\" y=\"" +
               detail::fixed(py(instance.depot().y) - 4, 1) + "\" width=\"8\" height=\"8\" fill=\"black\"/>\n";
        svg += "</svg>\n";
        return svg;
    }

}  // namespace twrouter

#endif
