// Sequence routes of growing length with the annealer and show what the repair step recovers.
// Usage: demo_sequence_route [instance-file]
#include <cstdio>
#include <string>

#include <twrouter/twrouter.hpp>

int main(int argc, char** argv) {
    using namespace twrouter;
    const std::string path = argc > 1 ? argv[1] : std::string(TWROUTER_DEFAULT_DATA) + "/solomon/C207.txt";
    const Instance inst = load_solomon(path);
    const Solution savings = clarke_wright(inst);
    const AnnealBackend anneal;

    std::printf("stops  start    annealed  late  repair            final    late\n");
    for (const std::size_t stops : {5u, 10u, 13u, 20u, 35u}) {
        const Route start = sample_scaling_route(inst, savings, stops, 1);
        RouteCache cache;
        const SequenceReport rep = sequence_route_report(start, inst, anneal, cache, {1, true});
        std::printf("%5zu  %7.2f  %7.2f  %4d  %-16s  %7.2f  %4s\n", stops, rep.pre_cost, rep.raw_cost, rep.raw_violations,
                    to_string(rep.repair), rep.final_cost, rep.final_feasible ? "0" : ">0");
    }
    return 0;
}
