// Solve one Solomon instance with the default pipeline and print the routes.
// Usage: demo_solve_instance [instance-file] [seed]
#include <cstdio>
#include <cstdlib>
#include <string>

#include <twrouter/twrouter.hpp>

int main(int argc, char** argv) {
    using namespace twrouter;
    const std::string path = argc > 1 ? argv[1] : std::string(TWROUTER_DEFAULT_DATA) + "/solomon/R101.txt";
    const std::uint64_t seed = argc > 2 ? std::strtoull(argv[2], nullptr, 10) : 1;

    const Instance inst = load_solomon(path);
    const Solution start = clarke_wright(inst);
    std::printf("%s: savings start %.2f with %zu routes\n", inst.name().c_str(), start.total_distance, start.routes.size());

    const Solution best = solve_cvrptw(inst, SolverConfig{}, seed);
    for (std::size_t k = 0; k < best.routes.size(); ++k) {
        std::printf("route %2zu (%5.1f):", k, route_cost(best.routes[k], inst));
        for (const NodeId c : best.routes[k]) {
            std::printf(" %d", c);
        }
        std::printf("\n");
    }
    std::printf("total %.2f with %zu routes, %s\n", best.total_distance, best.routes.size(),
                verify_solution(best, inst).empty() ? "valid" : "INVALID");
    if (const auto bks = BksTable::published().find(inst.name())) {
        std::printf("gap to best known: %.2f%%\n", optimality_gap(best.total_distance, *bks));
    }
    return 0;
}
