#ifndef TWROUTER_SOLVER_HPP_
#define TWROUTER_SOLVER_HPP_

#include <cstdint>
#include <memory>
#include <stdexcept>
#include <string>

#include "assignment.hpp"
#include "instance.hpp"
#include "sequencer.hpp"

namespace twrouter {

    enum class BackendKind { exact, anneal };

    inline BackendKind parse_backend_kind(const std::string& s) {
        if (s == "exact") {
            return BackendKind::exact;
        }
        if (s == "anneal") {
            return BackendKind::anneal;
        }
        throw std::invalid_argument("unknown backend '" + s + "' (expected exact or anneal)");
    }

    inline const char* to_string(BackendKind k) {
        return k == BackendKind::exact ? "exact" : "anneal";
    }

    struct SolverConfig {
        BackendKind backend = BackendKind::anneal;
        AnnealOverrides anneal;
        TabuParams tabu;
        CacheKeyMode cache_key = CacheKeyMode::sorted;
    };

    inline std::unique_ptr<SequencerBackend> make_backend(const SolverConfig& config) {
        if (config.backend == BackendKind::exact) {
            return std::make_unique<ExactBackend>();
        }
        return std::make_unique<AnnealBackend>(config.anneal);
    }

    // Savings construction followed by tabu search; `seed` overrides config.tabu.seed.
    inline Solution solve_cvrptw(const Instance& instance, const SolverConfig& config, std::uint64_t seed,
                                 const TraceSink& trace = {}) {
        const auto backend = make_backend(config);
        RouteCache cache(config.cache_key);
        TabuParams params = config.tabu;
        params.seed = seed;
        const Solution initial = clarke_wright(instance);
        return tabu_search(initial, instance, *backend, params, &cache, trace);
    }

}  // namespace twrouter

#endif
