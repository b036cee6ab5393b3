#ifndef TWROUTER_RNG_HPP_
#define TWROUTER_RNG_HPP_

#include <cstdint>
#include <random>
#include <span>

namespace twrouter {

    using Rng = std::mt19937_64;

    inline std::uint64_t splitmix64(std::uint64_t x) {
        x += 0x9E3779B97F4A7C15ULL;
        x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
        x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
        return x ^ (x >> 31);
    }

    // Independent child seed for a named component stream.
    inline std::uint64_t derive_seed(std::uint64_t root, std::uint64_t stream) {
        return splitmix64(splitmix64(root) ^ splitmix64(stream + 0x632BE59BD9B4E019ULL));
    }

    inline std::uint64_t hash_ids(std::span<const int> ids) {
        std::uint64_t h = 0xCBF29CE484222325ULL;
        for (const int id : ids) {
            h ^= static_cast<std::uint64_t>(static_cast<std::uint32_t>(id));
            h *= 0x100000001B3ULL;
        }
        return h;
    }

    namespace streams {
        inline constexpr std::uint64_t tabu = 1;
        inline constexpr std::uint64_t sequencer = 2;
        inline constexpr std::uint64_t scaling = 3;
    }  // namespace streams

}  // namespace twrouter

#endif
