#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <random>
#include <vector>

namespace adgame {

using Rng = std::mt19937_64;

// splitmix64 finalizer
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Seed of an independent stream `stream` under base seed `seed`. Used so that
/// per-run generators do not depend on how runs are distributed over workers.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) noexcept {
    return mix64(mix64(seed) ^ mix64(stream + 0x632be59bd9b4e019ULL));
}

inline Rng make_rng(std::uint64_t seed, std::uint64_t stream = 0) {
    return Rng(derive_seed(seed, stream));
}

inline double uniform01(Rng& rng) {
    return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

inline std::size_t uniform_index(Rng& rng, std::size_t n) {
    return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
}

inline bool bernoulli(Rng& rng, double p) { return uniform01(rng) < p; }

/// `k` distinct values drawn uniformly from `[0, n)`, in draw order.
inline std::vector<std::size_t> sample_without_replacement(Rng& rng, std::size_t n, std::size_t k) {
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    k = std::min(k, n);
    for (std::size_t i = 0; i < k; ++i) {
        std::size_t j = i + uniform_index(rng, n - i);
        std::swap(idx[i], idx[j]);
    }
    idx.resize(k);
    return idx;
}

/// `k` distinct elements of `pool` chosen uniformly.
template <typename T>
std::vector<T> sample_from(Rng& rng, const std::vector<T>& pool, std::size_t k) {
    std::vector<T> out;
    out.reserve(std::min(k, pool.size()));
    for (std::size_t i : sample_without_replacement(rng, pool.size(), k)) out.push_back(pool[i]);
    return out;
}

inline int poisson(Rng& rng, double mean) {
    return std::poisson_distribution<int>(mean)(rng);
}

}  // namespace adgame
