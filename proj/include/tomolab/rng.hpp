#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace tomolab {

using Rng = std::mt19937_64;

// Independent stream for (master, path...), built with std::seed_seq over 32-bit halves.
Rng make_rng(std::uint64_t master, std::initializer_list<std::uint64_t> path = {});

double standard_normal(Rng& rng);
double log_uniform(Rng& rng, double lo, double hi);

// 64-bit FNV-1a; stable across platforms, used for sequence keys and config hashes.
std::uint64_t fnv1a(const void* data, std::size_t len, std::uint64_t h = 1469598103934665603ULL);

} // namespace tomolab
