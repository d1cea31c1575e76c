// SPDX-License-Identifier: Apache-2.0
//
// thzsim - link-level simulator for indoor THz downlinks with one-bit DACs
// Copyright (C) 2026 the thzsim authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0

#ifndef THZSIM_COMMON_HPP
#define THZSIM_COMMON_HPP

#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <string>

namespace thzsim {

// Physical and unit-conversion constants.
constexpr double kSpeedOfLight = 2.99792458e8; // m/s

inline double dbm_to_watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }
inline double watts_to_dbm(double watts) { return 10.0 * std::log10(watts) + 30.0; }
inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

// Antenna gain in dBi enters the channel as an amplitude factor, so the
// conversion uses the 20*log10 rule.
inline double dbi_to_amplitude(double dbi) { return std::pow(10.0, dbi / 20.0); }

// RNG stream labels. Every random draw in the library is keyed by
// (master seed, stream, index) so that trials are reproducible and
// independent of thread count and evaluation order.
enum class RngStream : std::uint64_t {
  Channel = 0x1,
  PhaseError = 0x2,
  Oracle = 0x3,
  Generic = 0x4,
};

namespace detail {
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}
} // namespace detail

inline std::uint64_t mix_seed(std::uint64_t seed, RngStream stream, std::uint64_t index) {
  std::uint64_t h = detail::splitmix64(seed);
  h = detail::splitmix64(h ^ static_cast<std::uint64_t>(stream));
  return detail::splitmix64(h ^ index);
}

inline std::mt19937_64 make_rng(std::uint64_t seed, RngStream stream, std::uint64_t index) {
  return std::mt19937_64(mix_seed(seed, stream, index));
}

// Runs fn(i) for i in [0, count). With jobs > 1 the index range is split
// into contiguous blocks processed by worker threads; callers must write
// results into per-index slots so that the outcome does not depend on the
// number of workers.
void for_each_index(std::size_t count, unsigned jobs, const std::function<void(std::size_t)>& fn);

// Shortest lossless decimal form of a double (used for CSV emission).
std::string format_double(double value);

} // namespace thzsim

#endif // THZSIM_COMMON_HPP
