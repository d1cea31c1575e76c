// SPDX-License-Identifier: Apache-2.0
//
// thzsim - link-level simulator for indoor THz downlinks with one-bit DACs
// Copyright (C) 2026 the thzsim authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <numbers>
#include <random>

#include "thzsim/common.hpp"
#include "thzsim/rate.hpp"

using namespace thzsim;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

constexpr double kPi = std::numbers::pi;

EffectiveChannelMatrix channel_from(const arma::cx_mat& h, double frequency_hz = 6.5e11) {
  EffectiveChannelMatrix c;
  c.matrix = h;
  c.frequency_hz = frequency_hz;
  for (arma::uword u = 0; u < h.n_rows; ++u)
    c.user_order.push_back(static_cast<int>(u) + 1);
  for (arma::uword k = 0; k < h.n_cols; ++k)
    c.subarray_order.push_back(static_cast<int>(k));
  return c;
}

arma::cx_mat block_channel(const std::vector<arma::cx_rowvec>& blocks) {
  arma::uword total = 0;
  for (const auto& b : blocks)
    total += b.n_elem;
  arma::cx_mat h(blocks.size(), total, arma::fill::zeros);
  arma::uword off = 0;
  for (std::size_t u = 0; u < blocks.size(); ++u) {
    h.submat(u, off, u, off + blocks[u].n_elem - 1) = blocks[u];
    off += blocks[u].n_elem;
  }
  return h;
}

std::vector<arma::cx_rowvec> random_blocks(const std::vector<int>& sizes,
                                           const std::vector<double>& magnitudes,
                                           std::mt19937_64& rng) {
  std::uniform_real_distribution<double> ph(0.0, 2.0 * kPi);
  std::vector<arma::cx_rowvec> blocks;
  for (std::size_t u = 0; u < sizes.size(); ++u) {
    arma::cx_rowvec b(sizes[u]);
    for (int k = 0; k < sizes[u]; ++k)
      b(k) = std::polar(magnitudes[u], ph(rng));
    blocks.push_back(b);
  }
  return blocks;
}

AsymptoticScenario scenario_from_blocks(const std::vector<arma::cx_rowvec>& blocks,
                                        double bandwidth_hz = 5e9,
                                        double frequency_hz = 6.5e11) {
  AsymptoticScenario s;
  s.bandwidth_hz = bandwidth_hz;
  AsymptoticSubcarrier sc;
  sc.frequency_hz = frequency_hz;
  for (std::size_t u = 0; u < blocks.size(); ++u)
    sc.users.push_back(AsymptoticUser{static_cast<int>(u) + 1, blocks[u]});
  s.subcarriers.push_back(sc);
  return s;
}

} // namespace

TEST_CASE("rate bound: reduces to the Shannon form without distortion") {
  const double n0 = 1e-11, gamma = 37.0, b = 5e9;
  PrecoderSet set;
  set.power_w = gamma * n0;
  set.q = arma::cx_mat(1, 1, arma::fill::value(std::complex<double>(std::sqrt(gamma * n0), 0)));
  set.g_diag = arma::vec(1, arma::fill::ones);
  set.c_dd = arma::cx_mat(1, 1, arma::fill::zeros);
  const RateReport r = rate_lower_bound(channel_from(arma::cx_mat(1, 1, arma::fill::ones)),
                                        set, n0, b);
  CHECK_THAT(r.total_bps, WithinRel(b * std::log2(1.0 + gamma), 1e-12));
  CHECK(r.entries.size() == 1);
  CHECK_THAT(r.entries[0].signal_w, WithinRel(gamma * n0, 1e-12));
  CHECK(r.entries[0].interference_w == 0.0);
  CHECK(r.entries[0].distortion_w == 0.0);
}

TEST_CASE("rate bound: symmetric two-user channel gives equal rates") {
  const EffectiveChannelMatrix h = channel_from(arma::cx_mat(2, 2, arma::fill::eye));
  const RateReport r =
      rate_lower_bound(h, make_precoder_set(h, PrecoderKind::Zf, 1.0), 1e-9, 5e9);
  REQUIRE(r.entries.size() == 2);
  CHECK_THAT(r.entries[0].rate_bps, WithinRel(r.entries[1].rate_bps, 1e-12));
  for (const RateEntry& e : r.entries) {
    CHECK(e.signal_w >= 0.0);
    CHECK(e.interference_w >= 0.0);
    CHECK(e.distortion_w >= 0.0);
  }
}

TEST_CASE("rate bound: monotone nondecreasing and saturating in power") {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> normal(0.0, std::sqrt(0.5));
  arma::cx_mat h(2, 5);
  for (auto& v : h)
    v = std::complex<double>(normal(rng), normal(rng));
  const EffectiveChannelMatrix cm = channel_from(1e-4 * h);

  double previous = 0.0;
  std::vector<double> rates;
  for (double p = 1e-6; p < 1e3; p *= 10.0) {
    const RateReport r =
        rate_lower_bound(cm, make_precoder_set(cm, PrecoderKind::Mrt, p), 1e-11, 5e9);
    CHECK(r.total_bps >= previous * (1.0 - 1e-12));
    previous = r.total_bps;
    rates.push_back(r.total_bps);
  }
  // saturation: the last decade buys almost nothing
  CHECK_THAT(rates[rates.size() - 1], WithinRel(rates[rates.size() - 2], 1e-3));
}

TEST_CASE("rate merge: totals, per-user sums, duplicate detection") {
  const EffectiveChannelMatrix h = channel_from(arma::cx_mat(1, 1, arma::fill::ones), 1e12);
  const PrecoderSet set = make_precoder_set(h, PrecoderKind::Mrt, 1.0);
  const RateReport one = rate_lower_bound(h, set, 1e-11, 5e9);

  CHECK_THAT(sum_rate({one}), WithinRel(one.total_bps, 1e-15));

  const EffectiveChannelMatrix h2 = channel_from(arma::cx_mat(1, 1, arma::fill::ones), 2e12);
  const RateReport two = rate_lower_bound(h2, set, 1e-11, 5e9);
  CHECK_THAT(sum_rate({one, two}), WithinRel(2.0 * one.total_bps, 1e-12));

  CHECK_THROWS_AS(sum_rate({one, one}), std::invalid_argument);

  const RateReport merged = merge_rate_reports({one, two});
  CHECK_THAT(merged.per_user_bps.at(1), WithinRel(merged.total_bps, 1e-15));
}

TEST_CASE("asymptotic rate: zero-angle single user hits the closed form") {
  for (int k : {1, 4, 8}) {
    arma::cx_rowvec gains(k);
    gains.fill(std::complex<double>(3.7e-5, 0.0)); // equal real gains = zero phases
    const AsymptoticReport r = asymptotic_rate(scenario_from_blocks({gains}));
    const double expected = single_user_asymptotic_rate(5e9, 1);
    CHECK_THAT(r.total_bps, WithinRel(expected, 1e-12));
  }
}

TEST_CASE("single-user asymptotic rate: closed-form value and linearity") {
  // 1 + 1/(pi/2 - 1) = pi / (pi - 2): independent algebraic route.
  const double per_hz = std::log2(kPi / (kPi - 2.0));
  CHECK_THAT(single_user_asymptotic_rate(1.0, 1), WithinRel(per_hz, 1e-14));
  CHECK_THAT(per_hz, WithinRel(1.4605, 1e-4)); // ~1.46 bit/s/Hz

  // Table-like numbers: 50 subcarriers of 5 GHz.
  CHECK_THAT(single_user_asymptotic_rate(5e9, 50), WithinRel(3.651e11, 1e-3));
  CHECK_THAT(single_user_asymptotic_rate(5e9, 50),
             WithinRel(50.0 * single_user_asymptotic_rate(5e9, 1), 1e-14));
  CHECK_THAT(single_user_asymptotic_rate(1e9, 2),
             WithinRel(2.0 * single_user_asymptotic_rate(1e9, 1), 1e-14));
}

TEST_CASE("asymptotic rate: invariant under per-user gain rescaling") {
  std::mt19937_64 rng(2);
  const auto blocks = random_blocks({5, 3}, {0.2, 0.01}, rng);
  const double base = asymptotic_rate(scenario_from_blocks(blocks)).total_bps;
  for (double alpha : {1e-3, 0.1, 7.0, 425.0}) {
    auto scaled = blocks;
    scaled[0] *= alpha;
    CHECK_THAT(asymptotic_rate(scenario_from_blocks(scaled)).total_bps,
               WithinRel(base, 1e-10));
  }
}

TEST_CASE("asymptotic rate: matches the noise-free finite evaluation on block channels") {
  std::mt19937_64 rng(3);
  const auto blocks = random_blocks({5, 3}, {2.1e-5, 8.0e-6}, rng);
  const arma::cx_mat h = block_channel(blocks);
  const AsymptoticReport asym = asymptotic_rate(scenario_from_blocks(blocks));

  for (PrecoderKind kind : {PrecoderKind::Mrt, PrecoderKind::Zf}) {
    const EffectiveChannelMatrix cm = channel_from(h);
    const RateReport finite =
        rate_lower_bound(cm, make_precoder_set(cm, kind, 1.0), 0.0, 5e9);
    CHECK_THAT(finite.total_bps, WithinRel(asym.total_bps, 1e-9));
    for (const auto& [uid, rate] : finite.per_user_bps)
      CHECK_THAT(rate, WithinRel(asym.per_user_bps.at(uid), 1e-9));
  }
}

TEST_CASE("asymptotic rate: block magnitude mismatch is rejected") {
  arma::cx_rowvec bad(2);
  bad(0) = std::complex<double>(0.1, 0.0);
  bad(1) = std::complex<double>(0.0, 0.2);
  CHECK_THROWS_AS(asymptotic_rate(scenario_from_blocks({bad})), std::invalid_argument);
}

TEST_CASE("phase error pattern factor: boundary values") {
  CHECK(phase_error_pattern_factor(256, 0.0) == 256.0);
  const double eps = kPi / 18.0;
  const double e2_3 = eps * eps / 3.0;
  CHECK_THAT(phase_error_pattern_factor(256, eps), WithinRel(256.0 - 254.0 * e2_3, 1e-14));
  CHECK_THAT(phase_error_pattern_factor(256, eps), WithinRel(253.4209, 1e-6));
  // Single element: the formula lands slightly above 1; applied as written.
  CHECK_THAT(phase_error_pattern_factor(1, eps), WithinRel(1.0 + e2_3, 1e-14));
  CHECK_THROWS_AS(phase_error_pattern_factor(0, 0.1), std::invalid_argument);
}

namespace {

Ray make_ray(RayKind kind, std::complex<double> gain, double aod_az, double aod_el,
             double aoa_az, double aoa_el) {
  Ray r;
  r.kind = kind;
  r.gain = gain;
  r.aod_azimuth = aod_az;
  r.aod_elevation = aod_el;
  r.aoa_azimuth = aoa_az;
  r.aoa_elevation = aoa_el;
  return r;
}

// Zero-angle single-user trial factory with aligned LOS phases; K subarrays
// on one subcarrier.
std::function<LinkTrial(std::uint64_t)> zero_angle_trial_factory(int n_side, int k,
                                                                 double los_mag,
                                                                 std::uint64_t seed) {
  return [=](std::uint64_t trial) {
    const double lambda = 1e-3;
    ArrayGeometry g{n_side, n_side, lambda / 2.0, lambda};
    auto rng = make_rng(seed, RngStream::Channel, trial);
    std::uniform_real_distribution<double> ph(0.0, 2.0 * kPi);
    const double common = ph(rng);

    SubcarrierLink link;
    link.frequency_hz = kSpeedOfLight / lambda;
    link.tx_geom = g;
    link.rx_geom = g;
    link.omega_t = 10.0;
    link.omega_r = 10.0;
    UserLink user;
    user.user_id = 1;
    user.group_id = 1;
    user.distance_m = 1.0;
    user.los_gain_mag = los_mag;
    for (int c = 0; c < k; ++c) {
      link.subarray_ids.push_back(c);
      link.subarray_groups.push_back(1);
      user.per_subarray.push_back(
          SubarrayRays{{make_ray(RayKind::Los, std::polar(los_mag, common), 0, 0, 0, 0)}});
    }
    link.user_block_sizes.push_back(k);
    link.users.push_back(user);
    LinkTrial trial_data;
    trial_data.subcarriers.push_back(link);
    return trial_data;
  };
}

} // namespace

TEST_CASE("rate with phase errors: zero epsilon reproduces the clean rate") {
  const int n = 8, k = 4;
  const double los_mag = 1e-4;
  GroupSpec group;
  group.group_id = 1;
  group.user_ids = {1};
  group.reference_user_id = 1;

  arma::cx_rowvec gains(k);
  gains.fill(std::complex<double>(los_mag, 0.0));
  const AsymptoticScenario asym = scenario_from_blocks({gains});

  const PhaseErrorSeries series = rate_with_phase_errors(
      zero_angle_trial_factory(n, k, los_mag, 7), {group}, asym, PhaseErrorSpec{0.0, 0.0},
      n * n, n * n, 10.0, 10.0, {1e-2}, 1e-11, 5e9, PrecoderKind::Mrt, 5, 7);
  REQUIRE(series.points.size() == 1);
  CHECK(series.points[0].mean_with_errors_bps == series.points[0].mean_without_errors_bps);
}

TEST_CASE("rate with phase errors: analytic route equals the asymptotic rate") {
  const int n = 8, k = 4;
  const double los_mag = 1e-4;
  GroupSpec group;
  group.group_id = 1;
  group.user_ids = {1};
  group.reference_user_id = 1;
  arma::cx_rowvec gains(k);
  gains.fill(std::complex<double>(los_mag, 0.0));
  const AsymptoticScenario asym = scenario_from_blocks({gains});

  const PhaseErrorSpec spec{kPi / 18.0, kPi / 18.0};
  const PhaseErrorSeries series = rate_with_phase_errors(
      zero_angle_trial_factory(n, k, los_mag, 11), {group}, asym, spec, n * n, n * n, 10.0,
      10.0, {1e-2}, 1e-11, 5e9, PrecoderKind::Mrt, 5, 11);
  CHECK_THAT(series.analytic_rate_bps, WithinRel(series.asymptotic_rate_bps, 1e-12));
  CHECK_THAT(series.asymptotic_rate_bps, WithinRel(single_user_asymptotic_rate(5e9, 1), 1e-12));
}

TEST_CASE("rate with phase errors: small loss at moderate arrays and high power") {
  const int n = 8, k = 4;
  const double los_mag = 1e-4;
  GroupSpec group;
  group.group_id = 1;
  group.user_ids = {1};
  group.reference_user_id = 1;
  arma::cx_rowvec gains(k);
  gains.fill(std::complex<double>(los_mag, 0.0));
  const AsymptoticScenario asym = scenario_from_blocks({gains});

  const PhaseErrorSpec spec{kPi / 18.0, kPi / 18.0};
  const PhaseErrorSeries series = rate_with_phase_errors(
      zero_angle_trial_factory(n, k, los_mag, 13), {group}, asym, spec, n * n, n * n, 10.0,
      10.0, {1.0}, 1e-11, 5e9, PrecoderKind::Mrt, 50, 13);
  const auto& pt = series.points[0];
  CHECK(std::abs(pt.mean_with_errors_bps - pt.mean_without_errors_bps) <
        0.05 * pt.mean_without_errors_bps);
}

TEST_CASE("draw_phase_errors: deterministic and bounded") {
  const auto factory = zero_angle_trial_factory(4, 3, 1e-4, 5);
  const LinkTrial trial = factory(0);
  const PhaseErrorSpec spec{0.2, 0.1};
  const PhaseErrorRealization a = draw_phase_errors(trial, spec, 99, 3);
  const PhaseErrorRealization b = draw_phase_errors(trial, spec, 99, 3);
  REQUIRE(a.tx_by_subarray.size() == 3);
  for (std::size_t s = 0; s < 3; ++s) {
    CHECK(arma::norm(a.tx_by_subarray[s] - b.tx_by_subarray[s]) == 0.0);
    CHECK(arma::abs(a.tx_by_subarray[s]).max() <= 0.2);
  }
  CHECK(arma::abs(a.rx_by_user.at(1)).max() <= 0.1);
  const PhaseErrorRealization c = draw_phase_errors(trial, spec, 99, 4);
  CHECK(arma::norm(a.tx_by_subarray[0] - c.tx_by_subarray[0]) > 0.0);
}
