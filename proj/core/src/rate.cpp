// SPDX-License-Identifier: Apache-2.0
//
// thzsim - link-level simulator for indoor THz downlinks with one-bit DACs
// Copyright (C) 2026 the thzsim authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0

#include "thzsim/rate.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>
#include <numbers>

#include "thzsim/common.hpp"

namespace thzsim {

namespace {

constexpr double kPi = std::numbers::pi;

[[noreturn]] void fail(const std::string& msg) { throw std::invalid_argument(msg); }

// Real part of a Hermitian quadratic form with residue and sign checks.
double hermitian_quadratic_form(const arma::cx_rowvec& h, const arma::cx_mat& c,
                                const char* what) {
  const std::complex<double> value = arma::as_scalar(h * c * h.t());
  const double scale = std::max(std::abs(value), 1e-300);
  if (std::abs(std::imag(value)) > 1e-9 * scale)
    fail(std::string(what) + ": quadratic form has a non-negligible imaginary part");
  double re = std::real(value);
  if (re < -1e-9 * scale)
    fail(std::string(what) + ": quadratic form is negative beyond tolerance");
  return std::max(re, 0.0);
}

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v)
    s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

double sample_std(const std::vector<double>& v, double mean) {
  if (v.size() < 2)
    return 0.0;
  double s = 0.0;
  for (double x : v)
    s += (x - mean) * (x - mean);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

} // namespace

RateReport rate_lower_bound(const EffectiveChannelMatrix& channel, const PrecoderSet& precoder,
                            double n0_w, double bandwidth_hz) {
  if (n0_w < 0.0)
    fail("rate bound: noise power must be >= 0");
  if (!(bandwidth_hz > 0.0))
    fail("rate bound: bandwidth must be positive");
  const arma::cx_mat& h = channel.matrix;
  if (h.n_cols != precoder.q.n_rows || h.n_rows != precoder.q.n_cols)
    fail("rate bound: channel and precoder dimensions do not match");

  // S(u, i) = h_u G q_i
  const arma::cx_mat s = h * arma::diagmat(precoder.g_diag) * precoder.q;

  RateReport report;
  report.entries.reserve(h.n_rows);
  for (arma::uword u = 0; u < h.n_rows; ++u) {
    RateEntry e;
    e.user_id = channel.user_order.empty() ? static_cast<int>(u) : channel.user_order[u];
    e.frequency_hz = channel.frequency_hz;
    e.noise_w = n0_w;
    e.signal_w = std::norm(s(u, u));
    for (arma::uword i = 0; i < s.n_cols; ++i)
      if (i != u)
        e.interference_w += std::norm(s(u, i));
    e.distortion_w = hermitian_quadratic_form(h.row(u), precoder.c_dd, "rate bound distortion");

    const double denom = e.interference_w + e.distortion_w + e.noise_w;
    if (denom > 0.0)
      e.rate_bps = bandwidth_hz * std::log2(1.0 + e.signal_w / denom);
    else if (e.signal_w > 0.0)
      fail("rate bound: zero denominator with nonzero signal");
    report.entries.push_back(e);
    report.per_user_bps[e.user_id] += e.rate_bps;
    report.total_bps += e.rate_bps;
  }
  return report;
}

RateReport evaluate_subcarrier_rate(const EffectiveChannelMatrix& channel, PrecoderKind kind,
                                    double power_w, double n0_w, double bandwidth_hz) {
  return rate_lower_bound(channel, make_precoder_set(channel, kind, power_w), n0_w,
                          bandwidth_hz);
}

RateReport merge_rate_reports(const std::vector<RateReport>& reports) {
  RateReport merged;
  std::set<std::pair<int, double>> seen;
  for (const RateReport& r : reports)
    for (const RateEntry& e : r.entries) {
      if (!seen.emplace(e.user_id, e.frequency_hz).second)
        fail("sum rate: duplicate (user, subcarrier) pair for user " +
             std::to_string(e.user_id));
      merged.entries.push_back(e);
      merged.per_user_bps[e.user_id] += e.rate_bps;
      merged.total_bps += e.rate_bps;
    }
  return merged;
}

double sum_rate(const std::vector<RateReport>& reports) {
  return merge_rate_reports(reports).total_bps;
}

namespace {

// Normalized arcsine-law covariance of one user block:
//   C0(k, l) = asin(Re r) + j asin(Im r) - r
// with r the diagonally normalized correlation of the gain vector. The
// diagonal is pinned to (pi/2 - 1) and the normalization is evaluated as
// (x / p_i) * sqrt(p_i / p_j), so equal-phase blocks reproduce the
// closed-form constant bit for bit; asin is steep at unit correlation and
// would otherwise amplify 1-ulp rounding.
arma::cx_mat block_normalized_covariance(const arma::cx_rowvec& gains) {
  const arma::uword k = gains.n_elem;
  arma::vec power(k);
  for (arma::uword i = 0; i < k; ++i) {
    power(i) = std::real(std::conj(gains(i)) * gains(i));
    if (!(power(i) > 0.0))
      fail("asymptotic rate: zero LOS gain");
  }
  arma::cx_mat c0(k, k);
  for (arma::uword i = 0; i < k; ++i) {
    c0(i, i) = std::complex<double>(kPi / 2.0 - 1.0, 0.0);
    for (arma::uword j = i + 1; j < k; ++j) {
      const std::complex<double> x = std::conj(gains(i)) * gains(j);
      const std::complex<double> r = (x / power(i)) * std::sqrt(power(i) / power(j));
      const std::complex<double> value = arcsine_law_entry(r);
      c0(i, j) = value;
      c0(j, i) = std::conj(value);
    }
  }
  return c0;
}

} // namespace

AsymptoticReport asymptotic_rate(const AsymptoticScenario& scenario) {
  if (!(scenario.bandwidth_hz > 0.0))
    fail("asymptotic rate: bandwidth must be positive");
  AsymptoticReport report;
  for (const AsymptoticSubcarrier& sc : scenario.subcarriers) {
    for (const AsymptoticUser& user : sc.users) {
      const arma::uword k = user.los_gains.n_elem;
      if (k == 0)
        fail("asymptotic rate: empty subarray block");
      const double mag = std::abs(user.los_gains(0));
      for (arma::uword i = 0; i < k; ++i)
        if (std::abs(std::abs(user.los_gains(i)) - mag) > 1e-9 * mag)
          fail("asymptotic rate: LOS gain magnitudes must agree within a user block");

      // Cross-user blocks of the full covariance vanish, so the quadratic
      // form reduces to the user's own block.
      const arma::cx_mat c0 = block_normalized_covariance(user.los_gains);
      std::complex<double> xi{0.0, 0.0};
      for (arma::uword i = 0; i < k; ++i)
        for (arma::uword j = 0; j < k; ++j)
          xi += user.los_gains(i) * c0(i, j) * std::conj(user.los_gains(j));
      const double xi_re = std::real(xi);
      if (std::abs(std::imag(xi)) > 1e-9 * std::max(std::abs(xi), 1e-300))
        fail("asymptotic rate: xi has a non-negligible imaginary part");
      if (!(xi_re > 0.0))
        fail("asymptotic rate: xi must be positive");

      const double k_count = static_cast<double>(k);
      const double sinr = (k_count * k_count * mag * mag) / xi_re;
      const double rate = scenario.bandwidth_hz * std::log2(1.0 + sinr);
      report.per_user_bps[user.user_id] += rate;
      report.total_bps += rate;
    }
  }
  return report;
}

double single_user_asymptotic_rate(double bandwidth_hz, int subcarrier_count) {
  if (!(bandwidth_hz > 0.0))
    fail("single-user asymptotic rate: bandwidth must be positive");
  if (subcarrier_count < 1)
    fail("single-user asymptotic rate: subcarrier count must be >= 1");
  return bandwidth_hz * static_cast<double>(subcarrier_count) *
         std::log2(1.0 + 1.0 / (kPi / 2.0 - 1.0));
}

double phase_error_pattern_factor(int element_count, double epsilon_rad) {
  if (element_count < 1)
    fail("phase error factor: element count must be >= 1");
  if (epsilon_rad < 0.0)
    fail("phase error factor: epsilon must be >= 0");
  const double mn = static_cast<double>(element_count);
  const double e2_3 = epsilon_rad * epsilon_rad / 3.0;
  return mn - (mn - 1.0) * e2_3 + e2_3;
}

PhaseErrorRealization draw_phase_errors(const LinkTrial& trial, const PhaseErrorSpec& spec,
                                        std::uint64_t seed, std::uint64_t trial_index) {
  if (spec.eps_t_rad < 0.0 || spec.eps_r_rad < 0.0)
    fail("phase errors: epsilon must be >= 0");
  if (trial.subcarriers.empty())
    fail("phase errors: empty trial");
  const ArrayGeometry& tx = trial.subcarriers.front().tx_geom;
  const ArrayGeometry& rx = trial.subcarriers.front().rx_geom;

  int max_subarray = -1;
  std::set<int> user_ids;
  for (const SubcarrierLink& link : trial.subcarriers) {
    for (int sid : link.subarray_ids)
      max_subarray = std::max(max_subarray, sid);
    for (const UserLink& u : link.users)
      user_ids.insert(u.user_id);
  }

  auto rng = make_rng(seed, RngStream::PhaseError, trial_index);
  auto draw_vec = [&rng](int n, double eps) {
    arma::vec v(n, arma::fill::zeros);
    if (eps > 0.0) {
      std::uniform_real_distribution<double> dist(-eps, eps);
      for (int i = 0; i < n; ++i)
        v(i) = dist(rng);
    }
    return v;
  };

  PhaseErrorRealization out;
  out.tx_by_subarray.reserve(max_subarray + 1);
  for (int sid = 0; sid <= max_subarray; ++sid)
    out.tx_by_subarray.push_back(draw_vec(tx.element_count(), spec.eps_t_rad));
  for (int uid : user_ids)
    out.rx_by_user.emplace(uid, draw_vec(rx.element_count(), spec.eps_r_rad));
  return out;
}

PhaseErrorSeries rate_with_phase_errors(
    const std::function<LinkTrial(std::uint64_t)>& draw_trial,
    const std::vector<GroupSpec>& groups, const AsymptoticScenario& asymptotic,
    const PhaseErrorSpec& errors, int tx_elements, int rx_elements, double omega_t,
    double omega_r, const std::vector<double>& powers_w, double n0_w, double bandwidth_hz,
    PrecoderKind kind, int trials, std::uint64_t seed, unsigned jobs) {
  if (trials < 1)
    fail("rate with phase errors: trials must be >= 1");
  if (powers_w.empty())
    fail("rate with phase errors: power grid must not be empty");

  const std::size_t n_powers = powers_w.size();
  std::vector<std::vector<double>> with_err(n_powers, std::vector<double>(trials, 0.0));
  std::vector<std::vector<double>> without_err(n_powers, std::vector<double>(trials, 0.0));

  for_each_index(static_cast<std::size_t>(trials), jobs, [&](std::size_t t) {
    const LinkTrial trial = draw_trial(t);
    const BeamSelection selection = select_beam_angles_los(trial, groups);
    const PhaseErrorRealization draw = draw_phase_errors(trial, errors, seed, t);

    std::vector<EffectiveChannelMatrix> clean, perturbed;
    clean.reserve(trial.subcarriers.size());
    perturbed.reserve(trial.subcarriers.size());
    for (const SubcarrierLink& link : trial.subcarriers) {
      clean.push_back(assemble_link_channel(link, selection, nullptr));
      perturbed.push_back(assemble_link_channel(link, selection, &draw));
    }
    for (std::size_t pi = 0; pi < n_powers; ++pi) {
      double r_clean = 0.0, r_err = 0.0;
      for (std::size_t w = 0; w < clean.size(); ++w) {
        r_clean +=
            evaluate_subcarrier_rate(clean[w], kind, powers_w[pi], n0_w, bandwidth_hz).total_bps;
        r_err += evaluate_subcarrier_rate(perturbed[w], kind, powers_w[pi], n0_w, bandwidth_hz)
                     .total_bps;
      }
      without_err[pi][t] = r_clean;
      with_err[pi][t] = r_err;
    }
  });

  PhaseErrorSeries series;
  for (std::size_t pi = 0; pi < n_powers; ++pi) {
    PhaseErrorSeriesPoint pt;
    pt.power_w = powers_w[pi];
    pt.mean_with_errors_bps = mean_of(with_err[pi]);
    pt.std_with_errors_bps = sample_std(with_err[pi], pt.mean_with_errors_bps);
    pt.mean_without_errors_bps = mean_of(without_err[pi]);
    pt.std_without_errors_bps = sample_std(without_err[pi], pt.mean_without_errors_bps);
    series.points.push_back(pt);
  }

  // Analytic route: the averaged radiation pattern replaces the element
  // counts in the channel prefactor; evaluating the noise-free bound on the
  // block channel then reproduces the large-array rate exactly.
  const double factor_t = phase_error_pattern_factor(tx_elements, errors.eps_t_rad);
  const double factor_r = phase_error_pattern_factor(rx_elements, errors.eps_r_rad);
  const double prefactor = std::sqrt(factor_t * factor_r) * omega_t * omega_r;
  double analytic = 0.0;
  for (const AsymptoticSubcarrier& sc : asymptotic.subcarriers) {
    std::vector<arma::cx_rowvec> blocks;
    std::vector<int> user_ids;
    for (const AsymptoticUser& u : sc.users) {
      blocks.push_back(u.los_gains);
      user_ids.push_back(u.user_id);
    }
    std::vector<arma::cx_rowvec> rows;
    for (std::size_t u = 0; u < blocks.size(); ++u)
      rows.push_back(prefactor * asymptotic_effective_channel(u, blocks));
    const EffectiveChannelMatrix h =
        assemble_channel_matrix(sc.frequency_hz, user_ids, rows, {});
    analytic += evaluate_subcarrier_rate(h, kind, 1.0, 0.0, asymptotic.bandwidth_hz).total_bps;
  }
  series.analytic_rate_bps = analytic;
  series.asymptotic_rate_bps = asymptotic_rate(asymptotic).total_bps;
  return series;
}

} // namespace thzsim
