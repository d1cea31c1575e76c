// SPDX-License-Identifier: Apache-2.0
//
// thzsim - link-level simulator for indoor THz downlinks with one-bit DACs
// Copyright (C) 2026 the thzsim authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0

#ifndef THZSIM_RATE_HPP
#define THZSIM_RATE_HPP

#include <cstdint>
#include <functional>
#include <map>
#include <vector>

#include "thzsim/precoding.hpp"

namespace thzsim {

// SINR decomposition and rate of one (user, subcarrier) pair.
struct RateEntry {
  int user_id = 0;
  double frequency_hz = 0.0;
  double signal_w = 0.0;
  double interference_w = 0.0;
  double distortion_w = 0.0;
  double noise_w = 0.0;
  double rate_bps = 0.0;
};

struct RateReport {
  std::vector<RateEntry> entries;
  std::map<int, double> per_user_bps;
  double total_bps = 0.0;
};

// Achievable-rate lower bound of one subcarrier:
//   B log2(1 + |h_u G q_u|^2 / (sum_{i != u} |h_u G q_i|^2
//                               + h_u C_dd h_u^H + N0)).
// The distortion quadratic form must be real up to a 1e-9 relative residue
// and nonnegative up to the same tolerance. N0 = 0 evaluates the
// noise-free bound.
RateReport rate_lower_bound(const EffectiveChannelMatrix& channel, const PrecoderSet& precoder,
                            double n0_w, double bandwidth_hz);

// Convenience wrapper: precoder construction plus rate evaluation.
RateReport evaluate_subcarrier_rate(const EffectiveChannelMatrix& channel, PrecoderKind kind,
                                    double power_w, double n0_w, double bandwidth_hz);

// Merges per-subcarrier reports; (user, subcarrier) pairs must be disjoint.
RateReport merge_rate_reports(const std::vector<RateReport>& reports);
double sum_rate(const std::vector<RateReport>& reports);

// ---------------------------------------------------------------------------
// Large-array closed forms.

struct AsymptoticUser {
  int user_id = 0;
  arma::cx_rowvec los_gains; // eta_{u,k,L} over the user's subarray block
};

struct AsymptoticSubcarrier {
  double frequency_hz = 0.0;
  std::vector<AsymptoticUser> users;
};

struct AsymptoticScenario {
  double bandwidth_hz = 0.0;
  std::vector<AsymptoticSubcarrier> subcarriers;
};

struct AsymptoticReport {
  std::map<int, double> per_user_bps;
  double total_bps = 0.0;
};

// Power-independent rate limit: per user and subcarrier
//   B log2(1 + K_u^2 |eta_u|^2 / xi_u)
// with xi_u the quadratic form of the LOS gain vector in the normalized
// arcsine-law covariance of the block channel. Takes no transmit power.
AsymptoticReport asymptotic_rate(const AsymptoticScenario& scenario);

// Zero-angle single user limit: B * W * log2(1 + 1 / (pi/2 - 1)).
double single_user_asymptotic_rate(double bandwidth_hz, int subcarrier_count);

// Boresight array-gain replacement under uniform per-element phase errors:
//   MN - (MN - 1) eps^2 / 3 + eps^2 / 3.
// Note the formula yields 1 + eps^2/3 (slightly above unity) for a single
// element; it is applied verbatim.
double phase_error_pattern_factor(int element_count, double epsilon_rad);

struct PhaseErrorSpec {
  double eps_t_rad = 0.0;
  double eps_r_rad = 0.0;
};

// Uniform per-element phase errors for one trial: one vector per transmit
// subarray (global id order) and one per user, drawn in a fixed order from
// a dedicated stream of the master seed.
PhaseErrorRealization draw_phase_errors(const LinkTrial& trial, const PhaseErrorSpec& spec,
                                        std::uint64_t seed, std::uint64_t trial_index);

struct PhaseErrorSeriesPoint {
  double power_w = 0.0;
  double mean_with_errors_bps = 0.0;
  double std_with_errors_bps = 0.0;
  double mean_without_errors_bps = 0.0;
  double std_without_errors_bps = 0.0;
};

struct PhaseErrorSeries {
  std::vector<PhaseErrorSeriesPoint> points;
  // Large-array rate evaluated through the averaged-pattern factors; equals
  // the asymptotic rate because the prefactor cancels from the SINR.
  double analytic_rate_bps = 0.0;
  double asymptotic_rate_bps = 0.0;
};

// Monte Carlo rate with phase uncertainties: per trial, draws per-element
// errors, perturbs the beamforming vectors at both ends, re-evaluates the
// rate bound, and averages; the unperturbed rate is evaluated on the same
// channel draws. Beams follow the LOS geometry.
PhaseErrorSeries rate_with_phase_errors(
    const std::function<LinkTrial(std::uint64_t)>& draw_trial,
    const std::vector<GroupSpec>& groups, const AsymptoticScenario& asymptotic,
    const PhaseErrorSpec& errors, int tx_elements, int rx_elements, double omega_t,
    double omega_r, const std::vector<double>& powers_w, double n0_w, double bandwidth_hz,
    PrecoderKind kind, int trials, std::uint64_t seed, unsigned jobs = 1);

} // namespace thzsim

#endif // THZSIM_RATE_HPP
