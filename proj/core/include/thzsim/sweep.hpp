// SPDX-License-Identifier: Apache-2.0
//
// thzsim - link-level simulator for indoor THz downlinks with one-bit DACs
// Copyright (C) 2026 the thzsim authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0

#ifndef THZSIM_SWEEP_HPP
#define THZSIM_SWEEP_HPP

#include <string>
#include <vector>

#include "thzsim/scenario.hpp"

namespace thzsim {

// One channel realization for every subcarrier of the scenario. Ray angles
// are drawn once per user (collocated subarrays share the geometry); the
// per-path phases are independent per subarray and subcarrier, except for
// the LOS phase in aligned mode, which is shared across a user's subarrays.
LinkTrial draw_link_trial(const ScenarioConfig& config, const SubcarrierAllocation& allocation,
                          std::uint64_t trial_index);

// Analog beams for one trial according to the configured mode.
BeamSelection select_beams(const ScenarioConfig& config, const LinkTrial& trial);

// Large-array reference built from the LOS gains of a drawn trial.
AsymptoticScenario trial_asymptotic_scenario(const ScenarioConfig& config,
                                             const LinkTrial& trial);

// Large-array reference with unit-phase LOS gains (deterministic; the form
// the zero-angle corollary assumes).
AsymptoticScenario aligned_asymptotic_scenario(const ScenarioConfig& config,
                                               const SubcarrierAllocation& allocation);

// Effective channels of one trial plus the large-array reference built from
// its LOS gains. Channels are power-independent, so sweeps assemble them
// once per trial. Phase errors are applied when the scenario enables them;
// the trial index seeds their stream.
struct TrialChannels {
  std::vector<EffectiveChannelMatrix> per_subcarrier;
  std::map<int, double> per_user_asymptotic_bps;
};

TrialChannels assemble_trial(const ScenarioConfig& config, const LinkTrial& trial,
                             const BeamSelection& selection, std::uint64_t trial_index);

// Precoding at P^w = total power / subcarrier count and the rate bound per
// (user, subcarrier), summed per user.
std::map<int, double> rates_for_power(const ScenarioConfig& config,
                                      const TrialChannels& channels, double total_power_w);

struct TrialEvaluation {
  std::map<int, double> per_user_rate_bps;
  std::map<int, double> per_user_asymptotic_bps;
};

// Convenience wrapper around assemble_trial + rates_for_power.
TrialEvaluation evaluate_trial(const ScenarioConfig& config, const LinkTrial& trial,
                               const BeamSelection& selection, double total_power_w,
                               std::uint64_t trial_index);

enum class SweepAxis { Power, ArraySize, SubarrayCount };

struct SweepRow {
  std::string axis_name;
  double axis_value = 0.0;
  std::string precoder;
  std::string beam_mode;
  int user_id = 0;
  double mean_rate_bps = 0.0;
  double std_rate_bps = 0.0;
  double asymptotic_rate_bps = 0.0;
  int trials = 0;
  std::uint64_t seed = 0;
};

struct SweepResult {
  std::vector<SweepRow> rows; // data rows sorted by (axis value, user id),
                              // then per-user asymptotic reference rows
  std::vector<std::string> warnings;
};

// Monte Carlo sweep along one axis. Channel draws depend only on
// (seed, trial), so power and array-size points see common random numbers.
SweepResult run_sweep(const ScenarioConfig& config, SweepAxis axis,
                      const std::vector<double>& values, unsigned jobs = 1);

std::string render_csv(const SweepResult& result);
void emit_csv(const SweepResult& result, const std::string& path);

} // namespace thzsim

#endif // THZSIM_SWEEP_HPP
