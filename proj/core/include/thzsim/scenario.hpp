// SPDX-License-Identifier: Apache-2.0
//
// thzsim - link-level simulator for indoor THz downlinks with one-bit DACs
// Copyright (C) 2026 the thzsim authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0

#ifndef THZSIM_SCENARIO_HPP
#define THZSIM_SCENARIO_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>
#include <numbers>

#include "thzsim/beamforming.hpp"
#include "thzsim/precoding.hpp"
#include "thzsim/rate.hpp"

namespace thzsim {

enum class BeamMode { Codebook, Los };
enum class LosPhaseMode { Iid, Aligned };

enum class SpacingMode {
  HalfWavelengthAtReference, // one physical spacing, lambda_ref / 2
  FixedPhysical,             // user-supplied spacing in meters
  HalfWavelengthPerSubcarrier
};

struct SpacingPolicy {
  SpacingMode mode = SpacingMode::HalfWavelengthAtReference;
  double reference_frequency_hz = 0.0; // 0: midpoint of the covered spectrum
  double value_m = 0.0;                // FixedPhysical only
};

struct UserConfig {
  int id = 0;
  double distance_m = 0.0;
  int group_id = 0;
  std::vector<std::pair<double, double>> windows_hz;
  std::optional<RaySpec::LosAngles> los_angles; // unset: drawn per trial
};

struct NlosConfig {
  int order1_count = 2;
  int order2_count = 1;
  double order1_loss_db = 10.0;
  double order2_loss_db = 20.0;
  double azimuth_min = -std::numbers::pi / 2.0;
  double azimuth_max = std::numbers::pi / 2.0;
  double elevation_min = 0.0;
  double elevation_max = std::numbers::pi;
  LosPhaseMode los_phase = LosPhaseMode::Iid;
};

struct CodebookConfig {
  double separation_rad = std::numbers::pi / 18.0;
  double azimuth_min = -std::numbers::pi / 2.0;
  double azimuth_max = std::numbers::pi / 2.0;
  double elevation_min = 0.0;
  double elevation_max = std::numbers::pi;
};

struct PhaseErrorConfig {
  bool enabled = false;
  double eps_t_rad = std::numbers::pi / 18.0;
  double eps_r_rad = std::numbers::pi / 18.0;
};

struct ScenarioConfig {
  std::uint64_t seed = 1;
  int trials = 200;
  double bandwidth_hz = 5e9;
  double noise_dbm = -75.0;
  double omega_t_dbi = 20.0;
  double omega_r_dbi = 20.0;
  std::vector<double> power_grid_dbm; // default -20 .. 40 dBm, 5 dB steps
  double power_dbm = 40.0;            // used by non-power sweeps
  PrecoderKind precoder = PrecoderKind::Mrt;
  BeamMode beam_mode = BeamMode::Los;

  int total_subarrays = 8;
  std::map<int, int> group_allocation;     // group id -> subarray count
  std::map<int, int> group_reference_user; // group id -> user id

  int tx_rows = 16, tx_cols = 16, rx_rows = 16, rx_cols = 16;
  SpacingPolicy spacing;

  std::vector<UserConfig> users; // kept sorted by id
  NlosConfig nlos;
  CodebookConfig codebook;
  PhaseErrorConfig phase_errors;
  std::string absorption_file; // empty: zero absorption

  void validate(); // sorts users, fills defaulted reference users, throws on violations

  double noise_w() const;
  double omega_t_amplitude() const;
  double omega_r_amplitude() const;
  double reference_frequency_hz() const; // resolved spacing reference
  ArrayGeometry tx_geometry(double frequency_hz) const;
  ArrayGeometry rx_geometry(double frequency_hz) const;
  std::vector<GroupSpec> groups() const;
  std::map<int, std::vector<int>> subarray_ids_by_group() const;
  const UserConfig& user(int id) const;
  AbsorptionModel absorption() const;
};

// The three-user arrangement the documented defaults describe: distances 10/5/1 m,
// two groups with a 5/3 subarray split, 5 GHz subcarriers.
ScenarioConfig default_scenario();

// Parses a JSON scenario document. Missing fields take the defaults above;
// unknown keys and schema violations raise errors naming the field path.
ScenarioConfig parse_scenario(const std::string& json_text);
ScenarioConfig parse_scenario_file(const std::string& path);

struct SubcarrierInfo {
  double frequency_hz = 0.0;
  std::vector<int> user_ids; // U^w, ascending
  int k_total = 0;           // K^w
};

struct SubcarrierAllocation {
  std::vector<SubcarrierInfo> subcarriers;               // ascending frequency
  std::map<int, std::vector<std::size_t>> per_user;      // user id -> indices
  std::vector<std::string> warnings;
};

// Tiles every window with floor(width / B) subcarriers of width B starting
// at the lower edge; users whose windows produce identical frequency bins
// share them. Windows narrower than B yield no subcarriers (warning).
SubcarrierAllocation allocate_subcarriers(const ScenarioConfig& config);

} // namespace thzsim

#endif // THZSIM_SCENARIO_HPP
