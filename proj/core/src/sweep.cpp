// SPDX-License-Identifier: Apache-2.0
//
// thzsim - link-level simulator for indoor THz downlinks with one-bit DACs
// Copyright (C) 2026 the thzsim authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0

#include "thzsim/sweep.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <numbers>

#include "thzsim/common.hpp"

namespace thzsim {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

[[noreturn]] void fail(const std::string& msg) { throw std::invalid_argument(msg); }

struct UserAngleDraw {
  RaySpec::LosAngles los;
  std::vector<RaySpec::LosAngles> nlos; // reused field layout for the four angles
};

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

LinkTrial draw_link_trial(const ScenarioConfig& config, const SubcarrierAllocation& allocation,
                          std::uint64_t trial_index) {
  auto rng = make_rng(config.seed, RngStream::Channel, trial_index);
  std::uniform_real_distribution<double> phase(0.0, kTwoPi);
  std::uniform_real_distribution<double> az(config.nlos.azimuth_min, config.nlos.azimuth_max);
  std::uniform_real_distribution<double> el(config.nlos.elevation_min,
                                            config.nlos.elevation_max);

  const AbsorptionModel abs = config.absorption();
  const auto group_ids = config.subarray_ids_by_group();
  const int n_nlos = config.nlos.order1_count + config.nlos.order2_count;
  const double gamma1 = std::pow(10.0, -config.nlos.order1_loss_db / 20.0);
  const double gamma2 = std::pow(10.0, -config.nlos.order2_loss_db / 20.0);

  // Draw order is fixed: per user (ascending id) the ray geometry, then per
  // subcarrier and subarray the path phases. Nothing downstream (beam mode,
  // precoder, power) influences the stream.
  struct PerUserDraws {
    UserAngleDraw angles;
    // phases[w][column][ray]; ray 0 is LOS
    std::vector<std::vector<std::vector<double>>> phases;
  };
  std::map<int, PerUserDraws> draws;

  for (const UserConfig& user : config.users) {
    PerUserDraws d;
    if (user.los_angles) {
      d.angles.los = *user.los_angles;
    } else {
      d.angles.los.aod_azimuth = az(rng);
      d.angles.los.aod_elevation = el(rng);
      d.angles.los.aoa_azimuth = az(rng);
      d.angles.los.aoa_elevation = el(rng);
    }
    for (int i = 0; i < n_nlos; ++i) {
      RaySpec::LosAngles a;
      a.aod_azimuth = az(rng);
      a.aod_elevation = el(rng);
      a.aoa_azimuth = az(rng);
      a.aoa_elevation = el(rng);
      d.angles.nlos.push_back(a);
    }
    const auto it = allocation.per_user.find(user.id);
    if (it == allocation.per_user.end())
      fail("trial draw: user " + std::to_string(user.id) + " has no subcarriers");
    for (std::size_t wi = 0; wi < it->second.size(); ++wi) {
      const SubcarrierInfo& info = allocation.subcarriers[it->second[wi]];
      std::vector<std::vector<double>> per_column;
      const double aligned_los_phase =
          config.nlos.los_phase == LosPhaseMode::Aligned ? phase(rng) : 0.0;
      for (int c = 0; c < info.k_total; ++c) {
        std::vector<double> ray_phases(1 + n_nlos);
        ray_phases[0] =
            config.nlos.los_phase == LosPhaseMode::Aligned ? aligned_los_phase : phase(rng);
        for (int r = 0; r < n_nlos; ++r)
          ray_phases[1 + r] = phase(rng);
        per_column.push_back(std::move(ray_phases));
      }
      d.phases.push_back(std::move(per_column));
    }
    draws.emplace(user.id, std::move(d));
  }

  LinkTrial trial;
  trial.subcarriers.reserve(allocation.subcarriers.size());
  for (std::size_t w = 0; w < allocation.subcarriers.size(); ++w) {
    const SubcarrierInfo& info = allocation.subcarriers[w];
    SubcarrierLink link;
    link.frequency_hz = info.frequency_hz;
    link.tx_geom = config.tx_geometry(info.frequency_hz);
    link.rx_geom = config.rx_geometry(info.frequency_hz);
    link.omega_t = config.omega_t_amplitude();
    link.omega_r = config.omega_r_amplitude();

    // Column layout: per user (ascending), the user's group block with
    // ascending global subarray ids.
    for (int uid : info.user_ids) {
      const UserConfig& user = config.user(uid);
      const std::vector<int>& ids = group_ids.at(user.group_id);
      link.user_block_sizes.push_back(static_cast<int>(ids.size()));
      for (int sid : ids) {
        link.subarray_ids.push_back(sid);
        link.subarray_groups.push_back(user.group_id);
      }
    }

    for (int uid : info.user_ids) {
      const UserConfig& user = config.user(uid);
      const PerUserDraws& d = draws.at(uid);
      const auto& windows = allocation.per_user.at(uid);
      const std::size_t wi =
          std::find(windows.begin(), windows.end(), w) - windows.begin();

      UserLink ul;
      ul.user_id = uid;
      ul.group_id = user.group_id;
      ul.distance_m = user.distance_m;
      const double los_gain = los_path_gain(info.frequency_hz, user.distance_m, abs);
      ul.los_gain_mag = std::sqrt(los_gain);
      const double amp1 = ul.los_gain_mag * gamma1;
      const double amp2 = ul.los_gain_mag * gamma2;

      for (int c = 0; c < info.k_total; ++c) {
        const std::vector<double>& ray_phases = d.phases[wi][c];
        SubarrayRays sr;
        Ray los;
        los.kind = RayKind::Los;
        los.aod_azimuth = d.angles.los.aod_azimuth;
        los.aod_elevation = d.angles.los.aod_elevation;
        los.aoa_azimuth = d.angles.los.aoa_azimuth;
        los.aoa_elevation = d.angles.los.aoa_elevation;
        los.gain = std::polar(ul.los_gain_mag, ray_phases[0]);
        sr.rays.push_back(los);
        for (int r = 0; r < n_nlos; ++r) {
          Ray ray;
          ray.kind = r < config.nlos.order1_count ? RayKind::Nlos1 : RayKind::Nlos2;
          ray.aod_azimuth = d.angles.nlos[r].aod_azimuth;
          ray.aod_elevation = d.angles.nlos[r].aod_elevation;
          ray.aoa_azimuth = d.angles.nlos[r].aoa_azimuth;
          ray.aoa_elevation = d.angles.nlos[r].aoa_elevation;
          ray.gain = std::polar(r < config.nlos.order1_count ? amp1 : amp2, ray_phases[1 + r]);
          sr.rays.push_back(ray);
        }
        ul.per_subarray.push_back(std::move(sr));
      }
      link.users.push_back(std::move(ul));
    }
    trial.subcarriers.push_back(std::move(link));
  }
  return trial;
}

BeamSelection select_beams(const ScenarioConfig& config, const LinkTrial& trial) {
  const std::vector<GroupSpec> groups = config.groups();
  if (config.beam_mode == BeamMode::Los)
    return select_beam_angles_los(trial, groups);
  const Codebook cb =
      build_codebook(config.codebook.separation_rad, config.codebook.azimuth_min,
                     config.codebook.azimuth_max, config.codebook.elevation_min,
                     config.codebook.elevation_max);
  return select_beam_angles_codebook(trial, cb, cb, groups);
}

AsymptoticScenario trial_asymptotic_scenario(const ScenarioConfig& config,
                                             const LinkTrial& trial) {
  AsymptoticScenario scenario;
  scenario.bandwidth_hz = config.bandwidth_hz;
  for (const SubcarrierLink& link : trial.subcarriers) {
    AsymptoticSubcarrier sc;
    sc.frequency_hz = link.frequency_hz;
    for (const UserLink& user : link.users) {
      AsymptoticUser au;
      au.user_id = user.user_id;
      std::vector<std::complex<double>> gains;
      for (std::size_t c = 0; c < link.subarray_groups.size(); ++c) {
        if (link.subarray_groups[c] != user.group_id)
          continue;
        for (const Ray& r : user.per_subarray[c].rays)
          if (r.kind == RayKind::Los)
            gains.push_back(r.gain);
      }
      au.los_gains = arma::cx_rowvec(gains);
      sc.users.push_back(std::move(au));
    }
    scenario.subcarriers.push_back(std::move(sc));
  }
  return scenario;
}

AsymptoticScenario aligned_asymptotic_scenario(const ScenarioConfig& config,
                                               const SubcarrierAllocation& allocation) {
  const AbsorptionModel abs = config.absorption();
  AsymptoticScenario scenario;
  scenario.bandwidth_hz = config.bandwidth_hz;
  for (const SubcarrierInfo& info : allocation.subcarriers) {
    AsymptoticSubcarrier sc;
    sc.frequency_hz = info.frequency_hz;
    for (int uid : info.user_ids) {
      const UserConfig& user = config.user(uid);
      const int k_user = config.group_allocation.at(user.group_id);
      AsymptoticUser au;
      au.user_id = uid;
      const double mag = std::sqrt(los_path_gain(info.frequency_hz, user.distance_m, abs));
      au.los_gains = arma::cx_rowvec(k_user);
      au.los_gains.fill(std::complex<double>(mag, 0.0));
      sc.users.push_back(std::move(au));
    }
    scenario.subcarriers.push_back(std::move(sc));
  }
  return scenario;
}

TrialChannels assemble_trial(const ScenarioConfig& config, const LinkTrial& trial,
                             const BeamSelection& selection, std::uint64_t trial_index) {
  PhaseErrorRealization errors;
  const PhaseErrorRealization* errors_ptr = nullptr;
  if (config.phase_errors.enabled) {
    PhaseErrorSpec spec{config.phase_errors.eps_t_rad, config.phase_errors.eps_r_rad};
    errors = draw_phase_errors(trial, spec, config.seed, trial_index);
    errors_ptr = &errors;
  }

  TrialChannels out;
  out.per_subcarrier.reserve(trial.subcarriers.size());
  for (const SubcarrierLink& link : trial.subcarriers)
    out.per_subcarrier.push_back(assemble_link_channel(link, selection, errors_ptr));
  out.per_user_asymptotic_bps =
      asymptotic_rate(trial_asymptotic_scenario(config, trial)).per_user_bps;
  return out;
}

std::map<int, double> rates_for_power(const ScenarioConfig& config,
                                      const TrialChannels& channels, double total_power_w) {
  if (!(total_power_w > 0.0))
    fail("trial evaluation: power must be positive");
  const double power_per_subcarrier =
      total_power_w / static_cast<double>(channels.per_subcarrier.size());
  const double n0 = config.noise_w();

  std::vector<RateReport> reports;
  reports.reserve(channels.per_subcarrier.size());
  for (const EffectiveChannelMatrix& h : channels.per_subcarrier)
    reports.push_back(evaluate_subcarrier_rate(h, config.precoder, power_per_subcarrier, n0,
                                               config.bandwidth_hz));
  return merge_rate_reports(reports).per_user_bps;
}

TrialEvaluation evaluate_trial(const ScenarioConfig& config, const LinkTrial& trial,
                               const BeamSelection& selection, double total_power_w,
                               std::uint64_t trial_index) {
  const TrialChannels channels = assemble_trial(config, trial, selection, trial_index);
  TrialEvaluation out;
  out.per_user_rate_bps = rates_for_power(config, channels, total_power_w);
  out.per_user_asymptotic_bps = channels.per_user_asymptotic_bps;
  return out;
}

namespace {

ScenarioConfig config_for_axis(const ScenarioConfig& base, SweepAxis axis, double value) {
  ScenarioConfig cfg = base;
  switch (axis) {
  case SweepAxis::Power:
    break; // power handled by the caller
  case SweepAxis::ArraySize: {
    const int n = static_cast<int>(std::llround(value));
    if (n < 1 || std::abs(value - n) > 1e-9)
      fail("array-size sweep: values must be positive integers");
    cfg.tx_rows = cfg.tx_cols = cfg.rx_rows = cfg.rx_cols = n;
    break;
  }
  case SweepAxis::SubarrayCount: {
    const int k = static_cast<int>(std::llround(value));
    if (k < 1 || std::abs(value - k) > 1e-9)
      fail("subarray sweep: values must be positive integers");
    if (cfg.group_allocation.size() != 1)
      fail("subarray sweep: requires a single-group scenario");
    cfg.total_subarrays = k;
    cfg.group_allocation.begin()->second = k;
    break;
  }
  }
  return cfg;
}

const char* axis_name(SweepAxis axis) {
  switch (axis) {
  case SweepAxis::Power:
    return "power_dbm";
  case SweepAxis::ArraySize:
    return "array_size";
  case SweepAxis::SubarrayCount:
    return "subarray_count";
  }
  return "?";
}

} // namespace

SweepResult run_sweep(const ScenarioConfig& config, SweepAxis axis,
                      const std::vector<double>& values, unsigned jobs) {
  if (values.empty())
    fail("sweep: axis values must not be empty");

  SweepResult result;
  const std::string precoder_name = config.precoder == PrecoderKind::Mrt ? "mrt" : "zf";
  const std::string beam_name = config.beam_mode == BeamMode::Los ? "los" : "codebook";

  // per (axis value) -> per user -> per trial
  struct ValueStats {
    std::map<int, std::vector<double>> rates;
    std::map<int, std::vector<double>> asymptotes;
  };
  std::vector<ValueStats> stats(values.size());
  for (ValueStats& s : stats)
    for (const UserConfig& u : config.users) {
      s.rates[u.id].assign(config.trials, 0.0);
      s.asymptotes[u.id].assign(config.trials, 0.0);
    }

  if (axis == SweepAxis::Power) {
    const SubcarrierAllocation allocation = allocate_subcarriers(config);
    result.warnings = allocation.warnings;
    for_each_index(static_cast<std::size_t>(config.trials), jobs, [&](std::size_t t) {
      const LinkTrial trial = draw_link_trial(config, allocation, t);
      const BeamSelection selection = select_beams(config, trial);
      const TrialChannels channels = assemble_trial(config, trial, selection, t);
      for (std::size_t vi = 0; vi < values.size(); ++vi) {
        const auto rates = rates_for_power(config, channels, dbm_to_watts(values[vi]));
        for (const auto& [uid, rate] : rates)
          stats[vi].rates[uid][t] = rate;
        for (const auto& [uid, rate] : channels.per_user_asymptotic_bps)
          stats[vi].asymptotes[uid][t] = rate;
      }
    });
  } else {
    for (std::size_t vi = 0; vi < values.size(); ++vi) {
      const ScenarioConfig cfg = config_for_axis(config, axis, values[vi]);
      const SubcarrierAllocation allocation = allocate_subcarriers(cfg);
      if (vi == 0)
        result.warnings = allocation.warnings;
      for_each_index(static_cast<std::size_t>(cfg.trials), jobs, [&](std::size_t t) {
        const LinkTrial trial = draw_link_trial(cfg, allocation, t);
        const BeamSelection selection = select_beams(cfg, trial);
        const TrialEvaluation eval =
            evaluate_trial(cfg, trial, selection, dbm_to_watts(cfg.power_dbm), t);
        for (const auto& [uid, rate] : eval.per_user_rate_bps)
          stats[vi].rates[uid][t] = rate;
        for (const auto& [uid, rate] : eval.per_user_asymptotic_bps)
          stats[vi].asymptotes[uid][t] = rate;
      });
    }
  }

  for (std::size_t vi = 0; vi < values.size(); ++vi)
    for (const UserConfig& u : config.users) {
      SweepRow row;
      row.axis_name = axis_name(axis);
      row.axis_value = values[vi];
      row.precoder = precoder_name;
      row.beam_mode = beam_name;
      row.user_id = u.id;
      const std::vector<double>& r = stats[vi].rates[u.id];
      const std::vector<double>& a = stats[vi].asymptotes[u.id];
      row.mean_rate_bps = mean_of(r);
      row.std_rate_bps = sample_std(r, row.mean_rate_bps);
      row.asymptotic_rate_bps = mean_of(a);
      row.trials = config.trials;
      row.seed = config.seed;
      result.rows.push_back(row);
    }

  // Axis-independent reference rows for overlaying the large-array limit.
  for (const UserConfig& u : config.users) {
    SweepRow row;
    row.axis_name = "asymptotic";
    row.axis_value = 0.0;
    row.precoder = precoder_name;
    row.beam_mode = beam_name;
    row.user_id = u.id;
    const std::vector<double>& a = stats.front().asymptotes[u.id];
    row.mean_rate_bps = mean_of(a);
    row.std_rate_bps = sample_std(a, row.mean_rate_bps);
    row.asymptotic_rate_bps = row.mean_rate_bps;
    row.trials = config.trials;
    row.seed = config.seed;
    result.rows.push_back(row);
  }
  return result;
}

std::string render_csv(const SweepResult& result) {
  std::ostringstream os;
  os << "axis_name,axis_value,precoder,beam_mode,user_id,mean_rate_bps,std_rate_bps,"
        "asymptotic_rate_bps,trials,seed\n";
  for (const SweepRow& r : result.rows) {
    os << r.axis_name << ',' << format_double(r.axis_value) << ',' << r.precoder << ','
       << r.beam_mode << ',' << r.user_id << ',' << format_double(r.mean_rate_bps) << ','
       << format_double(r.std_rate_bps) << ',' << format_double(r.asymptotic_rate_bps) << ','
       << r.trials << ',' << r.seed << '\n';
  }
  return os.str();
}

void emit_csv(const SweepResult& result, const std::string& path) {
  if (result.rows.empty())
    fail("emit_csv: empty result table");
  std::ofstream out(path, std::ios::binary);
  if (!out)
    fail("emit_csv: cannot write '" + path + "'");
  out << render_csv(result);
  if (!out)
    fail("emit_csv: write failed for '" + path + "'");
}

} // namespace thzsim
