// SPDX-License-Identifier: Apache-2.0
//
// thzsim - link-level simulator for indoor THz downlinks with one-bit DACs
// Copyright (C) 2026 the thzsim authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0

#include <cstdio>
#include <random>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "thzsim/common.hpp"
#include "thzsim/precoding.hpp"
#include "thzsim/scenario.hpp"
#include "thzsim/sweep.hpp"

namespace {

thzsim::ScenarioConfig load_scenario(const std::string& path) {
  if (path.empty())
    return thzsim::default_scenario();
  return thzsim::parse_scenario_file(path);
}

int run_command(const std::string& scenario_path, const std::string& sweep_name,
                const std::vector<double>& values, const std::string& precoder,
                const std::string& beam, int trials, long long seed, const std::string& out_path,
                unsigned jobs) {
  thzsim::ScenarioConfig cfg = load_scenario(scenario_path);
  if (!precoder.empty())
    cfg.precoder = precoder == "zf" ? thzsim::PrecoderKind::Zf : thzsim::PrecoderKind::Mrt;
  if (!beam.empty())
    cfg.beam_mode = beam == "codebook" ? thzsim::BeamMode::Codebook : thzsim::BeamMode::Los;
  if (trials > 0)
    cfg.trials = trials;
  if (seed >= 0)
    cfg.seed = static_cast<std::uint64_t>(seed);
  cfg.validate();

  thzsim::SweepAxis axis = thzsim::SweepAxis::Power;
  if (sweep_name == "array")
    axis = thzsim::SweepAxis::ArraySize;
  else if (sweep_name == "subarrays")
    axis = thzsim::SweepAxis::SubarrayCount;

  std::vector<double> axis_values = values;
  if (axis_values.empty()) {
    if (axis != thzsim::SweepAxis::Power) {
      std::fprintf(stderr, "error: --values is required for non-power sweeps\n");
      return 1;
    }
    axis_values = cfg.power_grid_dbm;
  }

  const thzsim::SweepResult result = thzsim::run_sweep(cfg, axis, axis_values, jobs);
  for (const std::string& w : result.warnings)
    std::fprintf(stderr, "warning: %s\n", w.c_str());
  thzsim::emit_csv(result, out_path);
  std::printf("wrote %zu rows to %s\n", result.rows.size(), out_path.c_str());
  return 0;
}

int asymptotic_command(const std::string& scenario_path) {
  const thzsim::ScenarioConfig cfg = load_scenario(scenario_path);
  const thzsim::SubcarrierAllocation alloc = thzsim::allocate_subcarriers(cfg);
  for (const std::string& w : alloc.warnings)
    std::fprintf(stderr, "warning: %s\n", w.c_str());

  const thzsim::AsymptoticReport aligned =
      thzsim::asymptotic_rate(thzsim::aligned_asymptotic_scenario(cfg, alloc));
  std::printf("large-array rate limit (unit-phase LOS gains):\n");
  for (const auto& [uid, rate] : aligned.per_user_bps)
    std::printf("  user %d: %.6e bit/s\n", uid, rate);
  std::printf("  total:  %.6e bit/s\n", aligned.total_bps);

  if (cfg.nlos.los_phase == thzsim::LosPhaseMode::Iid) {
    // Monte Carlo over the per-subarray LOS phases the scenario would draw.
    std::vector<double> totals(cfg.trials, 0.0);
    for (int t = 0; t < cfg.trials; ++t) {
      const thzsim::LinkTrial trial = thzsim::draw_link_trial(cfg, alloc, t);
      totals[t] =
          thzsim::asymptotic_rate(thzsim::trial_asymptotic_scenario(cfg, trial)).total_bps;
    }
    double mean = 0.0;
    for (double x : totals)
      mean += x;
    mean /= static_cast<double>(cfg.trials);
    std::printf("with i.i.d. LOS phases (%d draws): mean total %.6e bit/s\n", cfg.trials, mean);
  }
  return 0;
}

int oracle_command(int k, int users, long trials, long long seed) {
  if (k < 1 || users < 1 || users > k) {
    std::fprintf(stderr, "error: need 1 <= users <= k\n");
    return 1;
  }
  auto rng = thzsim::make_rng(seed < 0 ? 1 : static_cast<std::uint64_t>(seed),
                              thzsim::RngStream::Oracle, 0);
  std::normal_distribution<double> normal(0.0, std::sqrt(0.5));
  arma::cx_mat q(k, users);
  for (arma::uword i = 0; i < q.n_elem; ++i)
    q(i) = std::complex<double>(normal(rng), normal(rng));
  const double p = 1.0;
  q *= std::sqrt(p / std::real(arma::trace(q * q.t())));

  const arma::cx_mat closed = thzsim::distortion_covariance(q, p);
  const arma::cx_mat empirical = thzsim::empirical_distortion_covariance(q, p, trials, rng);
  const double rel_err = arma::norm(empirical - closed, "fro") / arma::norm(closed, "fro");
  std::printf("arcsine-law distortion covariance, K=%d U=%d trials=%ld\n", k, users, trials);
  std::printf("Frobenius relative error: %.6f\n", rel_err);
  return 0;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Indoor THz multi-user downlink simulator with one-bit DAC hybrid precoding"};
  app.require_subcommand(1);

  // run
  std::string scenario_path, sweep_name = "power", precoder, beam, out_path = "sweep.csv";
  std::vector<double> values;
  int trials = 0;
  long long seed = -1;
  unsigned jobs = 1;
  CLI::App* run = app.add_subcommand("run", "Monte Carlo sweep, results to CSV");
  run->add_option("--scenario", scenario_path, "Scenario JSON file (omit for the built-in default)");
  run->add_option("--sweep", sweep_name, "Sweep axis")
      ->check(CLI::IsMember({"power", "array", "subarrays"}));
  run->add_option("--values", values, "Axis values (dBm for power sweeps)")->delimiter(',');
  run->add_option("--precoder", precoder, "Baseband precoder")
      ->check(CLI::IsMember({"mrt", "zf"}));
  run->add_option("--beam", beam, "Analog beam selection")
      ->check(CLI::IsMember({"codebook", "los"}));
  run->add_option("--trials", trials, "Monte Carlo trials");
  run->add_option("--seed", seed, "Master seed");
  run->add_option("--out", out_path, "Output CSV path");
  run->add_option("--jobs", jobs, "Worker threads (results are identical for any value)");

  // asymptotic
  std::string asym_scenario;
  CLI::App* asym = app.add_subcommand("asymptotic", "Print the large-array rate limit");
  asym->add_option("--scenario", asym_scenario, "Scenario JSON file");

  // oracle-cdd
  int oracle_k = 4, oracle_users = 2;
  long oracle_trials = 1000000;
  long long oracle_seed = 1;
  CLI::App* oracle = app.add_subcommand(
      "oracle-cdd", "Monte Carlo check of the arcsine-law distortion covariance");
  oracle->add_option("--k", oracle_k, "Subarray count K");
  oracle->add_option("--users", oracle_users, "User count U");
  oracle->add_option("--trials", oracle_trials, "Monte Carlo trials");
  oracle->add_option("--seed", oracle_seed, "Seed");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed())
      return run_command(scenario_path, sweep_name, values, precoder, beam, trials, seed,
                         out_path, jobs);
    if (asym->parsed())
      return asymptotic_command(asym_scenario);
    if (oracle->parsed())
      return oracle_command(oracle_k, oracle_users, oracle_trials, oracle_seed);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
