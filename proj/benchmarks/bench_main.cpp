// SPDX-License-Identifier: Apache-2.0
//
// thzsim - link-level simulator for indoor THz downlinks with one-bit DACs
// Copyright (C) 2026 the thzsim authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0

#include <benchmark/benchmark.h>

#include <numbers>
#include <random>

#include "thzsim/common.hpp"
#include "thzsim/precoding.hpp"
#include "thzsim/rate.hpp"
#include "thzsim/scenario.hpp"
#include "thzsim/sweep.hpp"

namespace {

thzsim::ArrayGeometry geom(int n) {
  return thzsim::ArrayGeometry{n, n, 0.5e-3, 1e-3};
}

void BM_SteeringVector(benchmark::State& state) {
  const thzsim::ArrayGeometry g = geom(static_cast<int>(state.range(0)));
  double acc = 0.0;
  for (auto _ : state) {
    acc += std::abs(thzsim::steering_vector(g, 0.3, 1.1)(0));
    benchmark::DoNotOptimize(acc);
  }
}
BENCHMARK(BM_SteeringVector)->Arg(8)->Arg(16)->Arg(32)->Arg(64);

void BM_SteeringInnerProductClosedForm(benchmark::State& state) {
  const thzsim::ArrayGeometry g = geom(64);
  double a = 0.0, acc = 0.0;
  for (auto _ : state) {
    a += 1e-6;
    acc += std::abs(thzsim::steering_inner_product(g, 0.3, 1.1, 0.3 + a, 1.1 - a));
    benchmark::DoNotOptimize(acc);
  }
}
BENCHMARK(BM_SteeringInnerProductClosedForm);

void BM_SynthesizeChannel(benchmark::State& state) {
  const thzsim::ArrayGeometry g = geom(static_cast<int>(state.range(0)));
  auto rng = thzsim::make_rng(1, thzsim::RngStream::Channel, 0);
  thzsim::RaySpec spec;
  const auto rays = thzsim::sample_rays(rng, spec, 0.3e12, 5.0, thzsim::AbsorptionModel{});
  double acc = 0.0;
  for (auto _ : state) {
    acc += std::abs(
        thzsim::synthesize_subarray_channel(rays, g, g, 10.0, 10.0, 0.3e12, 5.0).matrix(0, 0));
    benchmark::DoNotOptimize(acc);
  }
}
BENCHMARK(BM_SynthesizeChannel)->Arg(8)->Arg(16);

void BM_DistortionCovariance(benchmark::State& state) {
  const int k = static_cast<int>(state.range(0));
  auto rng = thzsim::make_rng(2, thzsim::RngStream::Generic, 0);
  std::normal_distribution<double> normal(0.0, std::sqrt(0.5));
  arma::cx_mat q(k, 2);
  for (auto& v : q)
    v = std::complex<double>(normal(rng), normal(rng));
  double acc = 0.0;
  for (auto _ : state) {
    acc += std::real(thzsim::distortion_covariance(q, 1.0)(0, 0));
    benchmark::DoNotOptimize(acc);
  }
}
BENCHMARK(BM_DistortionCovariance)->Arg(4)->Arg(8)->Arg(16);

void BM_CodebookSelection(benchmark::State& state) {
  thzsim::ScenarioConfig cfg = thzsim::default_scenario();
  cfg.users.resize(1);
  cfg.users[0].windows_hz = {{0.65e12, 0.655e12}};
  cfg.group_allocation = {{1, 8}};
  cfg.group_reference_user = {{1, 1}};
  cfg.tx_rows = cfg.tx_cols = cfg.rx_rows = cfg.rx_cols = 16;
  cfg.beam_mode = thzsim::BeamMode::Codebook;
  cfg.validate();
  const auto alloc = thzsim::allocate_subcarriers(cfg);
  const auto trial = thzsim::draw_link_trial(cfg, alloc, 0);
  double acc = 0.0;
  for (auto _ : state) {
    acc += thzsim::select_beams(cfg, trial).tx_per_group.at(1).azimuth;
    benchmark::DoNotOptimize(acc);
  }
}
BENCHMARK(BM_CodebookSelection)->Unit(benchmark::kMillisecond);

void BM_SubcarrierRate(benchmark::State& state) {
  auto rng = thzsim::make_rng(3, thzsim::RngStream::Generic, 0);
  std::normal_distribution<double> normal(0.0, std::sqrt(0.5));
  arma::cx_mat h(2, 8);
  for (auto& v : h)
    v = 1e-4 * std::complex<double>(normal(rng), normal(rng));
  thzsim::EffectiveChannelMatrix cm;
  cm.matrix = h;
  cm.frequency_hz = 6.5e11;
  cm.user_order = {1, 2};
  cm.subarray_order = {0, 1, 2, 3, 4, 5, 6, 7};
  double acc = 0.0;
  for (auto _ : state) {
    acc += thzsim::evaluate_subcarrier_rate(cm, thzsim::PrecoderKind::Zf, 0.1, 1e-11, 5e9)
               .total_bps;
    benchmark::DoNotOptimize(acc);
  }
}
BENCHMARK(BM_SubcarrierRate)->Unit(benchmark::kMicrosecond);

} // namespace

BENCHMARK_MAIN();
