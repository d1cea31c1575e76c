// SPDX-License-Identifier: Apache-2.0
//
// thzsim - link-level simulator for indoor THz downlinks with one-bit DACs
// Copyright (C) 2026 the thzsim authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0

#include "thzsim/channel.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <numbers>

namespace thzsim {

namespace {

constexpr double kPi = std::numbers::pi;

[[noreturn]] void fail(const std::string& msg) { throw std::invalid_argument(msg); }

} // namespace

void ArrayGeometry::validate() const {
  if (rows < 1 || cols < 1)
    fail("array geometry: rows and cols must be >= 1");
  if (!(spacing_m > 0.0))
    fail("array geometry: element spacing must be positive");
  if (!(wavelength_m > 0.0))
    fail("array geometry: wavelength must be positive");
  if (spacing_m > wavelength_m)
    fail("array geometry: element spacing must not exceed the wavelength");
}

void Ray::validate() const {
  if (!(std::abs(gain) > 0.0))
    fail("ray: gain magnitude must be positive");
  for (double a : {aod_azimuth, aod_elevation, aoa_azimuth, aoa_elevation})
    if (!std::isfinite(a))
      fail("ray: angles must be finite");
  if (aod_azimuth < -kPi || aod_azimuth >= kPi || aoa_azimuth < -kPi || aoa_azimuth >= kPi)
    fail("ray: azimuth must lie in [-pi, pi)");
  if (aod_elevation < 0.0 || aod_elevation > kPi || aoa_elevation < 0.0 || aoa_elevation > kPi)
    fail("ray: elevation must lie in [0, pi]");
}

AbsorptionModel::AbsorptionModel(std::vector<std::pair<double, double>> samples)
    : samples_(std::move(samples)) {
  if (samples_.empty())
    fail("absorption model: needs at least one sample");
  for (std::size_t i = 0; i < samples_.size(); ++i) {
    if (!(samples_[i].first > 0.0) || !std::isfinite(samples_[i].first))
      fail("absorption model: frequencies must be positive and finite");
    if (samples_[i].second < 0.0 || !std::isfinite(samples_[i].second))
      fail("absorption model: kappa must be >= 0 and finite");
    if (i > 0 && !(samples_[i].first > samples_[i - 1].first))
      fail("absorption model: frequencies must be strictly increasing");
  }
}

double AbsorptionModel::kappa(double frequency_hz) const {
  if (samples_.empty())
    return 0.0;
  if (frequency_hz <= samples_.front().first)
    return samples_.front().second;
  if (frequency_hz >= samples_.back().first)
    return samples_.back().second;
  auto hi = std::lower_bound(samples_.begin(), samples_.end(), frequency_hz,
                             [](const auto& s, double f) { return s.first < f; });
  auto lo = hi - 1;
  const double t = (frequency_hz - lo->first) / (hi->first - lo->first);
  return lo->second + t * (hi->second - lo->second);
}

AbsorptionModel load_absorption_spectrum(std::istream& source) {
  std::vector<std::pair<double, double>> samples;
  std::string line;
  int line_no = 0;
  while (std::getline(source, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos)
      line.erase(hash);
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream row(line);
    double f = 0.0, k = 0.0;
    if (!(row >> f))
      continue; // blank or comment-only line
    if (!(row >> k))
      fail("absorption table line " + std::to_string(line_no) + ": expected two numeric columns");
    double extra;
    if (row >> extra)
      fail("absorption table line " + std::to_string(line_no) + ": expected two numeric columns");
    if (!samples.empty() && f == samples.back().first)
      fail("absorption table line " + std::to_string(line_no) + ": duplicate frequency");
    if (!samples.empty() && f < samples.back().first)
      fail("absorption table line " + std::to_string(line_no) + ": frequencies must be ascending");
    samples.emplace_back(f, k);
  }
  if (samples.empty())
    fail("absorption table: no data rows");
  return AbsorptionModel(std::move(samples));
}

AbsorptionModel load_absorption_spectrum_file(const std::string& path) {
  std::ifstream in(path);
  if (!in)
    fail("absorption table: cannot open '" + path + "'");
  return load_absorption_spectrum(in);
}

arma::cx_vec steering_vector(const ArrayGeometry& geom, double azimuth, double elevation) {
  geom.validate();
  const int m_count = geom.rows, n_count = geom.cols;
  const double scale = 1.0 / std::sqrt(static_cast<double>(m_count) * n_count);
  const double k = 2.0 * kPi * geom.spacing_m / geom.wavelength_m;
  const double u = std::cos(azimuth) * std::sin(elevation);
  const double v = std::sin(azimuth) * std::sin(elevation);
  arma::cx_vec a(static_cast<arma::uword>(m_count) * n_count);
  for (int m = 0; m < m_count; ++m)
    for (int n = 0; n < n_count; ++n)
      a(static_cast<arma::uword>(m) * n_count + n) = std::polar(scale, k * (m * u + n * v));
  return a;
}

namespace {

// sum_{i=0}^{count-1} e^{j i x}, evaluated as the Dirichlet kernel.
std::complex<double> geometric_phase_sum(int count, double x) {
  const double half = 0.5 * x;
  const double denom = std::sin(half);
  if (std::abs(denom) < 1e-12) {
    // x == 0 mod 2 pi: all phasors nearly aligned; fall back to the sum.
    std::complex<double> s{0.0, 0.0};
    for (int i = 0; i < count; ++i)
      s += std::polar(1.0, i * x);
    return s;
  }
  const double mag = std::sin(count * half) / denom;
  return std::polar(mag, (count - 1) * half);
}

} // namespace

std::complex<double> steering_inner_product(const ArrayGeometry& geom, double azimuth1,
                                            double elevation1, double azimuth2,
                                            double elevation2) {
  geom.validate();
  const double k = 2.0 * kPi * geom.spacing_m / geom.wavelength_m;
  const double du = std::cos(azimuth2) * std::sin(elevation2) -
                    std::cos(azimuth1) * std::sin(elevation1);
  const double dv = std::sin(azimuth2) * std::sin(elevation2) -
                    std::sin(azimuth1) * std::sin(elevation1);
  const std::complex<double> row = geometric_phase_sum(geom.rows, k * du);
  const std::complex<double> col = geometric_phase_sum(geom.cols, k * dv);
  return row * col / static_cast<double>(geom.element_count());
}

double los_path_gain(double frequency_hz, double distance_m, const AbsorptionModel& abs) {
  if (!(frequency_hz > 0.0))
    fail("los_path_gain: frequency must be positive");
  if (!(distance_m > 0.0))
    fail("los_path_gain: distance must be positive");
  const double spreading = kSpeedOfLight / (4.0 * kPi * frequency_hz * distance_m);
  return spreading * spreading * std::exp(-abs.kappa(frequency_hz) * distance_m);
}

double nlos_path_gain(double frequency_hz, double distance_m, const AbsorptionModel& abs,
                      double reflection_coefficient) {
  if (reflection_coefficient < 0.0 || reflection_coefficient > 1.0)
    fail("nlos_path_gain: reflection coefficient must lie in [0, 1]");
  return reflection_coefficient * reflection_coefficient *
         los_path_gain(frequency_hz, distance_m, abs);
}

SubarrayChannel synthesize_subarray_channel(const std::vector<Ray>& rays,
                                            const ArrayGeometry& tx, const ArrayGeometry& rx,
                                            double omega_t, double omega_r, double frequency_hz,
                                            double distance_m) {
  tx.validate();
  rx.validate();
  if (rays.empty())
    fail("subarray channel: ray list must not be empty");
  int los_count = 0;
  for (const Ray& r : rays) {
    r.validate();
    if (r.kind == RayKind::Los)
      ++los_count;
  }
  if (los_count != 1)
    fail("subarray channel: ray list must contain exactly one LOS ray, got " +
         std::to_string(los_count));

  const double prefactor =
      std::sqrt(static_cast<double>(tx.element_count()) * rx.element_count());
  arma::cx_mat f(rx.element_count(), tx.element_count(), arma::fill::zeros);
  for (const Ray& r : rays) {
    const arma::cx_vec a_r = steering_vector(rx, r.aoa_azimuth, r.aoa_elevation);
    const arma::cx_vec a_t = steering_vector(tx, r.aod_azimuth, r.aod_elevation);
    f += (prefactor * omega_t * omega_r * r.gain) * (a_r * a_t.t());
  }
  if (!f.is_finite())
    fail("subarray channel: non-finite entries");
  return SubarrayChannel{std::move(f), frequency_hz, distance_m};
}

std::vector<Ray> sample_rays(std::mt19937_64& rng, const RaySpec& spec, double frequency_hz,
                             double distance_m, const AbsorptionModel& abs) {
  if (spec.order1_count < 0 || spec.order2_count < 0)
    fail("ray spec: NLOS counts must be >= 0");
  if (!(spec.azimuth_max >= spec.azimuth_min) || !(spec.elevation_max >= spec.elevation_min))
    fail("ray spec: angle bounds are inverted");

  std::uniform_real_distribution<double> phase(0.0, 2.0 * kPi);
  std::uniform_real_distribution<double> az(spec.azimuth_min, spec.azimuth_max);
  std::uniform_real_distribution<double> el(spec.elevation_min, spec.elevation_max);

  std::vector<Ray> rays;
  rays.reserve(1 + spec.total_nlos());

  Ray los;
  los.kind = RayKind::Los;
  if (spec.los_angles) {
    los.aod_azimuth = spec.los_angles->aod_azimuth;
    los.aod_elevation = spec.los_angles->aod_elevation;
    los.aoa_azimuth = spec.los_angles->aoa_azimuth;
    los.aoa_elevation = spec.los_angles->aoa_elevation;
  } else {
    los.aod_azimuth = az(rng);
    los.aod_elevation = el(rng);
    los.aoa_azimuth = az(rng);
    los.aoa_elevation = el(rng);
  }
  const double los_amp = std::sqrt(los_path_gain(frequency_hz, distance_m, abs));
  los.gain = std::polar(los_amp, phase(rng));
  rays.push_back(los);

  auto add_nlos = [&](RayKind kind, int count, double loss_db) {
    const double gamma = std::pow(10.0, -loss_db / 20.0); // amplitude reflection coefficient
    const double amp = std::sqrt(nlos_path_gain(frequency_hz, distance_m, abs, gamma));
    for (int i = 0; i < count; ++i) {
      Ray r;
      r.kind = kind;
      r.aod_azimuth = az(rng);
      r.aod_elevation = el(rng);
      r.aoa_azimuth = az(rng);
      r.aoa_elevation = el(rng);
      r.gain = std::polar(amp, phase(rng));
      rays.push_back(r);
    }
  };
  add_nlos(RayKind::Nlos1, spec.order1_count, spec.order1_loss_db);
  add_nlos(RayKind::Nlos2, spec.order2_count, spec.order2_loss_db);
  return rays;
}

} // namespace thzsim
