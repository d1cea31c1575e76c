// SPDX-License-Identifier: Apache-2.0
//
// thzsim - link-level simulator for indoor THz downlinks with one-bit DACs
// Copyright (C) 2026 the thzsim authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0

#ifndef THZSIM_CHANNEL_HPP
#define THZSIM_CHANNEL_HPP

#include <armadillo>
#include <complex>
#include <istream>
#include <optional>
#include <random>
#include <utility>
#include <vector>
#include <numbers>

#include "thzsim/common.hpp"

namespace thzsim {

// Uniform planar array: rows x cols elements, physical spacing and the
// carrier wavelength at which the array is driven. Spacing must not exceed
// the wavelength.
struct ArrayGeometry {
  int rows = 1;            // M
  int cols = 1;            // N
  double spacing_m = 0.0;  // a
  double wavelength_m = 0.0;

  int element_count() const { return rows * cols; }
  void validate() const; // throws std::invalid_argument
};

enum class RayKind { Los, Nlos1, Nlos2 };

inline int reflection_order(RayKind k) {
  return k == RayKind::Los ? 0 : (k == RayKind::Nlos1 ? 1 : 2);
}

// One propagation path. The complex gain carries both the amplitude
// (sqrt of the path power gain) and the per-path phase shift.
struct Ray {
  RayKind kind = RayKind::Los;
  std::complex<double> gain{0.0, 0.0};
  double aod_azimuth = 0.0;   // psi^t
  double aod_elevation = 0.0; // phi^t
  double aoa_azimuth = 0.0;   // psi^r
  double aoa_elevation = 0.0; // phi^r

  void validate() const;
};

// Piecewise-linear molecular absorption spectrum kappa_abs(f). Queries
// outside the tabulated range clamp to the nearest endpoint. The default
// model is zero absorption everywhere.
class AbsorptionModel {
public:
  AbsorptionModel() = default;
  explicit AbsorptionModel(std::vector<std::pair<double, double>> samples);

  double kappa(double frequency_hz) const; // 1/m
  const std::vector<std::pair<double, double>>& samples() const { return samples_; }

private:
  std::vector<std::pair<double, double>> samples_; // (frequency_hz, kappa), strictly ascending
};

// Parses a two-column table (frequency_hz, kappa_per_m). Columns may be
// separated by commas or whitespace; '#' starts a comment. Rows must be
// strictly ascending in frequency.
AbsorptionModel load_absorption_spectrum(std::istream& source);
AbsorptionModel load_absorption_spectrum_file(const std::string& path);

// Unit-norm planar-array steering vector. Element (m, n) carries the phase
// (2 pi a / lambda) * (m cos(az) + n sin(az)) * sin(el); entries are laid
// out row-major with m as the outer index.
arma::cx_vec steering_vector(const ArrayGeometry& geom, double azimuth, double elevation);

// a(az1, el1)^H a(az2, el2) in closed form via the two Dirichlet factors.
// Equal to the explicit dot product up to rounding, at O(1) cost.
std::complex<double> steering_inner_product(const ArrayGeometry& geom, double azimuth1,
                                            double elevation1, double azimuth2,
                                            double elevation2);

// Free-space spreading loss times molecular absorption; returns the LOS
// path power gain (c / (4 pi f d))^2 * exp(-kappa(f) d).
double los_path_gain(double frequency_hz, double distance_m, const AbsorptionModel& abs);

// Reflected-path power gain: Gamma^2 times the LOS gain, with the
// reflection coefficient Gamma in [0, 1].
double nlos_path_gain(double frequency_hz, double distance_m, const AbsorptionModel& abs,
                      double reflection_coefficient);

// Multi-ray subarray channel matrix of shape (Mr*Nr) x (Mt*Nt).
struct SubarrayChannel {
  arma::cx_mat matrix;
  double frequency_hz = 0.0;
  double distance_m = 0.0;
};

// Sums the per-ray rank-one terms
//   sqrt(Mt Nt Mr Nr) * eta * omega_t * omega_r * a_r(aoa) a_t(aod)^H.
// The ray list must contain exactly one LOS ray.
SubarrayChannel synthesize_subarray_channel(const std::vector<Ray>& rays,
                                            const ArrayGeometry& tx, const ArrayGeometry& rx,
                                            double omega_t, double omega_r, double frequency_hz,
                                            double distance_m);

// How random ray sets are generated: per-order NLOS counts and reflection
// losses, plus the angular region the NLOS directions are drawn from
// (defaults to the front hemisphere).
struct RaySpec {
  int order1_count = 2;
  int order2_count = 1;
  double order1_loss_db = 10.0;
  double order2_loss_db = 20.0;
  double azimuth_min = -std::numbers::pi / 2.0;
  double azimuth_max = std::numbers::pi / 2.0;
  double elevation_min = 0.0;
  double elevation_max = std::numbers::pi;

  // Fixed LOS geometry; when unset the LOS angles are drawn uniformly from
  // the same region as the NLOS rays.
  struct LosAngles {
    double aod_azimuth = 0.0, aod_elevation = 0.0;
    double aoa_azimuth = 0.0, aoa_elevation = 0.0;
  };
  std::optional<LosAngles> los_angles;

  int total_nlos() const { return order1_count + order2_count; }
};

// Draws one LOS ray (|eta| = sqrt(LOS path gain), uniform phase) followed by
// the NLOS rays with independent uniform angles and phases and per-order
// reflection losses. Deterministic for a fixed generator state; the draw
// order is fixed (LOS first, then order-1 rays, then order-2).
std::vector<Ray> sample_rays(std::mt19937_64& rng, const RaySpec& spec, double frequency_hz,
                             double distance_m, const AbsorptionModel& abs);

} // namespace thzsim

#endif // THZSIM_CHANNEL_HPP
