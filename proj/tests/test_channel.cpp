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
#include <sstream>

#include "thzsim/channel.hpp"
#include "thzsim/common.hpp"

using namespace thzsim;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

constexpr double kPi = std::numbers::pi;

ArrayGeometry geom(int rows, int cols, double spacing_over_lambda = 0.5,
                   double lambda = 1e-3) {
  return ArrayGeometry{rows, cols, spacing_over_lambda * lambda, lambda};
}

} // namespace

TEST_CASE("steering vector: single element is [1]") {
  const arma::cx_vec a = steering_vector(geom(1, 1), 0.7, 1.1);
  REQUIRE(a.n_elem == 1);
  CHECK_THAT(std::abs(a(0) - std::complex<double>(1.0, 0.0)), WithinAbs(0.0, 1e-15));
}

TEST_CASE("steering vector: two-element broadside null") {
  // a = lambda/2, azimuth 0, elevation pi/2: phase step is pi.
  const arma::cx_vec a = steering_vector(geom(2, 1), 0.0, kPi / 2.0);
  const double s = 1.0 / std::sqrt(2.0);
  CHECK_THAT(std::real(a(0)), WithinAbs(s, 1e-12));
  CHECK_THAT(std::imag(a(0)), WithinAbs(0.0, 1e-12));
  CHECK_THAT(std::real(a(1)), WithinAbs(-s, 1e-12));
  CHECK_THAT(std::imag(a(1)), WithinAbs(0.0, 1e-12));
}

TEST_CASE("steering vector: zero elevation kills all phases") {
  const arma::cx_vec a = steering_vector(geom(4, 4), 0.0, 0.0);
  for (arma::uword i = 0; i < a.n_elem; ++i) {
    CHECK_THAT(std::real(a(i)), WithinAbs(0.25, 1e-12));
    CHECK_THAT(std::imag(a(i)), WithinAbs(0.0, 1e-12));
  }
}

TEST_CASE("steering vector: row-major element order") {
  // Element (m, n) sits at index m * cols + n; with cos(az) = 0 only the
  // column index n contributes phase.
  const ArrayGeometry g = geom(2, 3);
  const arma::cx_vec a = steering_vector(g, kPi / 2.0, kPi / 2.0);
  const double k = 2.0 * kPi * g.spacing_m / g.wavelength_m;
  for (int m = 0; m < 2; ++m)
    for (int n = 0; n < 3; ++n) {
      const std::complex<double> expected =
          std::polar(1.0 / std::sqrt(6.0), k * n); // cos(pi/2) ~ 0
      CHECK_THAT(std::abs(a(m * 3 + n) - expected), WithinAbs(0.0, 1e-9));
    }
}

TEST_CASE("steering vector: unit norm for random geometries") {
  std::mt19937_64 rng(42);
  std::uniform_int_distribution<int> dim(1, 16);
  std::uniform_real_distribution<double> az(-kPi, kPi), el(0.0, kPi);
  for (int i = 0; i < 50; ++i) {
    const arma::cx_vec a = steering_vector(geom(dim(rng), dim(rng)), az(rng), el(rng));
    CHECK_THAT(arma::norm(a), WithinAbs(1.0, 1e-12));
  }
}

TEST_CASE("steering inner product matches the explicit dot product") {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<int> dim(1, 12);
  std::uniform_real_distribution<double> az(-kPi / 2.0, kPi / 2.0), el(0.1, kPi - 0.1);
  for (int i = 0; i < 100; ++i) {
    const ArrayGeometry g = geom(dim(rng), dim(rng));
    const double a1 = az(rng), e1 = el(rng), a2 = az(rng), e2 = el(rng);
    const std::complex<double> closed = steering_inner_product(g, a1, e1, a2, e2);
    const std::complex<double> direct =
        arma::cdot(steering_vector(g, a1, e1), steering_vector(g, a2, e2));
    CHECK_THAT(std::abs(closed - direct), WithinAbs(0.0, 1e-9));
    CHECK(std::abs(closed) <= 1.0 + 1e-12);
  }
}

TEST_CASE("steering inner product: matched angles give unity") {
  const ArrayGeometry g = geom(64, 64);
  CHECK_THAT(std::abs(steering_inner_product(g, 0.3, 1.2, 0.3, 1.2)), WithinAbs(1.0, 1e-12));
}

TEST_CASE("LOS path gain: spreading-loss values") {
  const AbsorptionModel none;
  // Independent evaluation of the spreading term.
  auto spreading = [](double f, double d) {
    const double amp = kSpeedOfLight / (4.0 * kPi * f * d);
    return amp * amp;
  };
  const double g1 = los_path_gain(0.3e12, 1.0, none);
  CHECK_THAT(g1, WithinRel(spreading(0.3e12, 1.0), 1e-14));
  CHECK_THAT(g1, WithinRel(6.333e-9, 2e-3)); // approx -81.98 dB
  CHECK_THAT(10.0 * std::log10(g1), WithinAbs(-81.99, 0.05));

  const double g2 = los_path_gain(0.65e12, 10.0, none);
  CHECK_THAT(g2, WithinRel(1.35e-11, 5e-3)); // approx -108.7 dB
  CHECK_THAT(10.0 * std::log10(g2), WithinAbs(-108.7, 0.05));
}

TEST_CASE("LOS path gain: absorption adds exp(-kappa d)") {
  const AbsorptionModel none;
  const AbsorptionModel k01({{1e11, 0.1}, {2e12, 0.1}});
  const double f = 0.65e12, d = 10.0;
  CHECK_THAT(los_path_gain(f, d, k01) / los_path_gain(f, d, none),
             WithinRel(std::exp(-1.0), 1e-12));
}

TEST_CASE("LOS path gain: strictly decreasing in distance and frequency") {
  const AbsorptionModel none;
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> fdist(0.1e12, 1.0e12), ddist(0.5, 20.0);
  for (int i = 0; i < 50; ++i) {
    const double f = fdist(rng), d = ddist(rng);
    CHECK(los_path_gain(f, d * 1.01, none) < los_path_gain(f, d, none));
    CHECK(los_path_gain(f * 1.01, d, none) < los_path_gain(f, d, none));
  }
}

TEST_CASE("LOS path gain: rejects non-positive inputs") {
  const AbsorptionModel none;
  CHECK_THROWS_AS(los_path_gain(0.0, 1.0, none), std::invalid_argument);
  CHECK_THROWS_AS(los_path_gain(1e12, -1.0, none), std::invalid_argument);
}

TEST_CASE("NLOS path gain: reflection coefficient scaling") {
  const AbsorptionModel none;
  const double f = 0.3e12, d = 2.0;
  const double los = los_path_gain(f, d, none);
  CHECK_THAT(nlos_path_gain(f, d, none, 1.0), WithinRel(los, 1e-15));
  CHECK(nlos_path_gain(f, d, none, 0.0) == 0.0);
  // -10 dB reflection loss
  const double gamma = std::sqrt(0.1);
  CHECK_THAT(nlos_path_gain(f, d, none, gamma), WithinRel(0.1 * los, 1e-12));
  CHECK_THROWS_AS(nlos_path_gain(f, d, none, -0.1), std::invalid_argument);
  CHECK_THROWS_AS(nlos_path_gain(f, d, none, 1.1), std::invalid_argument);
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

} // namespace

TEST_CASE("subarray channel: single LOS ray on 1x1 arrays") {
  const std::complex<double> g(0.3, -0.4);
  const auto ch = synthesize_subarray_channel({make_ray(RayKind::Los, g, 0.1, 0.2, 0.3, 0.4)},
                                              geom(1, 1), geom(1, 1), 1.0, 1.0, 3e11, 1.0);
  REQUIRE(ch.matrix.n_rows == 1);
  REQUIRE(ch.matrix.n_cols == 1);
  CHECK_THAT(std::abs(ch.matrix(0, 0) - g), WithinAbs(0.0, 1e-15));
}

TEST_CASE("subarray channel: coincident rays add coherently") {
  const std::complex<double> g1(0.2, 0.1), g2(-0.05, 0.3);
  const ArrayGeometry tx = geom(3, 2), rx = geom(2, 2);
  const auto one = synthesize_subarray_channel(
      {make_ray(RayKind::Los, g1 + g2, 0.4, 1.0, -0.2, 0.8)}, tx, rx, 2.0, 3.0, 3e11, 1.0);
  const auto two = synthesize_subarray_channel(
      {make_ray(RayKind::Los, g1, 0.4, 1.0, -0.2, 0.8),
       make_ray(RayKind::Nlos1, g2, 0.4, 1.0, -0.2, 0.8)},
      tx, rx, 2.0, 3.0, 3e11, 1.0);
  CHECK(arma::norm(one.matrix - two.matrix, "fro") < 1e-12 * arma::norm(one.matrix, "fro"));
}

TEST_CASE("subarray channel: element-wise brute-force oracle") {
  // Quadruple loop over (m_r, n_r, m_t, n_t) built straight from the phase
  // law, independent of the steering-vector helper.
  const ArrayGeometry tx = geom(2, 2), rx = geom(2, 2);
  const double omega_t = 1.7, omega_r = 0.9;
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> az(-1.2, 1.2), el(0.3, 2.8), mag(0.05, 0.3),
      ph(0.0, 2.0 * kPi);

  std::vector<Ray> rays;
  rays.push_back(make_ray(RayKind::Los, std::polar(mag(rng), ph(rng)), az(rng), el(rng),
                          az(rng), el(rng)));
  for (int i = 0; i < 2; ++i)
    rays.push_back(make_ray(RayKind::Nlos1, std::polar(mag(rng) * 0.3, ph(rng)), az(rng),
                            el(rng), az(rng), el(rng)));

  const auto ch = synthesize_subarray_channel(rays, tx, rx, omega_t, omega_r, 3e11, 1.0);

  const double kt = 2.0 * kPi * tx.spacing_m / tx.wavelength_m;
  const double kr = 2.0 * kPi * rx.spacing_m / rx.wavelength_m;
  arma::cx_mat expected(4, 4, arma::fill::zeros);
  for (const Ray& ray : rays) {
    const double ut = std::cos(ray.aod_azimuth) * std::sin(ray.aod_elevation);
    const double vt = std::sin(ray.aod_azimuth) * std::sin(ray.aod_elevation);
    const double ur = std::cos(ray.aoa_azimuth) * std::sin(ray.aoa_elevation);
    const double vr = std::sin(ray.aoa_azimuth) * std::sin(ray.aoa_elevation);
    for (int mr = 0; mr < 2; ++mr)
      for (int nr = 0; nr < 2; ++nr)
        for (int mt = 0; mt < 2; ++mt)
          for (int nt = 0; nt < 2; ++nt) {
            // sqrt(MtNtMrNr) * (1/sqrt(MrNr)) * (1/sqrt(MtNt)) = 1
            const std::complex<double> phase =
                std::polar(1.0, kr * (mr * ur + nr * vr) - kt * (mt * ut + nt * vt));
            expected(mr * 2 + nr, mt * 2 + nt) += ray.gain * omega_t * omega_r * phase;
          }
  }
  CHECK(arma::norm(ch.matrix - expected, "fro") < 1e-12 * arma::norm(expected, "fro"));
}

TEST_CASE("subarray channel: LOS ray bookkeeping") {
  const ArrayGeometry g2 = geom(2, 2);
  CHECK_THROWS_AS(synthesize_subarray_channel({}, g2, g2, 1.0, 1.0, 3e11, 1.0),
                  std::invalid_argument);
  const Ray nlos = make_ray(RayKind::Nlos1, {0.1, 0.0}, 0, 1, 0, 1);
  CHECK_THROWS_AS(synthesize_subarray_channel({nlos}, g2, g2, 1.0, 1.0, 3e11, 1.0),
                  std::invalid_argument);
  const Ray los = make_ray(RayKind::Los, {0.5, 0.0}, 0, 1, 0, 1);
  CHECK_THROWS_AS(synthesize_subarray_channel({los, los}, g2, g2, 1.0, 1.0, 3e11, 1.0),
                  std::invalid_argument);
}

TEST_CASE("subarray channel: linearity in the ray list") {
  const ArrayGeometry tx = geom(3, 3), rx = geom(2, 3);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> az(-1.0, 1.0), el(0.5, 2.5), ph(0.0, 2.0 * kPi);
  const Ray los = make_ray(RayKind::Los, std::polar(0.2, ph(rng)), az(rng), el(rng), az(rng),
                           el(rng));
  const Ray n1 = make_ray(RayKind::Nlos1, std::polar(0.06, ph(rng)), az(rng), el(rng), az(rng),
                          el(rng));
  const Ray n2 = make_ray(RayKind::Nlos2, std::polar(0.02, ph(rng)), az(rng), el(rng), az(rng),
                          el(rng));
  const auto full = synthesize_subarray_channel({los, n1, n2}, tx, rx, 1.0, 1.0, 3e11, 1.0);
  const auto a = synthesize_subarray_channel({los, n1}, tx, rx, 1.0, 1.0, 3e11, 1.0);
  const auto b = synthesize_subarray_channel({los, n2}, tx, rx, 1.0, 1.0, 3e11, 1.0);
  const auto base = synthesize_subarray_channel({los}, tx, rx, 1.0, 1.0, 3e11, 1.0);
  CHECK(arma::norm(full.matrix - (a.matrix + b.matrix - base.matrix), "fro") <
        1e-12 * arma::norm(full.matrix, "fro"));
}

TEST_CASE("subarray channel: Frobenius norm of a single-LOS channel") {
  const ArrayGeometry tx = geom(8, 4), rx = geom(4, 2);
  const double omega_t = 3.0, omega_r = 1.5, mag = 0.37;
  const Ray los = make_ray(RayKind::Los, std::polar(mag, 1.1), 0.3, 1.4, -0.6, 0.9);
  const auto ch = synthesize_subarray_channel({los}, tx, rx, omega_t, omega_r, 3e11, 1.0);
  const double expected =
      std::sqrt(static_cast<double>(tx.element_count()) * rx.element_count()) * mag * omega_t *
      omega_r;
  CHECK_THAT(arma::norm(ch.matrix, "fro"), WithinRel(expected, 1e-12));
}

TEST_CASE("absorption model: linear interpolation and clamping") {
  const AbsorptionModel m({{0.5e12, 0.01}, {1.0e12, 0.05}});
  CHECK_THAT(m.kappa(0.75e12), WithinRel(0.03, 1e-12));
  CHECK_THAT(m.kappa(0.1e12), WithinRel(0.01, 1e-15)); // clamp low
  CHECK_THAT(m.kappa(2.0e12), WithinRel(0.05, 1e-15)); // clamp high

  const AbsorptionModel single({{0.5e12, 0.02}});
  CHECK_THAT(single.kappa(0.1e12), WithinRel(0.02, 1e-15));
  CHECK_THAT(single.kappa(9.9e12), WithinRel(0.02, 1e-15));
}

TEST_CASE("absorption loader: separators and comments") {
  std::istringstream in("# comment line\n"
                        "0.5e12, 0.01\n"
                        "0.75e12 0.02  # trailing comment\n"
                        "\n"
                        "1.0e12\t0.05\n");
  const AbsorptionModel m = load_absorption_spectrum(in);
  REQUIRE(m.samples().size() == 3);
  CHECK_THAT(m.kappa(0.75e12), WithinRel(0.02, 1e-15));
}

TEST_CASE("absorption loader: rejects malformed tables") {
  auto parse = [](const char* text) {
    std::istringstream in(text);
    return load_absorption_spectrum(in);
  };
  CHECK_THROWS_AS(parse("1.0e12 0.05\n0.5e12 0.01\n"), std::invalid_argument); // out of order
  CHECK_THROWS_AS(parse("0.5e12 0.01\n0.5e12 0.02\n"), std::invalid_argument); // duplicate
  CHECK_THROWS_AS(parse("0.5e12 -0.01\n"), std::invalid_argument);             // negative kappa
  CHECK_THROWS_AS(parse("0.5e12\n"), std::invalid_argument);                   // one column
  CHECK_THROWS_AS(parse("0.5e12 0.01 0.3\n"), std::invalid_argument);          // three columns
  CHECK_THROWS_AS(parse("# nothing\n"), std::invalid_argument);                // empty
}

TEST_CASE("sample_rays: LOS only when no NLOS requested") {
  RaySpec spec;
  spec.order1_count = 0;
  spec.order2_count = 0;
  auto rng = make_rng(1, RngStream::Channel, 0);
  const auto rays = sample_rays(rng, spec, 0.3e12, 5.0, AbsorptionModel{});
  REQUIRE(rays.size() == 1);
  CHECK(rays[0].kind == RayKind::Los);
  CHECK_THAT(std::abs(rays[0].gain),
             WithinRel(std::sqrt(los_path_gain(0.3e12, 5.0, AbsorptionModel{})), 1e-12));
}

TEST_CASE("sample_rays: deterministic under a fixed seed") {
  RaySpec spec;
  spec.order1_count = 3;
  spec.order2_count = 2;
  auto rays_with_seed = [&spec](std::uint64_t seed) {
    auto rng = make_rng(seed, RngStream::Channel, 17);
    return sample_rays(rng, spec, 0.5e12, 2.0, AbsorptionModel{});
  };
  const auto a = rays_with_seed(99);
  const auto b = rays_with_seed(99);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].gain == b[i].gain);
    CHECK(a[i].aod_azimuth == b[i].aod_azimuth);
    CHECK(a[i].aoa_elevation == b[i].aoa_elevation);
  }
  const auto c = rays_with_seed(100);
  CHECK(a[0].gain != c[0].gain);
}

TEST_CASE("sample_rays: per-order reflection losses and counts") {
  RaySpec spec;
  spec.order1_count = 4;
  spec.order2_count = 2;
  spec.order1_loss_db = 10.0;
  spec.order2_loss_db = 20.0;
  auto rng = make_rng(5, RngStream::Channel, 0);
  const auto rays = sample_rays(rng, spec, 0.3e12, 1.0, AbsorptionModel{});
  REQUIRE(rays.size() == 7);
  const double los_power = std::norm(rays[0].gain);
  int n1 = 0, n2 = 0;
  for (std::size_t i = 1; i < rays.size(); ++i) {
    const double ratio = std::norm(rays[i].gain) / los_power;
    if (rays[i].kind == RayKind::Nlos1) {
      ++n1;
      CHECK_THAT(ratio, WithinRel(0.1, 1e-12));
    } else {
      ++n2;
      CHECK_THAT(ratio, WithinRel(0.01, 1e-12));
    }
    CHECK(rays[i].aod_azimuth >= spec.azimuth_min);
    CHECK(rays[i].aod_azimuth <= spec.azimuth_max);
    CHECK(rays[i].aod_elevation >= spec.elevation_min);
    CHECK(rays[i].aod_elevation <= spec.elevation_max);
  }
  CHECK(n1 == 4);
  CHECK(n2 == 2);
}

TEST_CASE("sample_rays: pinned LOS geometry") {
  RaySpec spec;
  spec.order1_count = 1;
  spec.order2_count = 0;
  spec.los_angles = RaySpec::LosAngles{0.0, 0.0, 0.0, 0.0};
  auto rng = make_rng(2, RngStream::Channel, 1);
  const auto rays = sample_rays(rng, spec, 0.3e12, 1.0, AbsorptionModel{});
  CHECK(rays[0].aod_azimuth == 0.0);
  CHECK(rays[0].aod_elevation == 0.0);
  CHECK(rays[0].aoa_azimuth == 0.0);
  CHECK(rays[0].aoa_elevation == 0.0);
}

TEST_CASE("array geometry validation") {
  CHECK_THROWS_AS(geom(0, 1).validate(), std::invalid_argument);
  CHECK_THROWS_AS(geom(1, 1, 1.5).validate(), std::invalid_argument); // a > lambda
  ArrayGeometry g = geom(2, 2);
  g.spacing_m = 0.0;
  CHECK_THROWS_AS(g.validate(), std::invalid_argument);
}
