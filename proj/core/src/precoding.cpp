// SPDX-License-Identifier: Apache-2.0
//
// thzsim - link-level simulator for indoor THz downlinks with one-bit DACs
// Copyright (C) 2026 the thzsim authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0

#include "thzsim/precoding.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <numbers>

namespace thzsim {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kCorrelationSlack = 1e-9;

[[noreturn]] void fail(const std::string& msg) { throw std::invalid_argument(msg); }

double clamp_correlation(double value, const char* part) {
  if (std::abs(value) > 1.0 + kCorrelationSlack) {
    std::ostringstream os;
    os << "distortion covariance: normalized " << part << " correlation " << value
       << " exceeds unit magnitude beyond tolerance";
    fail(os.str());
  }
  return std::clamp(value, -1.0, 1.0);
}

} // namespace

std::complex<double> arcsine_law_entry(std::complex<double> r) {
  const double mod2 = std::norm(r);
  if (mod2 > 1.0 + 2.0 * kCorrelationSlack)
    fail("arcsine law: correlation magnitude exceeds 1 beyond tolerance");
  if (std::abs(mod2 - 1.0) <= 8e-15) {
    // |r| = 1 up to rounding: both arcsines follow from the phase, which
    // atan2 delivers without the asin conditioning blow-up at the branch
    // points. asin(cos t) = pi/2 - |t|; asin(sin t) folds t into
    // [-pi/2, pi/2].
    const double theta = std::arg(r);
    const double asin_re = kPi / 2.0 - std::abs(theta);
    double asin_im = theta;
    if (theta > kPi / 2.0)
      asin_im = kPi - theta;
    else if (theta < -kPi / 2.0)
      asin_im = -kPi - theta;
    return std::complex<double>(asin_re, asin_im) - r;
  }
  const double re = clamp_correlation(std::real(r), "real");
  const double im = clamp_correlation(std::imag(r), "imaginary");
  return std::complex<double>(std::asin(re) - re, std::asin(im) - im);
}

arma::cx_mat mrt_precoder(const EffectiveChannelMatrix& channel, double power_w) {
  if (!(power_w > 0.0))
    fail("mrt precoder: power must be positive");
  const arma::cx_mat& h = channel.matrix;
  const double tr = std::real(arma::trace(h * h.t()));
  if (!(tr > 0.0))
    fail("mrt precoder: all-zero channel matrix");
  return std::sqrt(power_w / tr) * h.t();
}

arma::cx_mat zf_precoder(const EffectiveChannelMatrix& channel, double power_w) {
  if (!(power_w > 0.0))
    fail("zf precoder: power must be positive");
  const arma::cx_mat& h = channel.matrix;
  if (h.n_rows > h.n_cols)
    fail("zf precoder: more users than subarrays");
  const arma::cx_mat gram = h * h.t();
  const double rc = arma::rcond(gram);
  if (!(rc > 1e-12)) {
    std::ostringstream os;
    os << "zf precoder: channel Gram matrix singular at subcarrier " << channel.frequency_hz
       << " Hz (rcond = " << rc << ")";
    throw std::runtime_error(os.str());
  }
  const arma::cx_mat gram_inv = arma::inv(gram);
  const double tr = std::real(arma::trace(gram_inv));
  return std::sqrt(power_w / tr) * h.t() * gram_inv;
}

arma::vec quantizer_gain(const arma::cx_mat& q, double power_w) {
  if (!(power_w > 0.0))
    fail("quantizer gain: power must be positive");
  const arma::uword k = q.n_rows;
  arma::vec g(k);
  const double scale = std::sqrt(2.0 * power_w / (kPi * static_cast<double>(k)));
  for (arma::uword i = 0; i < k; ++i) {
    const double row_power = arma::accu(arma::square(arma::abs(q.row(i))));
    if (!(row_power > 0.0))
      fail("quantizer gain: row " + std::to_string(i) + " of Q is zero (undriven subarray)");
    g(i) = scale / std::sqrt(row_power);
  }
  return g;
}

arma::cx_mat distortion_covariance(const arma::cx_mat& q, double power_w) {
  if (!(power_w > 0.0))
    fail("distortion covariance: power must be positive");
  const arma::uword k = q.n_rows;
  const arma::cx_mat qq = q * q.t();
  arma::vec diag(k);
  for (arma::uword i = 0; i < k; ++i) {
    diag(i) = std::real(qq(i, i));
    if (!(diag(i) > 0.0))
      fail("distortion covariance: row " + std::to_string(i) + " of Q is zero");
  }

  // C_dd = (2P / pi K) * (asin(Re R) + j asin(Im R) - R) with
  // R = D^{-1/2} QQ^H D^{-1/2}; the subtracted R term is G QQ^H G^H divided
  // by the common prefactor. The normalization is evaluated as
  // (qq / d_i) * sqrt(d_i / d_j) so that fully correlated rows give a
  // correlation of exactly 1; asin is steep there and would otherwise turn
  // 1-ulp rounding into 1e-8 level noise.
  const double prefactor = 2.0 * power_w / (kPi * static_cast<double>(k));
  arma::cx_mat c(k, k, arma::fill::zeros);
  for (arma::uword i = 0; i < k; ++i) {
    c(i, i) = std::complex<double>(prefactor * (kPi / 2.0 - 1.0), 0.0);
    for (arma::uword j = i + 1; j < k; ++j) {
      const std::complex<double> r = (qq(i, j) / diag(i)) * std::sqrt(diag(i) / diag(j));
      const std::complex<double> value = prefactor * arcsine_law_entry(r);
      c(i, j) = value;
      c(j, i) = std::conj(value);
    }
  }
  return c;
}

arma::cx_vec one_bit_quantize(const arma::cx_vec& z, double power_w) {
  if (!(power_w > 0.0))
    fail("one-bit quantizer: power must be positive");
  if (!z.is_finite())
    fail("one-bit quantizer: input must be finite");
  const double level = std::sqrt(power_w / (2.0 * static_cast<double>(z.n_elem)));
  arma::cx_vec x(z.n_elem);
  for (arma::uword i = 0; i < z.n_elem; ++i) {
    const double re = std::real(z(i)) < 0.0 ? -level : level;
    const double im = std::imag(z(i)) < 0.0 ? -level : level;
    x(i) = std::complex<double>(re, im);
  }
  return x;
}

arma::cx_mat empirical_distortion_covariance(const arma::cx_mat& q, double power_w, long trials,
                                             std::mt19937_64& rng) {
  if (trials < 1)
    fail("empirical distortion covariance: trials must be >= 1");
  const arma::uword k = q.n_rows, u = q.n_cols;
  const arma::vec g = quantizer_gain(q, power_w);
  std::normal_distribution<double> normal(0.0, std::sqrt(0.5)); // unit-variance complex entries

  arma::cx_mat acc(k, k, arma::fill::zeros);
  arma::cx_vec s(u), d(k);
  for (long t = 0; t < trials; ++t) {
    for (arma::uword i = 0; i < u; ++i)
      s(i) = std::complex<double>(normal(rng), normal(rng));
    const arma::cx_vec z = q * s;
    const arma::cx_vec x = one_bit_quantize(z, power_w);
    for (arma::uword i = 0; i < k; ++i)
      d(i) = x(i) - g(i) * z(i);
    acc += d * d.t();
  }
  return acc / static_cast<double>(trials);
}

PrecoderSet make_precoder_set(const EffectiveChannelMatrix& channel, PrecoderKind kind,
                              double power_w) {
  PrecoderSet set;
  set.power_w = power_w;
  set.q = kind == PrecoderKind::Mrt ? mrt_precoder(channel, power_w)
                                    : zf_precoder(channel, power_w);
  set.g_diag = quantizer_gain(set.q, power_w);
  set.c_dd = distortion_covariance(set.q, power_w);
  validate_precoder_set(set);
  return set;
}

void validate_precoder_set(const PrecoderSet& set) {
  const double p = set.power_w;
  if (!(p > 0.0))
    fail("precoder set: power must be positive");
  const arma::uword k = set.q.n_rows;
  if (set.g_diag.n_elem != k || set.c_dd.n_rows != k || set.c_dd.n_cols != k)
    fail("precoder set: inconsistent dimensions");
  if (arma::any(set.g_diag <= 0.0))
    fail("precoder set: quantizer gains must be strictly positive");

  const arma::cx_mat qq = set.q * set.q.t();
  const double tr_q = std::real(arma::trace(qq));
  if (std::abs(tr_q - p) > 1e-9 * p)
    fail("precoder set: trace(Q Q^H) deviates from the power budget");

  if (arma::norm(set.c_dd - set.c_dd.t(), "fro") > 1e-12 * (arma::norm(set.c_dd, "fro") + p))
    fail("precoder set: C_dd is not Hermitian");
  arma::vec eig = arma::eig_sym(set.c_dd);
  const double scale = std::abs(std::real(arma::trace(set.c_dd)));
  if (eig.min() < -1e-9 * scale)
    fail("precoder set: C_dd has a negative eigenvalue beyond tolerance");

  double total = std::real(arma::trace(set.c_dd));
  for (arma::uword i = 0; i < k; ++i)
    total += set.g_diag(i) * set.g_diag(i) * std::real(qq(i, i));
  if (std::abs(total - p) > 1e-9 * p)
    fail("precoder set: trace(G Q Q^H G^H + C_dd) deviates from the power budget");
}

} // namespace thzsim
