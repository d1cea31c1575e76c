// SPDX-License-Identifier: Apache-2.0
//
// thzsim - link-level simulator for indoor THz downlinks with one-bit DACs
// Copyright (C) 2026 the thzsim authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0

#ifndef THZSIM_PRECODING_HPP
#define THZSIM_PRECODING_HPP

#include <armadillo>
#include <random>

#include "thzsim/beamforming.hpp"

namespace thzsim {

enum class PrecoderKind { Mrt, Zf };

// Baseband precoder plus the linearized one-bit DAC model for one
// subcarrier: Q (K^w x U^w), the diagonal quantizer gain G and the
// distortion covariance C_dd. G*Q*s + d has total power P^w by
// construction, split as 2P/pi through the linear part and P(1 - 2/pi)
// through the distortion.
struct PrecoderSet {
  arma::cx_mat q;      // K^w x U^w
  arma::vec g_diag;    // diagonal of G, strictly positive
  arma::cx_mat c_dd;   // K^w x K^w, Hermitian PSD
  double power_w = 0.0;
};

// Matched-filter precoder sqrt(P / tr(H H^H)) * H^H.
arma::cx_mat mrt_precoder(const EffectiveChannelMatrix& channel, double power_w);

// Channel-inverting precoder sqrt(P / tr((H H^H)^-1)) * H^H (H H^H)^-1.
// Requires rcond(H H^H) > 1e-12; the failure message names the subcarrier.
arma::cx_mat zf_precoder(const EffectiveChannelMatrix& channel, double power_w);

// Diagonal of G = sqrt(2P / (pi K)) diag(Q Q^H)^{-1/2}. Every row of Q must
// be nonzero (an undriven DAC has no defined gain).
arma::vec quantizer_gain(const arma::cx_mat& q, double power_w);

// Arcsine-law distortion covariance
//   C_dd = (2P / pi K) [asin(Re R) + j asin(Im R)] - G Q Q^H G^H
// with R the diagonally normalized correlation of Q Q^H. Correlation
// entries may exceed unit magnitude by at most 1e-9 (rounding); larger
// excursions raise an error.
arma::cx_mat distortion_covariance(const arma::cx_mat& q, double power_w);

// Entrywise arcsine-law term asin(Re r) + j asin(Im r) - r for a normalized
// correlation r. Unit-modulus correlations (fully correlated rails, e.g.
// any rank-one precoder) are evaluated through the phase angle: asin is
// infinitely steep at +-1 and would otherwise amplify rounding in r into
// 1e-8 level noise.
std::complex<double> arcsine_law_entry(std::complex<double> r);

// Per-rail sign quantizer with output levels +-sqrt(P / 2K); sign(0) = +1.
arma::cx_vec one_bit_quantize(const arma::cx_vec& z, double power_w);

// Monte Carlo estimate of C_dd: averages d d^H over draws of the Gaussian
// source, d = quantize(Q s) - G Q s. Brute-force reference for the closed
// form above.
arma::cx_mat empirical_distortion_covariance(const arma::cx_mat& q, double power_w, long trials,
                                             std::mt19937_64& rng);

// Builds Q, G and C_dd for one subcarrier and checks the power identities
// (trace(QQ^H) = P, trace(G QQ^H G^H + C_dd) = P) and the spectrum of C_dd.
PrecoderSet make_precoder_set(const EffectiveChannelMatrix& channel, PrecoderKind kind,
                              double power_w);

void validate_precoder_set(const PrecoderSet& set);

} // namespace thzsim

#endif // THZSIM_PRECODING_HPP
