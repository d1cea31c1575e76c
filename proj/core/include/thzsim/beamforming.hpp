// SPDX-License-Identifier: Apache-2.0
//
// thzsim - link-level simulator for indoor THz downlinks with one-bit DACs
// Copyright (C) 2026 the thzsim authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0

#ifndef THZSIM_BEAMFORMING_HPP
#define THZSIM_BEAMFORMING_HPP

#include <armadillo>
#include <complex>
#include <map>
#include <vector>

#include "thzsim/channel.hpp"

namespace thzsim {

struct BeamAngles {
  double azimuth = 0.0;
  double elevation = 0.0;
};

// Uniform angular grid over an azimuth x elevation rectangle. Entries are
// stored azimuth-outer / elevation-inner; the entry index is the
// tie-breaking order for beam selection.
struct Codebook {
  std::vector<BeamAngles> entries;
  double separation_rad = 0.0;
  std::size_t azimuth_count = 0;
  std::size_t elevation_count = 0;
};

// Grid points start at the lower bound of each half-open range and advance
// by separation_rad while strictly inside it.
Codebook build_codebook(double separation_rad, double azimuth_lo, double azimuth_hi,
                        double elevation_lo, double elevation_hi);

// Analog beam assignment: one transmit angle per group, one receive angle
// per user.
struct BeamSelection {
  std::map<int, BeamAngles> tx_per_group;
  std::map<int, BeamAngles> rx_per_user;
};

// Scalar effective channel a_r(rx)^H F a_t(tx). The geometries must match
// the shape of the channel matrix.
std::complex<double> effective_channel(const SubarrayChannel& channel, const ArrayGeometry& tx,
                                       const ArrayGeometry& rx, const BeamAngles& tx_angle,
                                       const BeamAngles& rx_angle);

// Multi-user channel matrix for one subcarrier: row u is the effective
// channel of user_order[u], column k belongs to subarray_order[k].
struct EffectiveChannelMatrix {
  arma::cx_mat matrix; // U^w x K^w
  double frequency_hz = 0.0;
  std::vector<int> user_order;
  std::vector<int> subarray_order;
};

// Stacks per-user rows in ascending user-id order regardless of the order
// they are supplied in.
EffectiveChannelMatrix assemble_channel_matrix(double frequency_hz,
                                               const std::vector<int>& user_ids,
                                               const std::vector<arma::cx_rowvec>& rows,
                                               const std::vector<int>& subarray_order);

// Large-array limit of one user's effective channel row: zeros outside the
// user's subarray block, the LOS gains inside it. `los_gain_blocks` holds
// one block per user sharing the subcarrier, in row order; magnitudes
// within a block must agree.
arma::cx_rowvec asymptotic_effective_channel(std::size_t user_index,
                                             const std::vector<arma::cx_rowvec>& los_gain_blocks);

// ---------------------------------------------------------------------------
// Ray-level link description used by beam selection and by the simulation
// driver. Per user the ray ANGLES are shared across subarrays (collocated
// subarrays see the same geometry); gains carry per-subarray phases.

struct SubarrayRays {
  std::vector<Ray> rays;
};

struct UserLink {
  int user_id = 0;
  int group_id = 0;
  double distance_m = 0.0;
  double los_gain_mag = 0.0; // |eta_L(f_u^w, d_u)|, used to normalize the selection metric
  std::vector<SubarrayRays> per_subarray; // K^w entries in column order
};

struct SubcarrierLink {
  double frequency_hz = 0.0;
  ArrayGeometry tx_geom;
  ArrayGeometry rx_geom;
  double omega_t = 1.0;
  double omega_r = 1.0;
  std::vector<int> subarray_ids;    // global subarray ids in column order
  std::vector<int> subarray_groups; // owning group per column
  std::vector<UserLink> users;      // ascending user id
  std::vector<int> user_block_sizes; // K_{q_u} per user row
};

struct LinkTrial {
  std::vector<SubcarrierLink> subcarriers;
};

struct GroupSpec {
  int group_id = 0;
  std::vector<int> user_ids;
  int reference_user_id = 0; // supplies the shared transmit beam
};

// Per-element phase-shifter errors for one trial, indexed by global
// subarray id on the transmit side and by user id on the receive side.
struct PhaseErrorRealization {
  std::vector<arma::vec> tx_by_subarray;
  std::map<int, arma::vec> rx_by_user;
};

// Builds the effective channel matrix of one subcarrier from its ray data
// and the selected beams, optionally applying per-element phase errors to
// the beamforming vectors at both ends.
EffectiveChannelMatrix assemble_link_channel(const SubcarrierLink& link,
                                             const BeamSelection& selection,
                                             const PhaseErrorRealization* errors = nullptr);

// Analog beams from the LOS geometry: each user receives along its LOS
// arrival direction, each group transmits along the LOS departure
// direction of its reference user.
BeamSelection select_beam_angles_los(const LinkTrial& trial, const std::vector<GroupSpec>& groups);

// Exhaustive codebook search maximizing, per group, the sum over users and
// subcarriers of ||h||^2 / |eta_L|^2. Ties resolve to the lowest codebook
// index, transmit entry first, then receive.
BeamSelection select_beam_angles_codebook(const LinkTrial& trial, const Codebook& tx_codebook,
                                          const Codebook& rx_codebook,
                                          const std::vector<GroupSpec>& groups);

// Selection metric evaluated at a fixed pair of beams (used to re-check
// exhaustiveness and for the LOS/codebook comparison).
double beam_selection_objective(const LinkTrial& trial, const GroupSpec& group,
                                const BeamAngles& tx_angle,
                                const std::map<int, BeamAngles>& rx_angles);

} // namespace thzsim

#endif // THZSIM_BEAMFORMING_HPP
