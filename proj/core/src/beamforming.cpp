// SPDX-License-Identifier: Apache-2.0
//
// thzsim - link-level simulator for indoor THz downlinks with one-bit DACs
// Copyright (C) 2026 the thzsim authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0

#include "thzsim/beamforming.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace thzsim {

namespace {

[[noreturn]] void fail(const std::string& msg) { throw std::invalid_argument(msg); }

const Ray& los_ray_of(const std::vector<Ray>& rays) {
  for (const Ray& r : rays)
    if (r.kind == RayKind::Los)
      return r;
  fail("beam selection: user has no LOS ray");
}

const UserLink* find_user(const LinkTrial& trial, int user_id, const SubcarrierLink** link_out) {
  for (const SubcarrierLink& link : trial.subcarriers)
    for (const UserLink& u : link.users)
      if (u.user_id == user_id) {
        if (link_out)
          *link_out = &link;
        return &u;
      }
  return nullptr;
}

// Beamforming vector with optional per-element phase errors applied on top
// of the ideal steering phases.
arma::cx_vec beam_vector(const ArrayGeometry& geom, const BeamAngles& angle,
                         const arma::vec* errors) {
  arma::cx_vec v = steering_vector(geom, angle.azimuth, angle.elevation);
  if (errors) {
    if (errors->n_elem != v.n_elem)
      fail("phase errors: element count mismatch");
    for (arma::uword i = 0; i < v.n_elem; ++i)
      v(i) *= std::polar(1.0, (*errors)(i));
  }
  return v;
}

} // namespace

Codebook build_codebook(double separation_rad, double azimuth_lo, double azimuth_hi,
                        double elevation_lo, double elevation_hi) {
  if (!(separation_rad > 0.0))
    fail("codebook: angular separation must be positive");
  if (!(azimuth_hi > azimuth_lo) || !(elevation_hi > elevation_lo))
    fail("codebook: angle ranges must be non-degenerate");

  Codebook cb;
  cb.separation_rad = separation_rad;
  std::vector<double> az, el;
  for (double a = azimuth_lo; a < azimuth_hi - 1e-12 * separation_rad; a += separation_rad)
    az.push_back(a);
  for (double e = elevation_lo; e < elevation_hi - 1e-12 * separation_rad; e += separation_rad)
    el.push_back(e);
  if (az.empty() || el.empty())
    fail("codebook: empty grid");
  cb.azimuth_count = az.size();
  cb.elevation_count = el.size();
  cb.entries.reserve(az.size() * el.size());
  for (double a : az)
    for (double e : el)
      cb.entries.push_back(BeamAngles{a, e});
  return cb;
}

std::complex<double> effective_channel(const SubarrayChannel& channel, const ArrayGeometry& tx,
                                       const ArrayGeometry& rx, const BeamAngles& tx_angle,
                                       const BeamAngles& rx_angle) {
  if (channel.matrix.n_rows != static_cast<arma::uword>(rx.element_count()) ||
      channel.matrix.n_cols != static_cast<arma::uword>(tx.element_count()))
    fail("effective_channel: geometry does not match the channel matrix shape");
  const arma::cx_vec a_r = steering_vector(rx, rx_angle.azimuth, rx_angle.elevation);
  const arma::cx_vec a_t = steering_vector(tx, tx_angle.azimuth, tx_angle.elevation);
  return arma::as_scalar(a_r.t() * channel.matrix * a_t);
}

EffectiveChannelMatrix assemble_channel_matrix(double frequency_hz,
                                               const std::vector<int>& user_ids,
                                               const std::vector<arma::cx_rowvec>& rows,
                                               const std::vector<int>& subarray_order) {
  if (user_ids.empty() || user_ids.size() != rows.size())
    fail("channel matrix: need one row per user");
  const arma::uword k = rows.front().n_elem;
  for (const auto& r : rows)
    if (r.n_elem != k)
      fail("channel matrix: inconsistent row lengths");
  if (!subarray_order.empty() && subarray_order.size() != k)
    fail("channel matrix: subarray order does not match the row length");

  std::vector<std::size_t> perm(user_ids.size());
  std::iota(perm.begin(), perm.end(), 0);
  std::sort(perm.begin(), perm.end(),
            [&](std::size_t a, std::size_t b) { return user_ids[a] < user_ids[b]; });
  for (std::size_t i = 1; i < perm.size(); ++i)
    if (user_ids[perm[i]] == user_ids[perm[i - 1]])
      fail("channel matrix: duplicate user id " + std::to_string(user_ids[perm[i]]));

  EffectiveChannelMatrix out;
  out.frequency_hz = frequency_hz;
  out.subarray_order = subarray_order;
  out.matrix.set_size(user_ids.size(), k);
  out.user_order.reserve(user_ids.size());
  for (std::size_t i = 0; i < perm.size(); ++i) {
    out.matrix.row(i) = rows[perm[i]];
    out.user_order.push_back(user_ids[perm[i]]);
  }
  if (!out.matrix.is_finite())
    fail("channel matrix: non-finite entries");
  return out;
}

arma::cx_rowvec asymptotic_effective_channel(std::size_t user_index,
                                             const std::vector<arma::cx_rowvec>& los_gain_blocks) {
  if (user_index >= los_gain_blocks.size())
    fail("asymptotic channel: user index out of range");
  arma::uword total = 0;
  for (const auto& block : los_gain_blocks) {
    if (block.n_elem == 0)
      fail("asymptotic channel: empty subarray block");
    total += block.n_elem;
  }
  const arma::cx_rowvec& own = los_gain_blocks[user_index];
  const double mag = std::abs(own(0));
  for (arma::uword i = 0; i < own.n_elem; ++i)
    if (std::abs(std::abs(own(i)) - mag) > 1e-9 * mag)
      fail("asymptotic channel: LOS gain magnitudes must agree within a block");

  arma::cx_rowvec t(total, arma::fill::zeros);
  arma::uword offset = 0;
  for (std::size_t u = 0; u < user_index; ++u)
    offset += los_gain_blocks[u].n_elem;
  t.subvec(offset, offset + own.n_elem - 1) = own;
  return t;
}

EffectiveChannelMatrix assemble_link_channel(const SubcarrierLink& link,
                                             const BeamSelection& selection,
                                             const PhaseErrorRealization* errors) {
  const std::size_t k = link.subarray_ids.size();
  if (k == 0 || link.users.empty())
    fail("link channel: empty subcarrier link");
  if (link.subarray_groups.size() != k)
    fail("link channel: per-column group list does not match the column count");

  const double prefactor =
      std::sqrt(static_cast<double>(link.tx_geom.element_count()) *
                link.rx_geom.element_count()) *
      link.omega_t * link.omega_r;

  // Transmit beam vectors are shared per group unless per-subarray phase
  // errors make them column specific.
  std::vector<arma::cx_vec> tx_beams(k);
  for (std::size_t c = 0; c < k; ++c) {
    const auto it = selection.tx_per_group.find(link.subarray_groups[c]);
    if (it == selection.tx_per_group.end())
      fail("link channel: no transmit beam for group " +
           std::to_string(link.subarray_groups[c]));
    const arma::vec* err = nullptr;
    if (errors) {
      const int sid = link.subarray_ids[c];
      if (sid < 0 || static_cast<std::size_t>(sid) >= errors->tx_by_subarray.size())
        fail("link channel: missing transmit phase errors for subarray " + std::to_string(sid));
      err = &errors->tx_by_subarray[sid];
    }
    tx_beams[c] = beam_vector(link.tx_geom, it->second, err);
  }

  std::vector<int> user_ids;
  std::vector<arma::cx_rowvec> rows;
  user_ids.reserve(link.users.size());
  rows.reserve(link.users.size());
  for (const UserLink& user : link.users) {
    if (user.per_subarray.size() != k)
      fail("link channel: user " + std::to_string(user.user_id) +
           " has rays for the wrong number of subarrays");
    const auto it = selection.rx_per_user.find(user.user_id);
    if (it == selection.rx_per_user.end())
      fail("link channel: no receive beam for user " + std::to_string(user.user_id));
    const arma::vec* err = nullptr;
    if (errors) {
      const auto eit = errors->rx_by_user.find(user.user_id);
      if (eit == errors->rx_by_user.end())
        fail("link channel: missing receive phase errors for user " +
             std::to_string(user.user_id));
      err = &eit->second;
    }
    const arma::cx_vec v_r = beam_vector(link.rx_geom, it->second, err);

    arma::cx_rowvec row(k, arma::fill::zeros);
    for (std::size_t c = 0; c < k; ++c) {
      std::complex<double> h{0.0, 0.0};
      for (const Ray& ray : user.per_subarray[c].rays) {
        const arma::cx_vec a_rx =
            steering_vector(link.rx_geom, ray.aoa_azimuth, ray.aoa_elevation);
        const arma::cx_vec a_tx =
            steering_vector(link.tx_geom, ray.aod_azimuth, ray.aod_elevation);
        const std::complex<double> rho_r = arma::cdot(v_r, a_rx);      // v_r^H a_rx
        const std::complex<double> rho_t = arma::cdot(a_tx, tx_beams[c]); // a_tx^H v_t
        h += ray.gain * rho_r * rho_t;
      }
      row(c) = prefactor * h;
    }
    user_ids.push_back(user.user_id);
    rows.push_back(std::move(row));
  }
  return assemble_channel_matrix(link.frequency_hz, user_ids, rows, link.subarray_ids);
}

BeamSelection select_beam_angles_los(const LinkTrial& trial,
                                     const std::vector<GroupSpec>& groups) {
  BeamSelection sel;
  for (const GroupSpec& group : groups) {
    const UserLink* ref = find_user(trial, group.reference_user_id, nullptr);
    if (!ref)
      fail("LOS beam selection: reference user " + std::to_string(group.reference_user_id) +
           " not present in any subcarrier");
    const Ray& ref_los = los_ray_of(ref->per_subarray.front().rays);
    sel.tx_per_group[group.group_id] = BeamAngles{ref_los.aod_azimuth, ref_los.aod_elevation};
    for (int uid : group.user_ids) {
      const UserLink* user = find_user(trial, uid, nullptr);
      if (!user)
        fail("LOS beam selection: user " + std::to_string(uid) +
             " not present in any subcarrier");
      const Ray& los = los_ray_of(user->per_subarray.front().rays);
      sel.rx_per_user[uid] = BeamAngles{los.aoa_azimuth, los.aoa_elevation};
    }
  }
  return sel;
}

namespace {

// Sufficient statistics of one (user, subcarrier) pair for the codebook
// metric: the shared ray angles and the Gram matrix of per-subarray gains
// over the group's columns, so that
//   ||h||^2 = (prefactor)^2 * sum_{r,r'} c_r conj(c_r') gram(r, r')
// with c_r the product of the two steering inner products of ray r.
struct UserSubcarrierStats {
  std::vector<Ray> angle_template; // gains not used
  arma::cx_mat gram;
  double weight = 0.0; // (prefactor)^2 / |eta_L|^2
  const SubcarrierLink* link = nullptr;
};

std::vector<UserSubcarrierStats> collect_stats(const LinkTrial& trial, const GroupSpec& group,
                                               int user_id) {
  std::vector<UserSubcarrierStats> stats;
  for (const SubcarrierLink& link : trial.subcarriers) {
    const UserLink* user = nullptr;
    for (const UserLink& u : link.users)
      if (u.user_id == user_id)
        user = &u;
    if (!user)
      continue;

    std::vector<std::size_t> cols;
    for (std::size_t c = 0; c < link.subarray_groups.size(); ++c)
      if (link.subarray_groups[c] == group.group_id)
        cols.push_back(c);
    if (cols.empty())
      fail("codebook selection: group " + std::to_string(group.group_id) +
           " owns no subarray on subcarrier");

    const std::vector<Ray>& first = user->per_subarray[cols.front()].rays;
    const std::size_t n_rays = first.size();
    UserSubcarrierStats s;
    s.link = &link;
    s.angle_template = first;
    s.gram.zeros(n_rays, n_rays);
    for (std::size_t c : cols) {
      const std::vector<Ray>& rays = user->per_subarray[c].rays;
      if (rays.size() != n_rays)
        fail("codebook selection: ray count differs across subarrays");
      for (std::size_t r = 0; r < n_rays; ++r) {
        if (rays[r].aod_azimuth != first[r].aod_azimuth ||
            rays[r].aod_elevation != first[r].aod_elevation ||
            rays[r].aoa_azimuth != first[r].aoa_azimuth ||
            rays[r].aoa_elevation != first[r].aoa_elevation)
          fail("codebook selection: ray angles must be shared across subarrays");
        for (std::size_t q = 0; q < n_rays; ++q)
          s.gram(r, q) += rays[r].gain * std::conj(rays[q].gain);
      }
    }
    const double pref = std::sqrt(static_cast<double>(link.tx_geom.element_count()) *
                                  link.rx_geom.element_count()) *
                        link.omega_t * link.omega_r;
    if (!(user->los_gain_mag > 0.0))
      fail("codebook selection: LOS gain magnitude must be positive");
    s.weight = pref * pref / (user->los_gain_mag * user->los_gain_mag);
    stats.push_back(std::move(s));
  }
  if (stats.empty())
    fail("codebook selection: user " + std::to_string(user_id) + " has no subcarriers");
  return stats;
}

} // namespace

double beam_selection_objective(const LinkTrial& trial, const GroupSpec& group,
                                const BeamAngles& tx_angle,
                                const std::map<int, BeamAngles>& rx_angles) {
  double total = 0.0;
  for (int uid : group.user_ids) {
    const auto rx_it = rx_angles.find(uid);
    if (rx_it == rx_angles.end())
      fail("beam objective: missing receive angle for user " + std::to_string(uid));
    for (const UserSubcarrierStats& s : collect_stats(trial, group, uid)) {
      const std::size_t n_rays = s.angle_template.size();
      arma::cx_vec c(n_rays);
      for (std::size_t r = 0; r < n_rays; ++r) {
        const Ray& ray = s.angle_template[r];
        const std::complex<double> rho_r =
            steering_inner_product(s.link->rx_geom, rx_it->second.azimuth,
                                   rx_it->second.elevation, ray.aoa_azimuth, ray.aoa_elevation);
        const std::complex<double> rho_t =
            steering_inner_product(s.link->tx_geom, ray.aod_azimuth, ray.aod_elevation,
                                   tx_angle.azimuth, tx_angle.elevation);
        c(r) = rho_r * rho_t;
      }
      total += s.weight * std::real(arma::as_scalar(c.st() * s.gram * arma::conj(c)));
    }
  }
  return total;
}

BeamSelection select_beam_angles_codebook(const LinkTrial& trial, const Codebook& tx_codebook,
                                          const Codebook& rx_codebook,
                                          const std::vector<GroupSpec>& groups) {
  if (tx_codebook.entries.empty() || rx_codebook.entries.empty())
    fail("codebook selection: empty codebook");

  BeamSelection sel;
  for (const GroupSpec& group : groups) {
    // Per user: the ray statistics and the two inner-product tables
    // (codebook entry x ray), reused across the entry scan.
    struct UserTables {
      int user_id;
      std::vector<UserSubcarrierStats> stats;
      // per subcarrier stat: rho[entry][ray]
      std::vector<arma::cx_mat> rho_rx;
      std::vector<arma::cx_mat> rho_tx;
    };
    std::vector<UserTables> tables;
    for (int uid : group.user_ids) {
      UserTables t;
      t.user_id = uid;
      t.stats = collect_stats(trial, group, uid);
      for (const UserSubcarrierStats& s : t.stats) {
        const std::size_t n_rays = s.angle_template.size();
        arma::cx_mat rr(rx_codebook.entries.size(), n_rays);
        for (std::size_t e = 0; e < rx_codebook.entries.size(); ++e)
          for (std::size_t r = 0; r < n_rays; ++r)
            rr(e, r) = steering_inner_product(
                s.link->rx_geom, rx_codebook.entries[e].azimuth, rx_codebook.entries[e].elevation,
                s.angle_template[r].aoa_azimuth, s.angle_template[r].aoa_elevation);
        arma::cx_mat rt(tx_codebook.entries.size(), n_rays);
        for (std::size_t e = 0; e < tx_codebook.entries.size(); ++e)
          for (std::size_t r = 0; r < n_rays; ++r)
            rt(e, r) = steering_inner_product(
                s.link->tx_geom, s.angle_template[r].aod_azimuth,
                s.angle_template[r].aod_elevation, tx_codebook.entries[e].azimuth,
                tx_codebook.entries[e].elevation);
        t.rho_rx.push_back(std::move(rr));
        t.rho_tx.push_back(std::move(rt));
      }
      tables.push_back(std::move(t));
    }

    double best_obj = -1.0;
    std::size_t best_tx = 0;
    std::vector<std::size_t> best_rx(tables.size(), 0);

    for (std::size_t et = 0; et < tx_codebook.entries.size(); ++et) {
      double group_obj = 0.0;
      std::vector<std::size_t> rx_choice(tables.size(), 0);
      for (std::size_t ui = 0; ui < tables.size(); ++ui) {
        const UserTables& t = tables[ui];
        double user_best = -1.0;
        std::size_t user_best_rx = 0;
        for (std::size_t er = 0; er < rx_codebook.entries.size(); ++er) {
          double obj = 0.0;
          for (std::size_t si = 0; si < t.stats.size(); ++si) {
            const UserSubcarrierStats& s = t.stats[si];
            const std::size_t n_rays = s.angle_template.size();
            arma::cx_vec c(n_rays);
            for (std::size_t r = 0; r < n_rays; ++r)
              c(r) = t.rho_rx[si](er, r) * t.rho_tx[si](et, r);
            obj += s.weight * std::real(arma::as_scalar(c.st() * s.gram * arma::conj(c)));
          }
          if (obj > user_best) {
            user_best = obj;
            user_best_rx = er;
          }
        }
        group_obj += user_best;
        rx_choice[ui] = user_best_rx;
      }
      if (group_obj > best_obj) {
        best_obj = group_obj;
        best_tx = et;
        best_rx = rx_choice;
      }
    }

    sel.tx_per_group[group.group_id] = tx_codebook.entries[best_tx];
    for (std::size_t ui = 0; ui < tables.size(); ++ui)
      sel.rx_per_user[tables[ui].user_id] = rx_codebook.entries[best_rx[ui]];
  }
  return sel;
}

} // namespace thzsim
