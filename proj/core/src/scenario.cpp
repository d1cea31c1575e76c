// SPDX-License-Identifier: Apache-2.0
//
// thzsim - link-level simulator for indoor THz downlinks with one-bit DACs
// Copyright (C) 2026 the thzsim authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0

#include "thzsim/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <set>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace thzsim {

namespace {

using nlohmann::json;

constexpr double kPi = std::numbers::pi;

[[noreturn]] void fail(const std::string& msg) { throw std::invalid_argument(msg); }

// --- JSON helpers with field-path error messages ---------------------------

[[noreturn]] void bad_field(const std::string& path, const std::string& what) {
  fail(path + ": " + what);
}

void require_keys(const json& obj, const std::string& path,
                  const std::set<std::string>& allowed) {
  if (!obj.is_object())
    bad_field(path, "expected an object");
  for (const auto& item : obj.items())
    if (!allowed.count(item.key()))
      bad_field(path + "." + item.key(), "unknown field");
}

double get_number(const json& obj, const std::string& path, const char* key, double fallback) {
  if (!obj.contains(key))
    return fallback;
  const json& v = obj.at(key);
  if (!v.is_number())
    bad_field(path + "." + key, "expected a number");
  return v.get<double>();
}

int get_int(const json& obj, const std::string& path, const char* key, int fallback) {
  if (!obj.contains(key))
    return fallback;
  const json& v = obj.at(key);
  if (!v.is_number_integer())
    bad_field(path + "." + key, "expected an integer");
  return v.get<int>();
}

std::string get_string(const json& obj, const std::string& path, const char* key,
                       const std::string& fallback) {
  if (!obj.contains(key))
    return fallback;
  const json& v = obj.at(key);
  if (!v.is_string())
    bad_field(path + "." + key, "expected a string");
  return v.get<std::string>();
}

std::pair<double, double> get_range(const json& v, const std::string& path) {
  if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number())
    bad_field(path, "expected [low, high]");
  return {v[0].get<double>(), v[1].get<double>()};
}

} // namespace

void ScenarioConfig::validate() {
  if (!(bandwidth_hz > 0.0))
    fail("bandwidth_hz: must be positive");
  if (trials < 1)
    fail("trials: must be >= 1");
  if (users.empty())
    fail("users: at least one user is required");
  if (power_grid_dbm.empty())
    fail("power_grid_dbm: must not be empty");
  if (total_subarrays < 1)
    fail("subarrays.total: must be >= 1");
  if (tx_rows < 1 || tx_cols < 1 || rx_rows < 1 || rx_cols < 1)
    fail("arrays: element counts must be >= 1");
  if (phase_errors.eps_t_rad < 0.0 || phase_errors.eps_r_rad < 0.0)
    fail("phase_errors: epsilon must be >= 0");
  if (spacing.mode == SpacingMode::FixedPhysical && !(spacing.value_m > 0.0))
    fail("arrays.spacing.value_m: must be positive in fixed mode");
  if (nlos.order1_count < 0 || nlos.order2_count < 0)
    fail("nlos: ray counts must be >= 0");

  std::sort(users.begin(), users.end(),
            [](const UserConfig& a, const UserConfig& b) { return a.id < b.id; });
  for (std::size_t i = 1; i < users.size(); ++i)
    if (users[i].id == users[i - 1].id)
      fail("users: duplicate id " + std::to_string(users[i].id));

  for (std::size_t i = 0; i < users.size(); ++i) {
    UserConfig& u = users[i];
    const std::string path = "users[" + std::to_string(i) + "]";
    if (!(u.distance_m > 0.0))
      fail(path + ".distance_m: must be positive");
    if (u.windows_hz.empty())
      fail(path + ".windows_hz: at least one window is required");
    std::sort(u.windows_hz.begin(), u.windows_hz.end());
    for (std::size_t w = 0; w < u.windows_hz.size(); ++w) {
      const auto& win = u.windows_hz[w];
      if (!(win.first > 0.0) || !(win.second > win.first))
        fail(path + ".windows_hz[" + std::to_string(w) + "]: need 0 < low < high");
      if (w > 0 && win.first < u.windows_hz[w - 1].second)
        fail(path + ".windows_hz: windows overlap");
    }
    if (!group_allocation.count(u.group_id) || group_allocation.at(u.group_id) < 1)
      fail(path + ".group: group " + std::to_string(u.group_id) +
           " has no allocated subarrays");
  }

  // Users of one group must occupy disjoint spectrum; they share the same
  // subarrays, so a shared bin would double-book them.
  for (std::size_t i = 0; i < users.size(); ++i)
    for (std::size_t j = i + 1; j < users.size(); ++j) {
      if (users[i].group_id != users[j].group_id)
        continue;
      for (const auto& a : users[i].windows_hz)
        for (const auto& b : users[j].windows_hz)
          if (a.first < b.second && b.first < a.second)
            fail("users: same-group users " + std::to_string(users[i].id) + " and " +
                 std::to_string(users[j].id) + " have overlapping windows");
    }

  int allocated = 0;
  for (const auto& [group, count] : group_allocation) {
    if (count < 1)
      fail("subarrays.allocation: group " + std::to_string(group) + " must get >= 1 subarray");
    allocated += count;
  }
  if (allocated > total_subarrays)
    fail("subarrays.allocation: total allocation exceeds the subarray count");

  for (const auto& [group, count] : group_allocation) {
    (void)count;
    bool used = false;
    int lowest = 0;
    bool have_lowest = false;
    for (const UserConfig& u : users)
      if (u.group_id == group) {
        used = true;
        if (!have_lowest) {
          lowest = u.id;
          have_lowest = true;
        }
      }
    if (!used)
      fail("subarrays.allocation: group " + std::to_string(group) + " has no users");
    auto it = group_reference_user.find(group);
    if (it == group_reference_user.end()) {
      group_reference_user[group] = lowest;
    } else {
      const UserConfig& ref = user(it->second);
      if (ref.group_id != group)
        fail("subarrays.reference_users: user " + std::to_string(it->second) +
             " is not in group " + std::to_string(group));
    }
  }
}

double ScenarioConfig::noise_w() const { return dbm_to_watts(noise_dbm); }
double ScenarioConfig::omega_t_amplitude() const { return dbi_to_amplitude(omega_t_dbi); }
double ScenarioConfig::omega_r_amplitude() const { return dbi_to_amplitude(omega_r_dbi); }

double ScenarioConfig::reference_frequency_hz() const {
  if (spacing.reference_frequency_hz > 0.0)
    return spacing.reference_frequency_hz;
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  for (const UserConfig& u : users)
    for (const auto& w : u.windows_hz) {
      lo = std::min(lo, w.first);
      hi = std::max(hi, w.second);
    }
  return 0.5 * (lo + hi);
}

namespace {
ArrayGeometry make_geometry(int rows, int cols, double frequency_hz, const SpacingPolicy& policy,
                            double reference_hz) {
  ArrayGeometry g;
  g.rows = rows;
  g.cols = cols;
  g.wavelength_m = kSpeedOfLight / frequency_hz;
  switch (policy.mode) {
  case SpacingMode::HalfWavelengthAtReference:
    g.spacing_m = 0.5 * kSpeedOfLight / reference_hz;
    break;
  case SpacingMode::FixedPhysical:
    g.spacing_m = policy.value_m;
    break;
  case SpacingMode::HalfWavelengthPerSubcarrier:
    g.spacing_m = 0.5 * g.wavelength_m;
    break;
  }
  g.validate();
  return g;
}
} // namespace

ArrayGeometry ScenarioConfig::tx_geometry(double frequency_hz) const {
  return make_geometry(tx_rows, tx_cols, frequency_hz, spacing, reference_frequency_hz());
}

ArrayGeometry ScenarioConfig::rx_geometry(double frequency_hz) const {
  return make_geometry(rx_rows, rx_cols, frequency_hz, spacing, reference_frequency_hz());
}

std::vector<GroupSpec> ScenarioConfig::groups() const {
  std::map<int, GroupSpec> by_id;
  for (const UserConfig& u : users) {
    GroupSpec& g = by_id[u.group_id];
    g.group_id = u.group_id;
    g.user_ids.push_back(u.id);
  }
  std::vector<GroupSpec> out;
  for (auto& [gid, g] : by_id) {
    g.reference_user_id = group_reference_user.count(gid) ? group_reference_user.at(gid)
                                                          : g.user_ids.front();
    out.push_back(g);
  }
  return out;
}

std::map<int, std::vector<int>> ScenarioConfig::subarray_ids_by_group() const {
  std::map<int, std::vector<int>> out;
  int next = 0;
  for (const auto& [group, count] : group_allocation) {
    std::vector<int>& ids = out[group];
    for (int i = 0; i < count; ++i)
      ids.push_back(next++);
  }
  return out;
}

const UserConfig& ScenarioConfig::user(int id) const {
  for (const UserConfig& u : users)
    if (u.id == id)
      return u;
  fail("unknown user id " + std::to_string(id));
}

AbsorptionModel ScenarioConfig::absorption() const {
  if (absorption_file.empty())
    return AbsorptionModel{};
  return load_absorption_spectrum_file(absorption_file);
}

ScenarioConfig default_scenario() {
  ScenarioConfig cfg;
  for (double p = -20.0; p <= 40.0 + 1e-9; p += 5.0)
    cfg.power_grid_dbm.push_back(p);
  cfg.group_allocation = {{1, 5}, {2, 3}};

  UserConfig u1;
  u1.id = 1;
  u1.distance_m = 10.0;
  u1.group_id = 1;
  u1.windows_hz = {{0.6e12, 0.7e12}, {0.8e12, 0.95e12}};
  UserConfig u2;
  u2.id = 2;
  u2.distance_m = 5.0;
  u2.group_id = 2;
  u2.windows_hz = {{0.6e12, 0.725e12}, {0.8e12, 0.925e12}};
  UserConfig u3;
  u3.id = 3;
  u3.distance_m = 1.0;
  u3.group_id = 1;
  u3.windows_hz = {{0.5e12, 0.6e12}, {0.7e12, 0.8e12}, {0.95e12, 1.0e12}};
  cfg.users = {u1, u2, u3};
  cfg.validate();
  return cfg;
}

namespace {

PrecoderKind parse_precoder(const std::string& s, const std::string& path) {
  if (s == "mrt")
    return PrecoderKind::Mrt;
  if (s == "zf")
    return PrecoderKind::Zf;
  bad_field(path, "expected \"mrt\" or \"zf\"");
}

BeamMode parse_beam_mode(const std::string& s, const std::string& path) {
  if (s == "codebook")
    return BeamMode::Codebook;
  if (s == "los")
    return BeamMode::Los;
  bad_field(path, "expected \"codebook\" or \"los\"");
}

} // namespace

ScenarioConfig parse_scenario(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    fail(std::string("scenario: invalid JSON: ") + e.what());
  }
  require_keys(doc, "scenario",
               {"seed", "trials", "bandwidth_hz", "noise_dbm", "gains_dbi", "power_grid_dbm",
                "power_dbm", "precoder", "beam_mode", "subarrays", "arrays", "users", "nlos",
                "codebook", "phase_errors", "absorption_file"});

  ScenarioConfig cfg = default_scenario();
  cfg.group_reference_user.clear(); // re-derived after overrides

  if (doc.contains("seed")) {
    if (!doc["seed"].is_number_unsigned() && !doc["seed"].is_number_integer())
      bad_field("scenario.seed", "expected a non-negative integer");
    cfg.seed = doc["seed"].get<std::uint64_t>();
  }
  cfg.trials = get_int(doc, "scenario", "trials", cfg.trials);
  cfg.bandwidth_hz = get_number(doc, "scenario", "bandwidth_hz", cfg.bandwidth_hz);
  cfg.noise_dbm = get_number(doc, "scenario", "noise_dbm", cfg.noise_dbm);
  cfg.power_dbm = get_number(doc, "scenario", "power_dbm", cfg.power_dbm);
  cfg.precoder = parse_precoder(get_string(doc, "scenario", "precoder", "mrt"),
                                "scenario.precoder");
  cfg.beam_mode = parse_beam_mode(get_string(doc, "scenario", "beam_mode", "los"),
                                  "scenario.beam_mode");
  cfg.absorption_file = get_string(doc, "scenario", "absorption_file", "");

  if (doc.contains("gains_dbi")) {
    const json& g = doc["gains_dbi"];
    require_keys(g, "scenario.gains_dbi", {"tx", "rx"});
    cfg.omega_t_dbi = get_number(g, "scenario.gains_dbi", "tx", cfg.omega_t_dbi);
    cfg.omega_r_dbi = get_number(g, "scenario.gains_dbi", "rx", cfg.omega_r_dbi);
  }

  if (doc.contains("power_grid_dbm")) {
    const json& grid = doc["power_grid_dbm"];
    if (!grid.is_array() || grid.empty())
      bad_field("scenario.power_grid_dbm", "expected a non-empty array");
    cfg.power_grid_dbm.clear();
    for (std::size_t i = 0; i < grid.size(); ++i) {
      if (!grid[i].is_number())
        bad_field("scenario.power_grid_dbm[" + std::to_string(i) + "]", "expected a number");
      cfg.power_grid_dbm.push_back(grid[i].get<double>());
    }
  }

  if (doc.contains("subarrays")) {
    const json& s = doc["subarrays"];
    require_keys(s, "scenario.subarrays", {"total", "allocation", "reference_users"});
    cfg.total_subarrays = get_int(s, "scenario.subarrays", "total", cfg.total_subarrays);
    if (s.contains("allocation")) {
      if (!s["allocation"].is_object())
        bad_field("scenario.subarrays.allocation", "expected an object {group: count}");
      cfg.group_allocation.clear();
      for (const auto& item : s["allocation"].items()) {
        if (!item.value().is_number_integer())
          bad_field("scenario.subarrays.allocation." + item.key(), "expected an integer");
        cfg.group_allocation[std::stoi(item.key())] = item.value().get<int>();
      }
    }
    if (s.contains("reference_users")) {
      if (!s["reference_users"].is_object())
        bad_field("scenario.subarrays.reference_users", "expected an object {group: user}");
      for (const auto& item : s["reference_users"].items()) {
        if (!item.value().is_number_integer())
          bad_field("scenario.subarrays.reference_users." + item.key(), "expected an integer");
        cfg.group_reference_user[std::stoi(item.key())] = item.value().get<int>();
      }
    }
  }

  if (doc.contains("arrays")) {
    const json& a = doc["arrays"];
    require_keys(a, "scenario.arrays",
                 {"tx_rows", "tx_cols", "rx_rows", "rx_cols", "spacing"});
    cfg.tx_rows = get_int(a, "scenario.arrays", "tx_rows", cfg.tx_rows);
    cfg.tx_cols = get_int(a, "scenario.arrays", "tx_cols", cfg.tx_cols);
    cfg.rx_rows = get_int(a, "scenario.arrays", "rx_rows", cfg.rx_rows);
    cfg.rx_cols = get_int(a, "scenario.arrays", "rx_cols", cfg.rx_cols);
    if (a.contains("spacing")) {
      const json& sp = a["spacing"];
      require_keys(sp, "scenario.arrays.spacing",
                   {"mode", "reference_frequency_hz", "value_m"});
      const std::string mode =
          get_string(sp, "scenario.arrays.spacing", "mode", "half_wavelength_at_reference");
      if (mode == "half_wavelength_at_reference")
        cfg.spacing.mode = SpacingMode::HalfWavelengthAtReference;
      else if (mode == "fixed")
        cfg.spacing.mode = SpacingMode::FixedPhysical;
      else if (mode == "half_wavelength_per_subcarrier")
        cfg.spacing.mode = SpacingMode::HalfWavelengthPerSubcarrier;
      else
        bad_field("scenario.arrays.spacing.mode", "unknown spacing mode '" + mode + "'");
      cfg.spacing.reference_frequency_hz =
          get_number(sp, "scenario.arrays.spacing", "reference_frequency_hz", 0.0);
      cfg.spacing.value_m = get_number(sp, "scenario.arrays.spacing", "value_m", 0.0);
    }
  }

  if (doc.contains("users")) {
    const json& us = doc["users"];
    if (!us.is_array() || us.empty())
      bad_field("scenario.users", "expected a non-empty array");
    cfg.users.clear();
    for (std::size_t i = 0; i < us.size(); ++i) {
      const std::string path = "scenario.users[" + std::to_string(i) + "]";
      const json& uj = us[i];
      require_keys(uj, path, {"id", "distance_m", "group", "windows_hz", "los_angles"});
      UserConfig u;
      u.id = get_int(uj, path, "id", static_cast<int>(i) + 1);
      u.distance_m = get_number(uj, path, "distance_m", 0.0);
      u.group_id = get_int(uj, path, "group", 1);
      if (!uj.contains("windows_hz") || !uj["windows_hz"].is_array())
        bad_field(path + ".windows_hz", "expected an array of [low, high] pairs");
      for (std::size_t w = 0; w < uj["windows_hz"].size(); ++w)
        u.windows_hz.push_back(
            get_range(uj["windows_hz"][w], path + ".windows_hz[" + std::to_string(w) + "]"));
      if (uj.contains("los_angles")) {
        const json& la = uj["los_angles"];
        const std::string lp = path + ".los_angles";
        require_keys(la, lp, {"aod_azimuth", "aod_elevation", "aoa_azimuth", "aoa_elevation"});
        RaySpec::LosAngles angles;
        angles.aod_azimuth = get_number(la, lp, "aod_azimuth", 0.0);
        angles.aod_elevation = get_number(la, lp, "aod_elevation", 0.0);
        angles.aoa_azimuth = get_number(la, lp, "aoa_azimuth", 0.0);
        angles.aoa_elevation = get_number(la, lp, "aoa_elevation", 0.0);
        u.los_angles = angles;
      }
      cfg.users.push_back(u);
    }
  }

  if (doc.contains("nlos")) {
    const json& n = doc["nlos"];
    require_keys(n, "scenario.nlos",
                 {"order1_count", "order2_count", "order1_loss_db", "order2_loss_db",
                  "azimuth_range", "elevation_range", "los_phase"});
    cfg.nlos.order1_count = get_int(n, "scenario.nlos", "order1_count", cfg.nlos.order1_count);
    cfg.nlos.order2_count = get_int(n, "scenario.nlos", "order2_count", cfg.nlos.order2_count);
    cfg.nlos.order1_loss_db =
        get_number(n, "scenario.nlos", "order1_loss_db", cfg.nlos.order1_loss_db);
    cfg.nlos.order2_loss_db =
        get_number(n, "scenario.nlos", "order2_loss_db", cfg.nlos.order2_loss_db);
    if (n.contains("azimuth_range"))
      std::tie(cfg.nlos.azimuth_min, cfg.nlos.azimuth_max) =
          get_range(n["azimuth_range"], "scenario.nlos.azimuth_range");
    if (n.contains("elevation_range"))
      std::tie(cfg.nlos.elevation_min, cfg.nlos.elevation_max) =
          get_range(n["elevation_range"], "scenario.nlos.elevation_range");
    const std::string phase = get_string(n, "scenario.nlos", "los_phase", "iid");
    if (phase == "iid")
      cfg.nlos.los_phase = LosPhaseMode::Iid;
    else if (phase == "aligned")
      cfg.nlos.los_phase = LosPhaseMode::Aligned;
    else
      bad_field("scenario.nlos.los_phase", "expected \"iid\" or \"aligned\"");
  }

  if (doc.contains("codebook")) {
    const json& c = doc["codebook"];
    require_keys(c, "scenario.codebook", {"separation_rad", "azimuth_range", "elevation_range"});
    cfg.codebook.separation_rad =
        get_number(c, "scenario.codebook", "separation_rad", cfg.codebook.separation_rad);
    if (c.contains("azimuth_range"))
      std::tie(cfg.codebook.azimuth_min, cfg.codebook.azimuth_max) =
          get_range(c["azimuth_range"], "scenario.codebook.azimuth_range");
    if (c.contains("elevation_range"))
      std::tie(cfg.codebook.elevation_min, cfg.codebook.elevation_max) =
          get_range(c["elevation_range"], "scenario.codebook.elevation_range");
  }

  if (doc.contains("phase_errors")) {
    const json& p = doc["phase_errors"];
    require_keys(p, "scenario.phase_errors", {"enabled", "eps_t_rad", "eps_r_rad"});
    if (p.contains("enabled")) {
      if (!p["enabled"].is_boolean())
        bad_field("scenario.phase_errors.enabled", "expected a boolean");
      cfg.phase_errors.enabled = p["enabled"].get<bool>();
    }
    cfg.phase_errors.eps_t_rad =
        get_number(p, "scenario.phase_errors", "eps_t_rad", cfg.phase_errors.eps_t_rad);
    cfg.phase_errors.eps_r_rad =
        get_number(p, "scenario.phase_errors", "eps_r_rad", cfg.phase_errors.eps_r_rad);
  }

  cfg.validate();
  return cfg;
}

ScenarioConfig parse_scenario_file(const std::string& path) {
  std::ifstream in(path);
  if (!in)
    fail("scenario: cannot open '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_scenario(buffer.str());
}

SubcarrierAllocation allocate_subcarriers(const ScenarioConfig& config) {
  SubcarrierAllocation alloc;
  const double b = config.bandwidth_hz;

  std::map<double, std::set<int>> users_by_center;
  for (const UserConfig& u : config.users) {
    for (const auto& window : u.windows_hz) {
      const double width = window.second - window.first;
      const int count = static_cast<int>(std::floor(width / b + 1e-9));
      if (count == 0) {
        std::ostringstream os;
        os << "user " << u.id << ": window [" << window.first << ", " << window.second
           << "] Hz is narrower than the subcarrier bandwidth; no subcarriers allocated";
        alloc.warnings.push_back(os.str());
        continue;
      }
      for (int i = 0; i < count; ++i) {
        const double center = window.first + b / 2.0 + static_cast<double>(i) * b;
        users_by_center[center].insert(u.id);
      }
    }
  }
  if (users_by_center.empty())
    fail("subcarrier allocation: no subcarriers (all windows narrower than the bandwidth)");

  // Bins are shared only on exact center identity; near misses come from
  // windows whose edges are not aligned to the grid of another user.
  double previous = -1.0;
  for (const auto& [center, ids] : users_by_center) {
    if (previous > 0.0 && center - previous < b * (1.0 - 1e-12)) {
      std::ostringstream os;
      os << "misaligned windows: subcarriers at " << previous << " Hz and " << center
         << " Hz overlap but occupy disjoint bins";
      alloc.warnings.push_back(os.str());
    }
    previous = center;

    SubcarrierInfo info;
    info.frequency_hz = center;
    info.user_ids.assign(ids.begin(), ids.end());
    std::set<int> groups;
    for (int uid : info.user_ids)
      groups.insert(config.user(uid).group_id);
    for (int g : groups)
      info.k_total += config.group_allocation.at(g);
    alloc.subcarriers.push_back(info);
  }

  for (std::size_t w = 0; w < alloc.subcarriers.size(); ++w)
    for (int uid : alloc.subcarriers[w].user_ids)
      alloc.per_user[uid].push_back(w);
  return alloc;
}

} // namespace thzsim
