#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "isac4d/array_geometry.hpp"
#include "isac4d/common.hpp"
#include "isac4d/errors.hpp"
#include "isac4d/fusion.hpp"
#include "isac4d/nr_grid.hpp"
#include "isac4d/range_doppler.hpp"
#include "isac4d/scene_channel.hpp"

namespace isac4d {

using json = nlohmann::json;

/// One scene scatterer in the global frame. An empty visible_to list means
/// "seen by every BS".
struct SceneScattererSpec {
  Eigen::Vector3d position = Eigen::Vector3d::Zero();
  Eigen::Vector3d velocity = Eigen::Vector3d::Zero();
  double gain_db = 0;
  bool has_phase = false;
  double phase_deg = 0;  // fixed phase; otherwise random per trial
  std::vector<int> visible_to;
};

struct PrimitiveSpec {
  Primitive primitive;
  double density = 100;
  std::vector<int> visible_to;
};

struct BsSpec {
  Eigen::Vector3d position = Eigen::Vector3d::Zero();
  double yaw_deg = 0, pitch_deg = 0, roll_deg = 0;
};

struct AngleGridSpec {
  double theta_min_deg = -60, theta_max_deg = 60;
  double phi_min_deg = -30, phi_max_deg = 30;
  double coarse_step_deg = 5;
  double fine_step_deg = 0.5;
  double zoom_halfwidth_deg = 5;
  std::string full_grid = "coarse";  // dictionary for the full-OMP solver
  int n_target = 1;
};

struct ScenarioConfig {
  int mu = 2;
  CpMode cp_mode = CpMode::normal;
  int n_rb = 64;
  int n_subframes = 1;
  double carrier_hz = 26e9;

  int p = 4, q = 4;
  double d_over_lambda = 0.5;
  double boresight_theta_deg = 0, boresight_phi_deg = 0;

  std::vector<SceneScattererSpec> scatterers;
  std::vector<PrimitiveSpec> primitives;
  std::vector<BsSpec> bs;

  int n_r = 0;  // 0 = smallest power of two >= 2K
  int n_d = 0;  // 0 = smallest power of two >= 2L
  std::string window = "none";  // "none" or "hann" taper before the RDM
  CfarConfig cfar;
  std::vector<std::string> solvers{"zoom"};
  AngleGridSpec angles;

  double match_radius_m = 0;  // 0 = range-bin size
  std::vector<double> snr_db_list{10.0};
  int trials = 1;
  std::uint64_t seed = 1;
};

namespace detail {

inline Eigen::Vector3d vec3_from(const json& j, const std::string& path) {
  if (!j.is_array() || j.size() != 3) {
    throw ConfigError(path + ": expected an array of 3 numbers");
  }
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

template <typename T>
T get_or(const json& j, const char* key, T fallback, const std::string& path) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(path + "." + key + ": " + e.what());
  }
}

}  // namespace detail

inline ScenarioConfig config_from_json(const json& j) {
  using detail::get_or;
  using detail::vec3_from;
  ScenarioConfig c;
  if (j.contains("numerology")) {
    const json& n = j.at("numerology");
    c.mu = get_or(n, "mu", c.mu, "numerology");
    const std::string cp = get_or<std::string>(n, "cp_mode", "normal",
                                               "numerology");
    if (cp == "normal") {
      c.cp_mode = CpMode::normal;
    } else if (cp == "extended") {
      c.cp_mode = CpMode::extended;
    } else {
      throw ConfigError("numerology.cp_mode: must be 'normal' or 'extended'");
    }
  }
  if (j.contains("grid")) {
    const json& g = j.at("grid");
    c.n_rb = get_or(g, "n_rb", c.n_rb, "grid");
    c.n_subframes = get_or(g, "n_subframes", c.n_subframes, "grid");
    c.carrier_hz = get_or(g, "carrier_hz", c.carrier_hz, "grid");
  }
  if (j.contains("array")) {
    const json& a = j.at("array");
    c.p = get_or(a, "p", c.p, "array");
    c.q = get_or(a, "q", c.q, "array");
    c.d_over_lambda = get_or(a, "d_over_lambda", c.d_over_lambda, "array");
    if (a.contains("boresight_deg")) {
      const json& b = a.at("boresight_deg");
      if (!b.is_array() || b.size() != 2) {
        throw ConfigError("array.boresight_deg: expected [theta, phi]");
      }
      c.boresight_theta_deg = b[0].get<double>();
      c.boresight_phi_deg = b[1].get<double>();
    }
  }
  if (j.contains("scene")) {
    const json& s = j.at("scene");
    std::size_t i = 0;
    for (const json& sc : get_or(s, "scatterers", json::array(), "scene")) {
      const std::string path = "scene.scatterers[" + std::to_string(i++) + "]";
      SceneScattererSpec spec;
      if (!sc.contains("position")) {
        throw ConfigError(path + ".position: required");
      }
      spec.position = vec3_from(sc.at("position"), path + ".position");
      if (sc.contains("velocity")) {
        spec.velocity = vec3_from(sc.at("velocity"), path + ".velocity");
      }
      spec.gain_db = get_or(sc, "gain_db", 0.0, path);
      if (sc.contains("phase_deg")) {
        spec.has_phase = true;
        spec.phase_deg = sc.at("phase_deg").get<double>();
      }
      spec.visible_to =
          get_or(sc, "visible_to", std::vector<int>{}, path);
      c.scatterers.push_back(spec);
    }
    i = 0;
    for (const json& pr : get_or(s, "primitives", json::array(), "scene")) {
      const std::string path = "scene.primitives[" + std::to_string(i++) + "]";
      PrimitiveSpec spec;
      const std::string kind = get_or<std::string>(pr, "type", "rectangle",
                                                   path);
      if (kind == "rectangle") {
        spec.primitive.kind = Primitive::Kind::rectangle;
      } else if (kind == "box") {
        spec.primitive.kind = Primitive::Kind::box;
      } else {
        throw ConfigError(path + ".type: must be 'rectangle' or 'box'");
      }
      if (pr.contains("center")) {
        spec.primitive.center = vec3_from(pr.at("center"), path + ".center");
      }
      if (pr.contains("size")) {
        spec.primitive.size = vec3_from(pr.at("size"), path + ".size");
      }
      if (pr.contains("yaw_pitch_roll_deg")) {
        const Eigen::Vector3d ypr =
            vec3_from(pr.at("yaw_pitch_roll_deg"), path + ".yaw_pitch_roll_deg");
        spec.primitive.rotation =
            make_pose(ypr.x(), ypr.y(), ypr.z(), Eigen::Vector3d::Zero(), 0)
                .rotation;
      }
      spec.density = get_or(pr, "density", spec.density, path);
      if (!(spec.density > 0)) {
        throw ConfigError(path + ".density: must be > 0");
      }
      spec.visible_to = get_or(pr, "visible_to", std::vector<int>{}, path);
      c.primitives.push_back(spec);
    }
  }
  if (j.contains("bs")) {
    std::size_t i = 0;
    for (const json& b : j.at("bs")) {
      const std::string path = "bs[" + std::to_string(i++) + "]";
      BsSpec spec;
      if (!b.contains("position")) {
        throw ConfigError(path + ".position: required");
      }
      spec.position = vec3_from(b.at("position"), path + ".position");
      if (b.contains("yaw_pitch_roll_deg")) {
        const Eigen::Vector3d ypr =
            vec3_from(b.at("yaw_pitch_roll_deg"), path + ".yaw_pitch_roll_deg");
        spec.yaw_deg = ypr.x();
        spec.pitch_deg = ypr.y();
        spec.roll_deg = ypr.z();
      }
      c.bs.push_back(spec);
    }
  }
  if (j.contains("processing")) {
    const json& p = j.at("processing");
    c.n_r = get_or(p, "n_r", c.n_r, "processing");
    c.n_d = get_or(p, "n_d", c.n_d, "processing");
    c.window = get_or<std::string>(p, "window", c.window, "processing");
    if (p.contains("cfar")) {
      const json& f = p.at("cfar");
      if (f.contains("guard")) {
        c.cfar.guard_range = f.at("guard")[0].get<int>();
        c.cfar.guard_doppler = f.at("guard")[1].get<int>();
      }
      if (f.contains("training")) {
        c.cfar.train_range = f.at("training")[0].get<int>();
        c.cfar.train_doppler = f.at("training")[1].get<int>();
      }
      c.cfar.os_rank_fraction = get_or(f, "os_rank_fraction",
                                       c.cfar.os_rank_fraction,
                                       "processing.cfar");
      c.cfar.scale_factor = get_or(f, "scale_factor", c.cfar.scale_factor,
                                   "processing.cfar");
      c.cfar.design_pfa = get_or(f, "design_pfa", c.cfar.design_pfa,
                                 "processing.cfar");
      c.cfar.min_peak_separation = get_or(f, "min_peak_separation",
                                          c.cfar.min_peak_separation,
                                          "processing.cfar");
    }
    c.solvers = get_or(p, "solvers", c.solvers, "processing");
    if (p.contains("angles")) {
      const json& a = p.at("angles");
      if (a.contains("theta_deg")) {
        c.angles.theta_min_deg = a.at("theta_deg")[0].get<double>();
        c.angles.theta_max_deg = a.at("theta_deg")[1].get<double>();
      }
      if (a.contains("phi_deg")) {
        c.angles.phi_min_deg = a.at("phi_deg")[0].get<double>();
        c.angles.phi_max_deg = a.at("phi_deg")[1].get<double>();
      }
      c.angles.coarse_step_deg = get_or(a, "coarse_step_deg",
                                        c.angles.coarse_step_deg,
                                        "processing.angles");
      c.angles.fine_step_deg = get_or(a, "fine_step_deg",
                                      c.angles.fine_step_deg,
                                      "processing.angles");
      c.angles.zoom_halfwidth_deg = get_or(a, "zoom_halfwidth_deg",
                                           c.angles.zoom_halfwidth_deg,
                                           "processing.angles");
      c.angles.full_grid = get_or<std::string>(a, "full_grid",
                                               c.angles.full_grid,
                                               "processing.angles");
      c.angles.n_target = get_or(a, "n_target", c.angles.n_target,
                                 "processing.angles");
    }
  }
  if (j.contains("evaluation")) {
    const json& e = j.at("evaluation");
    c.match_radius_m = get_or(e, "match_radius_m", c.match_radius_m,
                              "evaluation");
    c.snr_db_list = get_or(e, "snr_db_list", c.snr_db_list, "evaluation");
    c.trials = get_or(e, "trials", c.trials, "evaluation");
    c.seed = get_or<std::uint64_t>(e, "seed", c.seed, "evaluation");
  }
  return c;
}

inline void validate(const ScenarioConfig& c) {
  if (c.mu < 0 || c.mu > 6) throw ConfigError("numerology.mu: must be in [0,6]");
  if (c.n_rb < 1) throw ConfigError("grid.n_rb: must be >= 1");
  if (c.n_subframes < 1) throw ConfigError("grid.n_subframes: must be >= 1");
  if (!(c.carrier_hz > 0)) throw ConfigError("grid.carrier_hz: must be > 0");
  if (c.p < 1 || c.q < 1) throw ConfigError("array.p/q: must be >= 1");
  if (!(c.d_over_lambda > 0)) {
    throw ConfigError("array.d_over_lambda: must be > 0");
  }
  if (c.bs.empty()) throw ConfigError("bs: at least one BS is required");
  if (c.solvers.empty()) {
    throw ConfigError("processing.solvers: at least one solver");
  }
  for (const std::string& s : c.solvers) {
    if (s != "zoom" && s != "full") {
      throw ConfigError("processing.solvers: unknown solver '" + s + "'");
    }
  }
  if (c.window != "none" && c.window != "hann") {
    throw ConfigError("processing.window: must be 'none' or 'hann'");
  }
  if (c.angles.full_grid != "coarse" && c.angles.full_grid != "fine") {
    throw ConfigError("processing.angles.full_grid: must be 'coarse' or 'fine'");
  }
  if (c.angles.n_target < 1) {
    throw ConfigError("processing.angles.n_target: must be >= 1");
  }
  if (c.trials < 1) throw ConfigError("evaluation.trials: must be >= 1");
  if (c.snr_db_list.empty()) {
    throw ConfigError("evaluation.snr_db_list: must be non-empty");
  }
  for (const auto& spec : c.scatterers) {
    for (int b : spec.visible_to) {
      if (b < 0 || b >= static_cast<int>(c.bs.size())) {
        throw ConfigError("scene.scatterers[].visible_to: BS index " +
                          std::to_string(b) + " out of range");
      }
    }
  }
}

/// Canonical JSON form of a config; nlohmann::json orders keys
/// lexicographically, so the dump is stable.
inline json config_to_json(const ScenarioConfig& c) {
  json j;
  j["numerology"] = {{"mu", c.mu},
                     {"cp_mode",
                      c.cp_mode == CpMode::normal ? "normal" : "extended"}};
  j["grid"] = {{"n_rb", c.n_rb},
               {"n_subframes", c.n_subframes},
               {"carrier_hz", c.carrier_hz}};
  j["array"] = {{"p", c.p},
                {"q", c.q},
                {"d_over_lambda", c.d_over_lambda},
                {"boresight_deg",
                 {c.boresight_theta_deg, c.boresight_phi_deg}}};
  json scat = json::array();
  for (const auto& s : c.scatterers) {
    json e = {{"position", {s.position.x(), s.position.y(), s.position.z()}},
              {"velocity", {s.velocity.x(), s.velocity.y(), s.velocity.z()}},
              {"gain_db", s.gain_db}};
    if (s.has_phase) e["phase_deg"] = s.phase_deg;
    if (!s.visible_to.empty()) e["visible_to"] = s.visible_to;
    scat.push_back(e);
  }
  json prim = json::array();
  for (const auto& p : c.primitives) {
    Eigen::Vector3d ypr =
        p.primitive.rotation.eulerAngles(2, 1, 0) * 180.0 / kPi;
    prim.push_back(
        {{"type",
          p.primitive.kind == Primitive::Kind::rectangle ? "rectangle"
                                                         : "box"},
         {"center",
          {p.primitive.center.x(), p.primitive.center.y(),
           p.primitive.center.z()}},
         {"size",
          {p.primitive.size.x(), p.primitive.size.y(), p.primitive.size.z()}},
         {"yaw_pitch_roll_deg", {ypr.x(), ypr.y(), ypr.z()}},
         {"density", p.density}});
  }
  j["scene"] = {{"scatterers", scat}, {"primitives", prim}};
  json bs = json::array();
  for (const auto& b : c.bs) {
    bs.push_back({{"position", {b.position.x(), b.position.y(), b.position.z()}},
                  {"yaw_pitch_roll_deg", {b.yaw_deg, b.pitch_deg, b.roll_deg}}});
  }
  j["bs"] = bs;
  j["processing"] = {
      {"n_r", c.n_r},
      {"n_d", c.n_d},
      {"window", c.window},
      {"cfar",
       {{"guard", {c.cfar.guard_range, c.cfar.guard_doppler}},
        {"training", {c.cfar.train_range, c.cfar.train_doppler}},
        {"os_rank_fraction", c.cfar.os_rank_fraction},
        {"scale_factor", c.cfar.scale_factor},
        {"design_pfa", c.cfar.design_pfa},
        {"min_peak_separation", c.cfar.min_peak_separation}}},
      {"solvers", c.solvers},
      {"angles",
       {{"theta_deg", {c.angles.theta_min_deg, c.angles.theta_max_deg}},
        {"phi_deg", {c.angles.phi_min_deg, c.angles.phi_max_deg}},
        {"coarse_step_deg", c.angles.coarse_step_deg},
        {"fine_step_deg", c.angles.fine_step_deg},
        {"zoom_halfwidth_deg", c.angles.zoom_halfwidth_deg},
        {"full_grid", c.angles.full_grid},
        {"n_target", c.angles.n_target}}}};
  j["evaluation"] = {{"match_radius_m", c.match_radius_m},
                     {"snr_db_list", c.snr_db_list},
                     {"trials", c.trials},
                     {"seed", c.seed}};
  return j;
}

inline std::uint64_t config_hash(const ScenarioConfig& c) {
  const std::string s = config_to_json(c).dump();
  std::uint64_t h = 0xCBF29CE484222325ULL;  // FNV-1a
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 0x100000001B3ULL;
  }
  return h;
}

inline ScenarioConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config file not found: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError("config parse error in " + path + ": " + e.what());
  }
  ScenarioConfig c = config_from_json(j);
  validate(c);
  return c;
}

/// Built-in parameter profiles. "desk" keeps the full pipeline fast enough
/// for CI; "table1" matches the mmWave full-scale setup (memory heavy).
inline ScenarioConfig profile_config(const std::string& name) {
  ScenarioConfig c;
  auto add_demo_scene = [&c]() {
    // The integrated RDM sums the antennas in phase only near the array
    // normal (local zenith), so the precoder boresight and the scene sit
    // at high elevation. The positive-phi sector also sidesteps the +-phi
    // ambiguity of a planar array, and with phi >= 60 every direction
    // cosine stays below 0.5, which keeps the steering dictionary clear of
    // the precoder null offsets entirely.
    c.boresight_phi_deg = 75;
    c.angles.phi_min_deg = 60;
    c.angles.phi_max_deg = 85;
    // Tapered RDM: without it, strong scatterers leak rectangular-window
    // sidelobes well above the CFAR threshold across the whole range axis.
    c.window = "hann";
    // Profile maps have 1e5..1e6 cells; the 1e-4 default would average
    // tens of false alarms per sweep.
    c.cfar.design_pfa = 1e-7;
    // Heights step by ~10 m or more: the tapered 46 MHz desk waveform
    // resolves ranges no finer than ~7 m, so a flat scene would merge into
    // a single range-Doppler blob.
    const double x[6] = {-5.0, -2.0, 0.0, 3.0, 5.0, -4.0};
    const double y[6] = {3.0, -4.0, 0.0, 4.0, -3.0, -1.0};
    const double z[6] = {44.0, 54.0, 65.0, 77.0, 90.0, 104.0};
    for (int i = 0; i < 6; ++i) {
      SceneScattererSpec s;
      s.position = {x[i], y[i], z[i]};
      s.gain_db = -20;  // keeps hann sidelobes below the CFAR threshold
      if (i == 2) s.velocity = {0.0, 0.0, -20.0};
      c.scatterers.push_back(s);
    }
    c.bs = {{{-12, 0, 0}, 0, 0, 0},
            {{12, 0, 0}, 180, 0, 0},
            {{0, -12, 0}, 90, 0, 0},
            {{0, 12, 0}, -90, 0, 0}};
  };
  if (name == "desk") {
    c.mu = 2;
    c.n_rb = 64;
    c.n_subframes = 1;
    c.carrier_hz = 26e9;
    c.p = 4;
    c.q = 4;
    c.n_r = 1024;
    c.n_d = 64;
    add_demo_scene();
  } else if (name == "table1") {
    c.mu = 3;
    c.n_rb = 264;
    c.n_subframes = 2;
    c.carrier_hz = 26e9;
    c.p = 8;
    c.q = 8;
    c.snr_db_list = {10.0};
    add_demo_scene();
  } else {
    throw ConfigError("unknown profile: " + name);
  }
  validate(c);
  return c;
}

}  // namespace isac4d
