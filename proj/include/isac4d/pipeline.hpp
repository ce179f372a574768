#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "isac4d/angle_estimation.hpp"
#include "isac4d/common.hpp"
#include "isac4d/config.hpp"
#include "isac4d/errors.hpp"
#include "isac4d/fusion.hpp"
#include "isac4d/io.hpp"
#include "isac4d/metrics.hpp"
#include "isac4d/nr_grid.hpp"
#include "isac4d/range_doppler.hpp"
#include "isac4d/scene_channel.hpp"

namespace isac4d {

struct MetricRow {
  std::string solver;
  double snr_db = 0;
  int trial = 0;
  bool valid = false;  // false when the detection set was empty
  MetricReport report;
  long correlation_count = 0;
};

struct CloudRecord {
  std::string solver;
  double snr_db = 0;
  int trial = 0;
  PointCloud4D fused;                      // global frame
  std::vector<PointCloud4D> per_bs_local;  // BS-local frames
};

struct RunArtifacts {
  ScenarioConfig cfg;
  std::uint64_t cfg_hash = 0;
  GridDims dims;
  int n_r = 0, n_d = 0;
  double match_radius_m = 0;
  std::vector<Eigen::Vector3d> ground_truth;
  std::vector<BsPose> poses;
  std::vector<CloudRecord> clouds;
  std::vector<MetricRow> metrics;
  std::vector<std::string> warnings;
  std::optional<Eigen::MatrixXd> rdm_dump;  // BS 0, first SNR, first trial
};

namespace detail {

struct SceneEntry {
  Eigen::Vector3d position;
  Eigen::Vector3d velocity;
  double gain_mag = 1;
  bool has_phase = false;
  double phase_rad = 0;
  std::vector<int> visible_to;  // empty = all
};

inline bool visible(const SceneEntry& e, int bs) {
  if (e.visible_to.empty()) return true;
  for (int b : e.visible_to) {
    if (b == bs) return true;
  }
  return false;
}

}  // namespace detail

inline AngleEstimationParams solver_params(const ScenarioConfig& cfg,
                                           const std::string& solver) {
  const AngleGridSpec& a = cfg.angles;
  AngleEstimationParams p;
  p.coarse = make_uniform_grid_deg(a.theta_min_deg, a.theta_max_deg,
                                   a.coarse_step_deg, a.phi_min_deg,
                                   a.phi_max_deg, a.coarse_step_deg);
  p.zoom.fine_step_theta = deg2rad(a.fine_step_deg);
  p.zoom.fine_step_phi = deg2rad(a.fine_step_deg);
  p.zoom.halfwidth_theta = deg2rad(a.zoom_halfwidth_deg);
  p.zoom.halfwidth_phi = deg2rad(a.zoom_halfwidth_deg);
  p.n_target = a.n_target;
  if (solver == "zoom") {
    p.method = AngleSolver::zoom_omp;
  } else {
    p.method = AngleSolver::omp_full;
    p.full_grid = a.full_grid == "fine"
                      ? make_uniform_grid_deg(a.theta_min_deg, a.theta_max_deg,
                                              a.fine_step_deg, a.phi_min_deg,
                                              a.phi_max_deg, a.fine_step_deg)
                      : p.coarse;
  }
  return p;
}

/// Full experiment: per (SNR, trial, BS) simulate, detect and estimate;
/// fuse per solver; score against the ground-truth scene. Deterministic
/// given the config and its master seed.
inline RunArtifacts run_scenario(const ScenarioConfig& cfg,
                                 bool dump_rdm = false) {
  validate(cfg);
  RunArtifacts art;
  art.cfg = cfg;
  art.cfg_hash = config_hash(cfg);

  auto stage = [](const std::string& tag, auto&& fn) {
    try {
      return fn();
    } catch (const Error& e) {
      throw Error("[" + tag + "] " + e.what());
    }
  };

  const Numerology num = make_numerology(cfg.mu, cfg.cp_mode);
  art.dims = stage("grid", [&] {
    return make_grid_dims(num, cfg.n_rb, cfg.n_subframes, cfg.carrier_hz);
  });
  const GridDims& dims = art.dims;
  art.n_r = cfg.n_r > 0 ? cfg.n_r : default_padding(dims.K);
  art.n_d = cfg.n_d > 0 ? cfg.n_d : default_padding(dims.L);
  art.match_radius_m = cfg.match_radius_m > 0
                           ? cfg.match_radius_m
                           : range_bin_size(dims, art.n_r);

  const UpaConfig upa{cfg.p, cfg.q, cfg.d_over_lambda};
  const Eigen::VectorXcd w = matched_precoder(
      upa, {deg2rad(cfg.boresight_theta_deg), deg2rad(cfg.boresight_phi_deg)});

  for (std::size_t j = 0; j < cfg.bs.size(); ++j) {
    const BsSpec& b = cfg.bs[j];
    art.poses.push_back(make_pose(b.yaw_deg, b.pitch_deg, b.roll_deg,
                                  b.position, static_cast<int>(j)));
  }

  // Global scene: explicit scatterers plus deterministic primitive samples.
  std::vector<detail::SceneEntry> entries;
  for (const SceneScattererSpec& s : cfg.scatterers) {
    detail::SceneEntry e;
    e.position = s.position;
    e.velocity = s.velocity;
    e.gain_mag = std::pow(10.0, s.gain_db / 20.0);
    e.has_phase = s.has_phase;
    e.phase_rad = deg2rad(s.phase_deg);
    e.visible_to = s.visible_to;
    entries.push_back(e);
  }
  {
    std::mt19937_64 prim_rng(derive_seed(cfg.seed, 901));
    for (const PrimitiveSpec& p : cfg.primitives) {
      for (const Eigen::Vector3d& pt :
           sample_primitive_surface(p.primitive, p.density, prim_rng)) {
        detail::SceneEntry e;
        e.position = pt;
        e.velocity = Eigen::Vector3d::Zero();
        e.visible_to = p.visible_to;
        entries.push_back(e);
      }
    }
  }
  for (const auto& e : entries) art.ground_truth.push_back(e.position);

  const ResourceGrid tx =
      stage("fill_grid", [&] { return fill_grid(dims, derive_seed(cfg.seed, 777)); });

  std::map<std::string, AngleEstimationParams> params;
  for (const std::string& s : cfg.solvers) params[s] = solver_params(cfg, s);

  for (std::size_t si = 0; si < cfg.snr_db_list.size(); ++si) {
    const double snr = cfg.snr_db_list[si];
    for (int trial = 0; trial < cfg.trials; ++trial) {
      std::map<std::string, CloudRecord> records;
      std::map<std::string, long> corr_counts;
      for (const std::string& s : cfg.solvers) {
        records[s] = {s, snr, trial, {}, {}};
        records[s].per_bs_local.resize(cfg.bs.size());
        corr_counts[s] = 0;
      }
      for (std::size_t bj = 0; bj < cfg.bs.size(); ++bj) {
        const BsPose& pose = art.poses[bj];
        const std::string tag = "bs=" + std::to_string(bj) + " snr=" +
                                format_double(snr) + " trial=" +
                                std::to_string(trial);

        ScatterScene scene;
        std::mt19937_64 phase_rng(derive_seed(cfg.seed, bj, si, trial, 5));
        std::uniform_real_distribution<double> uphase(0.0, 2.0 * kPi);
        for (const detail::SceneEntry& e : entries) {
          const double phase = e.has_phase ? e.phase_rad : uphase(phase_rng);
          if (!detail::visible(e, static_cast<int>(bj))) continue;
          const Eigen::Vector3d p_loc =
              pose.rotation.transpose() * (e.position - pose.translation);
          const Eigen::Vector3d v_loc = pose.rotation.transpose() * e.velocity;
          scene.scatterers.push_back(scatterer_from_cartesian(
              p_loc, v_loc, std::polar(e.gain_mag, phase)));
        }

        const ReceivedGrid rx = stage("synthesize " + tag, [&] {
          return synthesize_echo(tx, upa, w, scene, snr,
                                 derive_seed(cfg.seed, bj, si, trial, 1));
        });
        const ChannelEstimate est =
            stage("estimate_channel " + tag, [&] { return estimate_channel(rx, tx); });
        const RangeDopplerMap rdm = stage("compute_rdm " + tag, [&] {
          return compute_rdm(est, art.n_r, art.n_d,
                             cfg.window == "hann" ? RdmWindow::hann
                                                  : RdmWindow::none);
        });
        if (dump_rdm && bj == 0 && si == 0 && trial == 0) {
          art.rdm_dump = rdm.integrated;
        }
        const std::vector<RdPeak> peaks = stage("oscfar " + tag, [&] {
          return oscfar_detect(rdm, cfg.cfar, dims);
        });
        for (const std::string& s : cfg.solvers) {
          const std::vector<AngleDetection> dets =
              stage("angles(" + s + ") " + tag, [&] {
                return estimate_angles(rdm, peaks, upa, w, params[s],
                                       &corr_counts[s]);
              });
          PointCloud4D& local = records[s].per_bs_local[bj];
          for (const AngleDetection& d : dets) {
            local.points.push_back({detection_to_local_point(d.peak, d.angle),
                                    d.peak.velocity_mps, d.power,
                                    static_cast<int>(bj)});
          }
        }
      }
      for (const std::string& s : cfg.solvers) {
        std::vector<std::pair<BsPose, std::vector<Point4D>>> per_bs;
        for (std::size_t bj = 0; bj < cfg.bs.size(); ++bj) {
          per_bs.emplace_back(art.poses[bj],
                              records[s].per_bs_local[bj].points);
        }
        records[s].fused = fuse(per_bs);

        MetricRow row;
        row.solver = s;
        row.snr_db = snr;
        row.trial = trial;
        row.correlation_count = corr_counts[s];
        if (records[s].fused.points.empty() || art.ground_truth.empty()) {
          art.warnings.push_back("empty cloud for solver=" + s + " snr=" +
                                 format_double(snr) + " trial=" +
                                 std::to_string(trial) +
                                 "; metrics undefined");
        } else {
          std::vector<Eigen::Vector3d> pred;
          pred.reserve(records[s].fused.points.size());
          for (const Point4D& p : records[s].fused.points) {
            pred.push_back(p.position);
          }
          row.report =
              precision_recall_f(art.ground_truth, pred, art.match_radius_m);
          row.valid = true;
        }
        art.metrics.push_back(row);
        art.clouds.push_back(std::move(records[s]));
      }
    }
  }
  return art;
}

inline void emit_outputs(const RunArtifacts& art, const std::string& out_dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(fs::path(out_dir) / "clouds", ec);
  if (ec) throw IoError("cannot create output directory: " + out_dir);
  const std::string base = out_dir + "/";

  {
    json j = config_to_json(art.cfg);
    j["config_hash"] = art.cfg_hash;
    std::ofstream out(base + "run_config.json");
    if (!out) throw IoError("cannot write " + base + "run_config.json");
    out << j.dump(2) << "\n";
  }

  {
    PointCloud4D gt;
    for (const auto& p : art.ground_truth) gt.points.push_back({p, 0, 0, -1});
    write_ply(base + "ground_truth.ply", gt, art.cfg_hash);
  }

  for (const CloudRecord& rec : art.clouds) {
    const std::string suffix = rec.solver + "_snr" +
                               format_double(rec.snr_db, "%g") + "_trial" +
                               std::to_string(rec.trial);
    write_ply(base + "clouds/fused_" + suffix + ".ply", rec.fused,
              art.cfg_hash);
    write_cloud_csv(base + "clouds/fused_" + suffix + ".csv", rec.fused,
                    art.cfg_hash);
    if (rec.trial == 0) {
      for (std::size_t bj = 0; bj < rec.per_bs_local.size(); ++bj) {
        write_ply(base + "clouds/local_bs" + std::to_string(bj) + "_" +
                      suffix + ".ply",
                  rec.per_bs_local[bj], art.cfg_hash);
      }
    }
  }

  {
    std::ofstream out(base + "metrics.csv");
    if (!out) throw IoError("cannot write " + base + "metrics.csv");
    out << "# config_hash=" << art.cfg_hash << "\n";
    for (const std::string& wmsg : art.warnings) {
      out << "# warning: " << wmsg << "\n";
    }
    out << "solver,snr_db,trial,chamfer_m,precision,recall,f_score,"
           "match_radius_m,correlation_count\n";
    for (const MetricRow& r : art.metrics) {
      out << r.solver << ',' << format_double(r.snr_db) << ',' << r.trial
          << ',';
      if (r.valid) {
        out << format_double(r.report.chamfer_m) << ','
            << format_double(r.report.precision) << ','
            << format_double(r.report.recall) << ','
            << format_double(r.report.f_score) << ','
            << format_double(r.report.match_radius_m) << ',';
      } else {
        out << "nan,nan,nan,nan," << format_double(art.match_radius_m) << ',';
      }
      out << r.correlation_count << "\n";
    }
  }

  {
    // Plot-ready mean CD / F-score per (solver, SNR).
    std::ofstream out(base + "summary.csv");
    if (!out) throw IoError("cannot write " + base + "summary.csv");
    out << "# config_hash=" << art.cfg_hash << "\n";
    out << "solver,snr_db,mean_chamfer_m,mean_f_score,mean_correlation_count\n";
    for (const std::string& s : art.cfg.solvers) {
      for (double snr : art.cfg.snr_db_list) {
        double cd = 0, f = 0, corr = 0;
        int n = 0;
        for (const MetricRow& r : art.metrics) {
          if (r.solver != s || r.snr_db != snr || !r.valid) continue;
          cd += r.report.chamfer_m;
          f += r.report.f_score;
          corr += static_cast<double>(r.correlation_count);
          ++n;
        }
        out << s << ',' << format_double(snr) << ',';
        if (n > 0) {
          out << format_double(cd / n) << ',' << format_double(f / n) << ','
              << format_double(corr / n) << "\n";
        } else {
          out << "nan,nan,nan\n";
        }
      }
    }
  }

  if (art.rdm_dump) {
    write_rdm_dump(base + "rdm_bs0.bin", *art.rdm_dump);
  }
}

}  // namespace isac4d
