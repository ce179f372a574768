#pragma once

#include <fftw3.h>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "isac4d/common.hpp"
#include "isac4d/errors.hpp"
#include "isac4d/nr_grid.hpp"
#include "isac4d/scene_channel.hpp"

namespace isac4d {

struct ChannelEstimate {
  std::vector<Eigen::MatrixXcd> per_antenna;  // PQ matrices, each K x L
};

/// Element-wise division of the received grids by the known symbols.
inline ChannelEstimate estimate_channel(const ReceivedGrid& rx,
                                        const ResourceGrid& tx) {
  if ((tx.symbols.array().abs() == 0.0).any()) {
    throw DimensionError("estimate_channel: transmitted grid has zero symbols");
  }
  ChannelEstimate est;
  est.per_antenna.reserve(rx.per_antenna.size());
  for (const Eigen::MatrixXcd& y : rx.per_antenna) {
    if (y.rows() != tx.symbols.rows() || y.cols() != tx.symbols.cols()) {
      throw DimensionError("estimate_channel: grid dimension mismatch");
    }
    est.per_antenna.push_back(y.cwiseQuotient(tx.symbols));
  }
  return est;
}

/// Unnormalized delay-Doppler transform: e^{+j2pi mk/N_R} along the
/// subcarrier axis, e^{-j2pi nl/N_D} along the symbol axis, in place.
inline void delay_doppler_transform(Eigen::MatrixXcd& buf) {
  int nr = static_cast<int>(buf.rows());
  int nd = static_cast<int>(buf.cols());
  auto* data = reinterpret_cast<fftw_complex*>(buf.data());
  fftw_plan p1 =
      fftw_plan_many_dft(1, &nr, nd, data, nullptr, 1, nr, data, nullptr, 1,
                         nr, FFTW_BACKWARD, FFTW_ESTIMATE);
  fftw_execute(p1);
  fftw_destroy_plan(p1);
  fftw_plan p2 =
      fftw_plan_many_dft(1, &nd, nr, data, nullptr, nr, 1, data, nullptr, nr,
                         1, FFTW_FORWARD, FFTW_ESTIMATE);
  fftw_execute(p2);
  fftw_destroy_plan(p2);
}

struct RangeDopplerMap {
  std::vector<Eigen::MatrixXcd> per_antenna;  // PQ maps, each N_R x N_D
  Eigen::MatrixXd integrated;                 // |sum over antennas|^2
  int n_r = 0;
  int n_d = 0;
};

/// Smallest power of two >= 2n; the default zero-padding factor.
inline int default_padding(int n) {
  int p = 1;
  while (p < 2 * n) p *= 2;
  return p;
}

/// Optional amplitude taper applied to the K x L data region before the
/// zero-padded transforms. The rectangular default follows the plain DFT
/// definition; the Hann taper trades 1.8 dB of SNR for ~30 dB lower
/// leakage sidelobes, which keeps strong scatterers from spraying CFAR
/// detections along their range axis.
enum class RdmWindow { none, hann };

inline Eigen::VectorXd hann_window(int n) {
  Eigen::VectorXd w(n);
  if (n == 1) {
    w(0) = 1.0;
    return w;
  }
  for (int i = 0; i < n; ++i) {
    w(i) = 0.5 - 0.5 * std::cos(2.0 * kPi * i / (n - 1));
  }
  return w;
}

inline RangeDopplerMap compute_rdm(const ChannelEstimate& est, int n_r,
                                   int n_d,
                                   RdmWindow window = RdmWindow::none) {
  if (est.per_antenna.empty()) {
    throw DimensionError("compute_rdm: no antennas");
  }
  const int K = static_cast<int>(est.per_antenna[0].rows());
  const int L = static_cast<int>(est.per_antenna[0].cols());
  if (n_r < K || n_d < L) {
    throw DimensionError("compute_rdm: padding (" + std::to_string(n_r) +
                         "," + std::to_string(n_d) +
                         ") smaller than data (" + std::to_string(K) + "," +
                         std::to_string(L) + ")");
  }
  RangeDopplerMap map;
  map.n_r = n_r;
  map.n_d = n_d;
  map.per_antenna.reserve(est.per_antenna.size());
  Eigen::MatrixXd taper;
  if (window == RdmWindow::hann) {
    taper = hann_window(K) * hann_window(L).transpose();
  }
  Eigen::MatrixXcd sum = Eigen::MatrixXcd::Zero(n_r, n_d);
  for (const Eigen::MatrixXcd& h : est.per_antenna) {
    Eigen::MatrixXcd buf = Eigen::MatrixXcd::Zero(n_r, n_d);
    if (window == RdmWindow::hann) {
      buf.topLeftCorner(K, L) = h.cwiseProduct(taper);
    } else {
      buf.topLeftCorner(K, L) = h;
    }
    delay_doppler_transform(buf);
    sum += buf;
    map.per_antenna.push_back(std::move(buf));
  }
  map.integrated = sum.cwiseAbs2();
  return map;
}

/// OS-CFAR detector settings. A scale_factor of 0 means "derive from
/// design_pfa for the configured window".
struct CfarConfig {
  int guard_range = 2;
  int guard_doppler = 2;
  int train_range = 8;
  int train_doppler = 4;
  double os_rank_fraction = 0.75;
  double scale_factor = 0.0;
  double design_pfa = 1e-4;
  int min_peak_separation = 2;
};

/// Number of training cells in the CFAR window.
inline int cfar_training_count(const CfarConfig& cfg) {
  const int wr = cfg.guard_range + cfg.train_range;
  const int wd = cfg.guard_doppler + cfg.train_doppler;
  const int full = (2 * wr + 1) * (2 * wd + 1);
  const int guard = (2 * cfg.guard_range + 1) * (2 * cfg.guard_doppler + 1);
  return full - guard;
}

inline int cfar_rank(const CfarConfig& cfg, int n_train) {
  if (!(cfg.os_rank_fraction > 0.0) || cfg.os_rank_fraction > 1.0) {
    throw ConfigError("cfar: os_rank_fraction must be in (0,1]");
  }
  int k = static_cast<int>(std::lround(cfg.os_rank_fraction * n_train));
  return std::clamp(k, 1, n_train);
}

/// Threshold multiplier for OS-CFAR in exponentially distributed clutter:
/// solves prod_{i=0}^{k-1} (N-i)/(N-i+alpha) = pfa for alpha.
inline double os_cfar_scale(int n_train, int rank_k, double pfa) {
  if (rank_k < 1 || rank_k > n_train) {
    throw ConfigError("cfar: rank out of range");
  }
  if (!(pfa > 0.0 && pfa < 1.0)) {
    throw ConfigError("cfar: design_pfa must be in (0,1)");
  }
  auto log_pfa = [&](double alpha) {
    double s = 0;
    for (int i = 0; i < rank_k; ++i) {
      const double m = static_cast<double>(n_train - i);
      s += std::log(m) - std::log(m + alpha);
    }
    return s;
  };
  const double target = std::log(pfa);
  double lo = 0.0, hi = 1.0;
  while (log_pfa(hi) > target) hi *= 2.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (log_pfa(mid) > target) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

/// Raw OS-CFAR threshold crossings over the integrated map, with toroidal
/// wrap at the edges. Peak grouping happens later in oscfar_detect.
inline Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> oscfar_mask(
    const Eigen::MatrixXd& power, const CfarConfig& cfg) {
  const int nr = static_cast<int>(power.rows());
  const int nd = static_cast<int>(power.cols());
  const int wr = cfg.guard_range + cfg.train_range;
  const int wd = cfg.guard_doppler + cfg.train_doppler;
  if (2 * wr + 1 > nr || 2 * wd + 1 > nd) {
    throw ConfigError("cfar: training window does not fit inside the map");
  }
  const int n_train = cfar_training_count(cfg);
  const int k = cfar_rank(cfg, n_train);
  const double scale = cfg.scale_factor > 0.0
                           ? cfg.scale_factor
                           : os_cfar_scale(n_train, k, cfg.design_pfa);
  Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> mask(nr, nd);
  std::vector<double> cells(n_train);
  for (int n = 0; n < nd; ++n) {
    for (int m = 0; m < nr; ++m) {
      int idx = 0;
      for (int dn = -wd; dn <= wd; ++dn) {
        for (int dm = -wr; dm <= wr; ++dm) {
          if (std::abs(dm) <= cfg.guard_range &&
              std::abs(dn) <= cfg.guard_doppler) {
            continue;
          }
          const int mm = (m + dm + nr) % nr;
          const int nn = (n + dn + nd) % nd;
          cells[idx++] = power(mm, nn);
        }
      }
      std::nth_element(cells.begin(), cells.begin() + (k - 1), cells.end());
      mask(m, n) = power(m, n) > scale * cells[k - 1];
    }
  }
  return mask;
}

/// One detected range-Doppler peak. n is the raw Doppler bin; n_signed
/// interprets bins above N_D/2 as negative.
struct RdPeak {
  int m = 0;
  int n = 0;
  int n_signed = 0;
  double power = 0;
  double range_m = 0;
  double velocity_mps = 0;
};

inline double range_bin_size(const GridDims& dims, int n_r) {
  return kSpeedOfLight / (2.0 * n_r * dims.num.scs_hz);
}

inline double velocity_bin_size(const GridDims& dims, int n_d) {
  return dims.wavelength_m / (2.0 * n_d * dims.symbol_duration_s);
}

inline std::vector<RdPeak> oscfar_detect(const RangeDopplerMap& map,
                                         const CfarConfig& cfg,
                                         const GridDims& dims) {
  const auto mask = oscfar_mask(map.integrated, cfg);
  const int nr = map.n_r;
  const int nd = map.n_d;
  const Eigen::MatrixXd& p = map.integrated;

  // Keep only 8-neighborhood local maxima among the crossings.
  std::vector<RdPeak> cand;
  for (int n = 0; n < nd; ++n) {
    for (int m = 0; m < nr; ++m) {
      if (!mask(m, n)) continue;
      bool is_max = true;
      for (int dn = -1; dn <= 1 && is_max; ++dn) {
        for (int dm = -1; dm <= 1; ++dm) {
          if (dm == 0 && dn == 0) continue;
          if (p((m + dm + nr) % nr, (n + dn + nd) % nd) > p(m, n)) {
            is_max = false;
            break;
          }
        }
      }
      if (!is_max) continue;
      RdPeak peak;
      peak.m = m;
      peak.n = n;
      peak.n_signed = n > nd / 2 ? n - nd : n;
      peak.power = p(m, n);
      peak.range_m = range_bin_size(dims, nr) * m;
      peak.velocity_mps = velocity_bin_size(dims, nd) * peak.n_signed;
      cand.push_back(peak);
    }
  }
  std::sort(cand.begin(), cand.end(),
            [](const RdPeak& a, const RdPeak& b) { return a.power > b.power; });

  auto toroidal_dist = [](int a, int b, int n) {
    const int d = std::abs(a - b);
    return std::min(d, n - d);
  };
  std::vector<RdPeak> peaks;
  for (const RdPeak& c : cand) {
    bool keep = true;
    for (const RdPeak& acc : peaks) {
      if (toroidal_dist(c.m, acc.m, nr) < cfg.min_peak_separation &&
          toroidal_dist(c.n, acc.n, nd) < cfg.min_peak_separation) {
        keep = false;
        break;
      }
    }
    if (keep) peaks.push_back(c);
  }
  return peaks;
}

/// Per-antenna RDM values at a peak bin, in the global vertical-major
/// antenna order.
inline Eigen::VectorXcd extract_spatial_vector(const RangeDopplerMap& map,
                                               const RdPeak& peak) {
  if (peak.m < 0 || peak.m >= map.n_r || peak.n < 0 || peak.n >= map.n_d) {
    throw DimensionError("extract_spatial_vector: peak bin out of bounds");
  }
  Eigen::VectorXcd h(map.per_antenna.size());
  for (std::size_t a = 0; a < map.per_antenna.size(); ++a) {
    h(a) = map.per_antenna[a](peak.m, peak.n);
  }
  return h;
}

}  // namespace isac4d
