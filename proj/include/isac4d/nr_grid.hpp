#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <iostream>
#include <optional>
#include <random>
#include <string>

#include "isac4d/common.hpp"
#include "isac4d/errors.hpp"

namespace isac4d {

enum class CpMode { normal, extended };

/// 5G NR numerology: subcarrier spacing and slot structure derived from mu.
struct Numerology {
  int mu = 0;
  double scs_hz = 15e3;
  int slots_per_subframe = 1;
  int symbols_per_slot = 14;
  CpMode cp_mode = CpMode::normal;
};

inline Numerology make_numerology(int mu, CpMode cp = CpMode::normal) {
  if (mu < 0 || mu > 6) {
    throw ConfigError("numerology: mu must be in [0,6], got " +
                      std::to_string(mu));
  }
  Numerology n;
  n.mu = mu;
  n.scs_hz = static_cast<double>(1 << mu) * 15e3;
  n.slots_per_subframe = 1 << mu;
  n.symbols_per_slot = (cp == CpMode::normal) ? 14 : 12;
  n.cp_mode = cp;
  return n;
}

// Uniform CP fraction of the useful symbol length. A single T_s keeps the
// Doppler phase exactly linear in the symbol index; the per-symbol CP
// schedule of real NR is not modeled.
inline constexpr double kNormalCpFraction = 144.0 / 2048.0;
inline constexpr double kExtendedCpFraction = 512.0 / 2048.0;

/// Resource grid dimensions plus carrier-derived constants.
struct GridDims {
  Numerology num;
  int n_rb = 0;
  int K = 0;  // subcarriers
  int L = 0;  // OFDM symbols
  double bandwidth_hz = 0;
  double symbol_duration_s = 0;  // includes cyclic prefix
  double carrier_hz = 0;
  double wavelength_m = 0;
};

/// FR1/FR2 envelope check. Returns a message when the combination of
/// carrier, numerology and bandwidth falls outside both frequency ranges.
inline std::optional<std::string> fr_envelope_message(const GridDims& d) {
  const double f = d.carrier_hz;
  const int mu = d.num.mu;
  const double bw = d.bandwidth_hz;
  const bool fr1 = f < 7.125e9 && mu <= 2 && bw <= 100e6;
  const bool fr2 = f >= 24.25e9 && f <= 52.6e9 && mu >= 2 && mu <= 4 &&
                   bw <= 400e6;
  if (fr1 || fr2) return std::nullopt;
  return "carrier " + std::to_string(f / 1e9) + " GHz with mu=" +
         std::to_string(mu) + " and bandwidth " + std::to_string(bw / 1e6) +
         " MHz is outside the FR1/FR2 envelopes";
}

inline GridDims make_grid_dims(const Numerology& num, int n_rb,
                               int n_subframes, double carrier_hz,
                               bool warn_fr = true) {
  if (n_rb < 1) throw ConfigError("grid: n_rb must be >= 1");
  if (n_subframes < 1) throw ConfigError("grid: n_subframes must be >= 1");
  if (!(carrier_hz > 0)) throw ConfigError("grid: carrier_hz must be > 0");
  GridDims d;
  d.num = num;
  d.n_rb = n_rb;
  d.K = 12 * n_rb;
  d.L = n_subframes * num.slots_per_subframe * num.symbols_per_slot;
  d.bandwidth_hz = d.K * num.scs_hz;
  const double cp = num.cp_mode == CpMode::normal ? kNormalCpFraction
                                                  : kExtendedCpFraction;
  d.symbol_duration_s = (1.0 + cp) / num.scs_hz;
  d.carrier_hz = carrier_hz;
  d.wavelength_m = kSpeedOfLight / carrier_hz;
  if (warn_fr) {
    if (auto msg = fr_envelope_message(d)) {
      std::cerr << "warning: " << *msg << "\n";
    }
  }
  return d;
}

/// Transmitted time-frequency grid. Every resource element carries a known
/// unit-magnitude QPSK symbol.
struct ResourceGrid {
  GridDims dims;
  Eigen::MatrixXcd symbols;  // K x L
};

inline ResourceGrid fill_grid(const GridDims& dims, std::uint64_t seed) {
  static const cdouble kQpsk[4] = {
      {M_SQRT1_2, M_SQRT1_2},
      {M_SQRT1_2, -M_SQRT1_2},
      {-M_SQRT1_2, M_SQRT1_2},
      {-M_SQRT1_2, -M_SQRT1_2}};
  ResourceGrid g;
  g.dims = dims;
  g.symbols.resize(dims.K, dims.L);
  std::mt19937_64 rng(seed);
  for (int l = 0; l < dims.L; ++l) {
    for (int k = 0; k < dims.K; ++k) {
      g.symbols(k, l) = kQpsk[rng() & 3];
    }
  }
  return g;
}

}  // namespace isac4d
