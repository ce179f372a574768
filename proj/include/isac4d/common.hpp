#pragma once

#include <complex>
#include <cstdint>

namespace isac4d {

using cdouble = std::complex<double>;

inline constexpr double kSpeedOfLight = 299792458.0;
inline constexpr double kPi = 3.14159265358979323846;

inline double deg2rad(double deg) { return deg * kPi / 180.0; }
inline double rad2deg(double rad) { return rad * 180.0 / kPi; }

// splitmix64 finalizer; used to derive independent per-(BS, SNR, trial)
// seeds from a single master seed.
inline std::uint64_t mix_seed(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a,
                                 std::uint64_t b = 0, std::uint64_t c = 0,
                                 std::uint64_t d = 0) {
  std::uint64_t s = mix_seed(master ^ 0xA5A5A5A5A5A5A5A5ULL);
  s = mix_seed(s ^ mix_seed(a));
  s = mix_seed(s ^ mix_seed(b + 0x1000));
  s = mix_seed(s ^ mix_seed(c + 0x2000));
  s = mix_seed(s ^ mix_seed(d + 0x3000));
  return s;
}

}  // namespace isac4d
