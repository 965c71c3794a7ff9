#pragma once

#include <cmath>
#include <complex>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>
#include <string>

#include "qiup/circuit.hpp"
#include "qiup/state.hpp"

namespace qiup::testing {

inline constexpr double kPi = std::numbers::pi;

inline std::string read_corpus(const std::string& relative) {
  std::ifstream in(std::string(QIUP_CORPUS_DIR) + "/" + relative, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

inline Mode mode(const char* path, Band band, Polarization pol, SourceTag tag = SourceTag::tagged(1)) {
  return Mode{path, band, pol, tag};
}

inline ModePair pair_at(const char* sp, Polarization spol, SourceTag stag, const char* ip, Polarization ipol,
                        SourceTag itag) {
  return ModePair(mode(sp, Band::Signal, spol, stag), mode(ip, Band::Idler, ipol, itag));
}

/// Random state over a handful of paths, polarizations and tags.
inline BiphotonState random_state(std::mt19937_64& rng, int entries) {
  const char* paths[] = {"a", "b", "f"};
  std::uniform_int_distribution<int> pick(0, 2), bit(0, 1), tag(0, 2);
  std::normal_distribution<double> g;
  BiphotonState::Amplitudes amps;
  auto random_mode = [&](Band band) {
    const int t = tag(rng);
    return Mode{paths[pick(rng)], band, bit(rng) ? Polarization::H : Polarization::V,
                t == 0 ? SourceTag::merged() : SourceTag::tagged(t)};
  };
  for (int k = 0; k < entries; ++k) {
    amps[ModePair(random_mode(Band::Signal), random_mode(Band::Idler))] += Complex(g(rng), g(rng));
  }
  return BiphotonState(std::move(amps));
}

/// Haar-ish random 2x2 unitary from Euler angles and a global phase.
inline JonesMatrix random_unitary(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 2.0 * kPi);
  const double a = u(rng), b = u(rng), c = u(rng), d = u(rng);
  const Complex e = std::polar(1.0, a);
  return {{e * std::polar(std::cos(b), c), e * std::polar(std::sin(b), d),
           -e * std::polar(std::sin(b), -d), e * std::polar(std::cos(b), -c)}};
}

inline double max_entry_diff(const BiphotonState& x, const BiphotonState& y) {
  double worst = 0.0;
  for (const auto& [k, v] : x) worst = std::max(worst, std::abs(v - y.amplitude(k)));
  for (const auto& [k, v] : y) worst = std::max(worst, std::abs(v - x.amplitude(k)));
  return worst;
}

}  // namespace qiup::testing
