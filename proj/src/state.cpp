#include "qiup/state.hpp"

#include <cmath>
#include <numbers>
#include <set>
#include <sstream>

#include "qiup/format.hpp"

namespace qiup {

std::string to_string(Polarization pol) { return pol == Polarization::H ? "H" : "V"; }

std::string to_string(Band band) { return band == Band::Signal ? "signal" : "idler"; }

SourceTag SourceTag::tagged(int source_id) {
  if (source_id != 1 && source_id != 2) {
    throw StateError("source id must be 1 or 2, got " + std::to_string(source_id));
  }
  return SourceTag{source_id};
}

std::string to_string(SourceTag tag) {
  return tag.is_merged() ? "M" : "T" + std::to_string(tag.source_id());
}

PathId::PathId(std::string name) : name_(std::move(name)) {
  if (name_.empty()) throw StateError("path identifier must be nonempty");
}

ModePair::ModePair(Mode signal, Mode idler) : signal_(std::move(signal)), idler_(std::move(idler)) {
  if (signal_.band != Band::Signal || idler_.band != Band::Idler) {
    throw StateError("mode pair requires a signal-band and an idler-band photon");
  }
}

JonesMatrix JonesMatrix::adjoint() const {
  return {{std::conj(m[0]), std::conj(m[2]), std::conj(m[1]), std::conj(m[3])}};
}

JonesMatrix JonesMatrix::operator*(const JonesMatrix& rhs) const {
  JonesMatrix r;
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      r.m[static_cast<size_t>(2 * i + j)] = (*this)(i, 0) * rhs(0, j) + (*this)(i, 1) * rhs(1, j);
    }
  }
  return r;
}

std::array<Complex, 2> JonesMatrix::operator*(const std::array<Complex, 2>& v) const {
  return {m[0] * v[0] + m[1] * v[1], m[2] * v[0] + m[3] * v[1]};
}

double JonesMatrix::unitarity_defect() const {
  const JonesMatrix g = adjoint() * (*this);
  return g.max_abs_diff(identity());
}

double JonesMatrix::max_abs_diff(const JonesMatrix& other) const {
  double worst = 0.0;
  for (size_t k = 0; k < 4; ++k) worst = std::max(worst, std::abs(m[k] - other.m[k]));
  return worst;
}

BiphotonState::BiphotonState(double prune_epsilon) : eps_(prune_epsilon) {
  if (!(prune_epsilon >= 0.0)) throw StateError("prune epsilon must be nonnegative");
}

BiphotonState::BiphotonState(Amplitudes amplitudes, double prune_epsilon)
    : amps_(std::move(amplitudes)), eps_(prune_epsilon) {
  if (!(prune_epsilon >= 0.0)) throw StateError("prune epsilon must be nonnegative");
  std::erase_if(amps_, [this](const auto& kv) { return std::abs(kv.second) <= eps_; });
  for (const auto& [key, amp] : amps_) {
    if (!std::isfinite(amp.real()) || !std::isfinite(amp.imag())) {
      throw StateError("non-finite amplitude in state");
    }
  }
}

Complex BiphotonState::amplitude(const ModePair& key) const {
  auto it = amps_.find(key);
  return it == amps_.end() ? Complex{} : it->second;
}

BiphotonState initial_state(const std::vector<SourceSpec>& sources, double prune_epsilon) {
  if (sources.empty()) throw StateError("at least one source is required");
  std::set<int> seen;
  BiphotonState::Amplitudes amps;
  for (const auto& src : sources) {
    if (!seen.insert(src.source_id).second) {
      throw StateError("duplicate source id " + std::to_string(src.source_id));
    }
    const SourceTag tag = SourceTag::tagged(src.source_id);
    const Mode signal{src.signal_path, Band::Signal, src.emitted_pol, tag};
    const Mode idler{src.idler_path, Band::Idler, src.emitted_pol, tag};
    amps[ModePair(signal, idler)] += std::polar(1.0, src.phase);
  }
  return BiphotonState(std::move(amps), prune_epsilon);
}

double norm_sq(const BiphotonState& state) {
  double total = 0.0;
  for (const auto& [key, amp] : state) total += std::norm(amp);
  return total;
}

namespace {

bool matches(const Mode& mode, const PathId& path, std::optional<Band> band) {
  return mode.path == path && (!band || mode.band == *band);
}

}  // namespace

BiphotonState apply_pol_unitary(const BiphotonState& state, const PathId& path,
                                std::optional<Band> band_filter, const JonesMatrix& u) {
  const double defect = u.unitarity_defect();
  if (!(defect <= kUnitarityTolerance)) {
    throw UnitarityError("polarization matrix is not unitary (defect " + format_g17(defect) + ")");
  }
  return transform_photons(state, [&](const Mode& mode) -> PhotonMap {
    if (!matches(mode, path, band_filter)) return {{mode, 1.0}};
    // column of U selected by the input polarization
    const int col = mode.pol == Polarization::H ? 0 : 1;
    Mode h = mode;
    h.pol = Polarization::H;
    Mode v = mode;
    v.pol = Polarization::V;
    return {{h, u(0, col)}, {v, u(1, col)}};
  });
}

BiphotonState relabel_path(const BiphotonState& state, const PathId& from, const PathId& to,
                           std::optional<Band> band_filter, std::optional<Polarization> pol_filter) {
  return transform_photons(state, [&](const Mode& mode) -> PhotonMap {
    if (matches(mode, from, band_filter) && (!pol_filter || mode.pol == *pol_filter)) {
      Mode moved = mode;
      moved.path = to;
      return {{moved, 1.0}};
    }
    return {{mode, 1.0}};
  });
}

BiphotonState prune(const BiphotonState& state) {
  return BiphotonState(state.amplitudes(), state.prune_epsilon());
}

BiphotonState operator+(const BiphotonState& a, const BiphotonState& b) {
  BiphotonState::Amplitudes amps = a.amplitudes();
  for (const auto& [key, amp] : b) amps[key] += amp;
  return BiphotonState(std::move(amps), std::min(a.prune_epsilon(), b.prune_epsilon()));
}

BiphotonState scale(const BiphotonState& state, Complex factor) {
  BiphotonState::Amplitudes amps;
  for (const auto& [key, amp] : state) amps.emplace(key, amp * factor);
  return BiphotonState(std::move(amps), state.prune_epsilon());
}

std::string serialize(const BiphotonState& state) {
  std::ostringstream out;
  auto photon = [&](const Mode& m) {
    out << m.path.name() << ',' << to_string(m.pol) << ',' << to_string(m.tag);
  };
  for (const auto& [key, amp] : state) {
    photon(key.signal());
    out << '|';
    photon(key.idler());
    out << '|' << format_g17(amp.real()) << ',' << format_g17(amp.imag()) << '\n';
  }
  return out.str();
}

double reduce_angle(double angle, double period) {
  double r = std::fmod(angle, period);
  if (r < 0.0) r += period;
  if (r >= period) r = 0.0;
  return r;
}

}  // namespace qiup
