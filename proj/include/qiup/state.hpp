#pragma once

#include <array>
#include <complex>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace qiup {

using Complex = std::complex<double>;

enum class Polarization { H, V };
enum class Band { Signal, Idler };

std::string to_string(Polarization pol);
std::string to_string(Band band);

/// Which-source label carried by a photon. Tagged(k) keeps the crystal of
/// origin; Merged carries no which-source information.
class SourceTag {
public:
  static SourceTag merged() { return SourceTag{0}; }
  static SourceTag tagged(int source_id);

  bool is_merged() const { return id_ == 0; }
  /// 0 when merged.
  int source_id() const { return id_; }

  auto operator<=>(const SourceTag&) const = default;

private:
  explicit SourceTag(int id) : id_(id) {}
  int id_;
};

std::string to_string(SourceTag tag);

/// Case-sensitive, nonempty path identifier.
class PathId {
public:
  PathId() = default;
  PathId(std::string name);
  PathId(const char* name) : PathId(std::string(name)) {}

  const std::string& name() const { return name_; }

  auto operator<=>(const PathId&) const = default;

private:
  std::string name_;
};

/// One single-photon mode. Member order is the canonical ordering.
struct Mode {
  PathId path;
  Band band;
  Polarization pol;
  SourceTag tag;

  auto operator<=>(const Mode&) const = default;
};

class ModePair {
public:
  ModePair(Mode signal, Mode idler);

  const Mode& signal() const { return signal_; }
  const Mode& idler() const { return idler_; }
  const Mode& photon(Band band) const { return band == Band::Signal ? signal_ : idler_; }

  auto operator<=>(const ModePair&) const = default;

private:
  Mode signal_;
  Mode idler_;
};

struct SourceSpec {
  int source_id = 1;
  PathId signal_path;
  PathId idler_path;
  Polarization emitted_pol = Polarization::V;
  double phase = 0.0;
};

/// 2x2 complex matrix acting on (H, V) amplitudes, row-major.
struct JonesMatrix {
  std::array<Complex, 4> m{};

  static JonesMatrix identity() { return {{1.0, 0.0, 0.0, 1.0}}; }

  Complex operator()(int row, int col) const { return m[static_cast<size_t>(2 * row + col)]; }
  JonesMatrix adjoint() const;
  JonesMatrix operator*(const JonesMatrix& rhs) const;
  std::array<Complex, 2> operator*(const std::array<Complex, 2>& v) const;
  /// max |(U^dagger U - I)_ij|
  double unitarity_defect() const;
  double max_abs_diff(const JonesMatrix& other) const;
};

class StateError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class UnitarityError : public StateError {
public:
  using StateError::StateError;
};

inline constexpr double kDefaultPruneEpsilon = 1e-14;
inline constexpr double kUnitarityTolerance = 1e-10;

/// Sparse two-photon state. Every operation returns a new value; stored
/// amplitudes always exceed prune_epsilon in magnitude.
class BiphotonState {
public:
  using Amplitudes = std::map<ModePair, Complex>;

  explicit BiphotonState(double prune_epsilon = kDefaultPruneEpsilon);
  BiphotonState(Amplitudes amplitudes, double prune_epsilon = kDefaultPruneEpsilon);

  const Amplitudes& amplitudes() const { return amps_; }
  double prune_epsilon() const { return eps_; }
  size_t size() const { return amps_.size(); }
  bool empty() const { return amps_.empty(); }

  /// Zero for absent keys.
  Complex amplitude(const ModePair& key) const;

  auto begin() const { return amps_.begin(); }
  auto end() const { return amps_.end(); }

  friend bool operator==(const BiphotonState&, const BiphotonState&) = default;

private:
  Amplitudes amps_;
  double eps_;
};

/// Maps one photon to a superposition of output modes.
using PhotonMap = std::vector<std::pair<Mode, Complex>>;

/// Applies a single-photon linear map independently to the signal and
/// idler photon of every entry, summing collisions coherently. The map is
/// given the input mode and returns its image; an empty image drops the
/// amplitude.
template <typename F>
BiphotonState transform_photons(const BiphotonState& state, F&& photon_map) {
  BiphotonState::Amplitudes out;
  for (const auto& [pair, amp] : state) {
    const PhotonMap signal_image = photon_map(pair.signal());
    const PhotonMap idler_image = photon_map(pair.idler());
    for (const auto& [s, cs] : signal_image) {
      for (const auto& [i, ci] : idler_image) {
        out[ModePair(s, i)] += amp * cs * ci;
      }
    }
  }
  return BiphotonState(std::move(out), state.prune_epsilon());
}

BiphotonState initial_state(const std::vector<SourceSpec>& sources,
                            double prune_epsilon = kDefaultPruneEpsilon);

double norm_sq(const BiphotonState& state);

BiphotonState apply_pol_unitary(const BiphotonState& state, const PathId& path,
                                std::optional<Band> band_filter, const JonesMatrix& u);

BiphotonState relabel_path(const BiphotonState& state, const PathId& from, const PathId& to,
                           std::optional<Band> band_filter = std::nullopt,
                           std::optional<Polarization> pol_filter = std::nullopt);

BiphotonState prune(const BiphotonState& state);

/// Entrywise sum, used by linearity checks.
BiphotonState operator+(const BiphotonState& a, const BiphotonState& b);
BiphotonState scale(const BiphotonState& state, Complex factor);

/// `<sp>,<spol>,<stag>|<ip>,<ipol>,<itag>|<re>,<im>` per line, canonical order.
std::string serialize(const BiphotonState& state);

/// Reduces an angle to [0, period).
double reduce_angle(double angle, double period);

}  // namespace qiup
