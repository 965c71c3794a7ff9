#pragma once

#include <optional>
#include <string>
#include <vector>

#include "qiup/state.hpp"

namespace qiup {

enum class WavePlateKind { HWP, QWP };

struct WavePlateSetting {
  WavePlateKind kind = WavePlateKind::HWP;
  double fast_axis_angle = 0.0;  // radians, reduced to [0, pi)

  WavePlateSetting() = default;
  WavePlateSetting(WavePlateKind k, double angle);
};

/// Idler/signal polarization preparation alpha|H> + beta e^{i rel_phase}|V>.
/// alpha_phase multiplies the H amplitude by e^{i alpha_phase}; it is not
/// observable at the detector and exists so that can be checked.
struct PreparationSpec {
  double alpha = 0.0;
  double beta = 1.0;
  double rel_phase = 0.0;
  double alpha_phase = 0.0;

  /// Throws PreparationError when alpha^2 + beta^2 deviates from 1 by more than 1e-10.
  void check_normalized() const;
};

struct MergeRule {
  PathId path;
  Polarization pol;
  Band band;
};

enum class PlateOrder { HWP_then_QWP, QWP_then_HWP };

/// Two-input beamsplitter convention: symmetric (1/sqrt2)[[1,i],[i,1]] or
/// hadamard (1/sqrt2)[[1,1],[1,-1]].
enum class BsConvention { Symmetric, Hadamard };

class PreparationError : public StateError {
public:
  using StateError::StateError;
};

class ElementError : public StateError {
public:
  using StateError::StateError;
};

using Warnings = std::vector<std::string>;

JonesMatrix hwp_matrix(double h);
/// Unitary (1/sqrt2)-scaled quarter-wave plate.
JonesMatrix qwp_matrix(double q);
JonesMatrix waveplate_matrix(const WavePlateSetting& setting);

BiphotonState apply_waveplate(const BiphotonState& state, const PathId& path,
                              std::optional<Band> band_filter, const WavePlateSetting& setting);

/// Rewrites every V photon at (path, band) into alpha|H> + beta e^{i rel_phase}|V>.
/// With source_filter set, only photons carrying Tagged(source_filter) are touched.
BiphotonState prepare_beam(const BiphotonState& state, const PathId& path, Band band,
                           const PreparationSpec& spec, std::optional<int> source_filter = std::nullopt);

PreparationSpec waveplates_to_preparation(double h, double q, PlateOrder order = PlateOrder::HWP_then_QWP);

/// |Y>_in -> (|Y>_t + i|Y>_r)/sqrt2.
BiphotonState apply_bs_single(const BiphotonState& state, const PathId& in_path, const PathId& out_t,
                              const PathId& out_r, Warnings* warnings = nullptr);

BiphotonState apply_bs_dual(const BiphotonState& state, const PathId& in_a, const PathId& in_b,
                            const PathId& out_a, const PathId& out_b,
                            BsConvention convention = BsConvention::Symmetric);

BiphotonState apply_dichroic(const BiphotonState& state, const PathId& in_path, const PathId& signal_out,
                             const PathId& idler_out);

BiphotonState apply_phase(const BiphotonState& state, const PathId& path, std::optional<Band> band_filter,
                          double phi);

BiphotonState apply_merge(const BiphotonState& state, const std::vector<MergeRule>& rules);

}  // namespace qiup
