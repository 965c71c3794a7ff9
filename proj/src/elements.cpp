#include "qiup/elements.hpp"

#include <cmath>
#include <numbers>

#include "qiup/format.hpp"

namespace qiup {

namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;
const Complex kI{0.0, 1.0};

bool occupies(const BiphotonState& state, const PathId& path) {
  for (const auto& [key, amp] : state) {
    if (key.signal().path == path || key.idler().path == path) return true;
  }
  return false;
}

}  // namespace

WavePlateSetting::WavePlateSetting(WavePlateKind k, double angle)
    : kind(k), fast_axis_angle(reduce_angle(angle, std::numbers::pi)) {}

void PreparationSpec::check_normalized() const {
  if (!(alpha >= 0.0) || !(beta >= 0.0)) {
    throw PreparationError("preparation amplitudes must be nonnegative");
  }
  const double n = alpha * alpha + beta * beta;
  if (!(std::abs(n - 1.0) <= 1e-10)) {
    throw PreparationError("preparation violates alpha^2 + beta^2 = 1 (got " + format_g17(n) + ")");
  }
}

JonesMatrix hwp_matrix(double h) {
  const double c = std::cos(2.0 * h);
  const double s = std::sin(2.0 * h);
  return {{c, -s, -s, -c}};
}

JonesMatrix qwp_matrix(double q) {
  const double c = std::cos(2.0 * q);
  const double s = std::sin(2.0 * q);
  return {{kInvSqrt2 * (kI - c), kInvSqrt2 * s, kInvSqrt2 * s, kInvSqrt2 * (kI + c)}};
}

JonesMatrix waveplate_matrix(const WavePlateSetting& setting) {
  return setting.kind == WavePlateKind::HWP ? hwp_matrix(setting.fast_axis_angle)
                                            : qwp_matrix(setting.fast_axis_angle);
}

BiphotonState apply_waveplate(const BiphotonState& state, const PathId& path,
                              std::optional<Band> band_filter, const WavePlateSetting& setting) {
  return apply_pol_unitary(state, path, band_filter, waveplate_matrix(setting));
}

BiphotonState prepare_beam(const BiphotonState& state, const PathId& path, Band band,
                           const PreparationSpec& spec, std::optional<int> source_filter) {
  spec.check_normalized();
  auto selected = [&](const Mode& m) {
    return m.path == path && m.band == band &&
           (!source_filter || (!m.tag.is_merged() && m.tag.source_id() == *source_filter));
  };
  for (const auto& [key, amp] : state) {
    const Mode& m = key.photon(band);
    if (selected(m) && m.pol == Polarization::H) {
      throw PreparationError("H-polarized " + to_string(band) + " photon already occupies path " +
                             path.name());
    }
  }
  const Complex h_coeff = std::polar(spec.alpha, spec.alpha_phase);
  const Complex v_coeff = std::polar(spec.beta, spec.rel_phase);
  return transform_photons(state, [&](const Mode& m) -> PhotonMap {
    if (!selected(m)) return {{m, 1.0}};
    Mode h = m;
    h.pol = Polarization::H;
    return {{h, h_coeff}, {m, v_coeff}};
  });
}

PreparationSpec waveplates_to_preparation(double h, double q, PlateOrder order) {
  const JonesMatrix hw = hwp_matrix(h);
  const JonesMatrix qw = qwp_matrix(q);
  const JonesMatrix m = order == PlateOrder::HWP_then_QWP ? qw * hw : hw * qw;
  const auto out = m * std::array<Complex, 2>{0.0, 1.0};
  PreparationSpec spec;
  spec.alpha = std::abs(out[0]);
  spec.beta = std::abs(out[1]);
  spec.rel_phase = spec.alpha > 1e-12
                       ? reduce_angle(std::arg(out[1]) - std::arg(out[0]), 2.0 * std::numbers::pi)
                       : 0.0;
  return spec;
}

BiphotonState apply_bs_single(const BiphotonState& state, const PathId& in_path, const PathId& out_t,
                              const PathId& out_r, Warnings* warnings) {
  if (out_t == out_r) throw ElementError("beamsplitter outputs must differ");
  if (!occupies(state, in_path)) {
    if (warnings) warnings->push_back("beamsplitter input path " + in_path.name() + " is unoccupied");
    return state;
  }
  return transform_photons(state, [&](const Mode& m) -> PhotonMap {
    if (m.path != in_path) return {{m, 1.0}};
    Mode t = m;
    t.path = out_t;
    Mode r = m;
    r.path = out_r;
    return {{t, kInvSqrt2}, {r, kInvSqrt2 * kI}};
  });
}

BiphotonState apply_bs_dual(const BiphotonState& state, const PathId& in_a, const PathId& in_b,
                            const PathId& out_a, const PathId& out_b, BsConvention convention) {
  if (out_a == out_b) throw ElementError("beamsplitter outputs must differ");
  if (in_a == in_b) throw ElementError("beamsplitter inputs must differ");
  // column k holds the images of input k on (out_a, out_b)
  const std::array<Complex, 4> bs = convention == BsConvention::Symmetric
                                        ? std::array<Complex, 4>{kInvSqrt2, kInvSqrt2 * kI,
                                                                 kInvSqrt2 * kI, kInvSqrt2}
                                        : std::array<Complex, 4>{kInvSqrt2, kInvSqrt2, kInvSqrt2,
                                                                 -kInvSqrt2};
  return transform_photons(state, [&](const Mode& m) -> PhotonMap {
    int col;
    if (m.path == in_a) {
      col = 0;
    } else if (m.path == in_b) {
      col = 1;
    } else {
      return {{m, 1.0}};
    }
    Mode a = m;
    a.path = out_a;
    Mode b = m;
    b.path = out_b;
    return {{a, bs[static_cast<size_t>(col)]}, {b, bs[static_cast<size_t>(2 + col)]}};
  });
}

BiphotonState apply_dichroic(const BiphotonState& state, const PathId& in_path, const PathId& signal_out,
                             const PathId& idler_out) {
  if (signal_out == idler_out) {
    throw ElementError("dichroic outputs must differ (both are " + signal_out.name() + ")");
  }
  return transform_photons(state, [&](const Mode& m) -> PhotonMap {
    if (m.path != in_path) return {{m, 1.0}};
    Mode routed = m;
    routed.path = m.band == Band::Signal ? signal_out : idler_out;
    return {{routed, 1.0}};
  });
}

BiphotonState apply_phase(const BiphotonState& state, const PathId& path, std::optional<Band> band_filter,
                          double phi) {
  const Complex factor = std::polar(1.0, phi);
  return transform_photons(state, [&](const Mode& m) -> PhotonMap {
    if (m.path == path && (!band_filter || m.band == *band_filter)) return {{m, factor}};
    return {{m, 1.0}};
  });
}

BiphotonState apply_merge(const BiphotonState& state, const std::vector<MergeRule>& rules) {
  return transform_photons(state, [&](const Mode& m) -> PhotonMap {
    for (const auto& rule : rules) {
      if (m.path == rule.path && m.pol == rule.pol && m.band == rule.band) {
        Mode merged = m;
        merged.tag = SourceTag::merged();
        return {{merged, 1.0}};
      }
    }
    return {{m, 1.0}};
  });
}

}  // namespace qiup
