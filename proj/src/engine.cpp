#include "qiup/engine.hpp"

#include <numbers>

namespace qiup {

namespace {

double value_of(const Scalar& s) {
  if (!s.bound()) throw PlanError("E_MISSING_PARAM", "parameter '" + s.param + "' is not bound");
  return s.value;
}

}  // namespace

BiphotonState execute(const CircuitPlan& plan, const ExecOptions& options, std::vector<StepTrace>* trace,
                      Warnings* warnings) {
  std::vector<SourceSpec> sources;
  for (const auto& src : plan.sources) {
    sources.push_back({src.source_id, src.signal_path, src.idler_path, src.pol,
                       reduce_angle(value_of(src.phase), 2.0 * std::numbers::pi)});
  }
  BiphotonState state = initial_state(sources, options.prune_epsilon);
  if (trace) trace->push_back({"initial", state});

  for (const auto& s : plan.pipeline) {
    if (!options.merge && std::holds_alternative<step::Merge>(s)) continue;
    state = std::visit(
        [&](const auto& st) -> BiphotonState {
          using T = std::decay_t<decltype(st)>;
          if constexpr (std::is_same_v<T, step::Prepare>) {
            const PreparationSpec spec{value_of(st.alpha), value_of(st.beta), value_of(st.gamma),
                                       value_of(st.alpha_phase)};
            return prepare_beam(state, st.path, st.band, spec, st.source);
          } else if constexpr (std::is_same_v<T, step::WavePlate>) {
            return apply_waveplate(state, st.path, st.band, WavePlateSetting(st.kind, value_of(st.angle)));
          } else if constexpr (std::is_same_v<T, step::Bs>) {
            return apply_bs_single(state, st.in, st.out_t, st.out_r, warnings);
          } else if constexpr (std::is_same_v<T, step::Bs2>) {
            return apply_bs_dual(state, st.in_a, st.in_b, st.out_a, st.out_b, options.bs_convention);
          } else if constexpr (std::is_same_v<T, step::Dichroic>) {
            return apply_dichroic(state, st.in, st.signal_out, st.idler_out);
          } else if constexpr (std::is_same_v<T, step::Phase>) {
            return apply_phase(state, st.path, st.band, value_of(st.value));
          } else {
            return apply_merge(state, {st.rule});
          }
        },
        s);
    if (trace) trace->push_back({describe(s), state});
  }
  return state;
}

}  // namespace qiup
