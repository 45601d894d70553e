#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "qwalk/coin_field.hpp"
#include "qwalk/error.hpp"
#include "qwalk/observables.hpp"
#include "qwalk/walker.hpp"

namespace qwalk {

/// Runs t_max steps from a spinor at the origin and records sigma(t) at the
/// requested times (sorted, strictly increasing, each <= t_max). The
/// lattice never clips the cone because t_max <= half_width is required.
inline SigmaSeries evolve(const CoinField& field, const Spinor& psi_ic, std::int64_t t_max,
                          std::span<const std::int64_t> sample_times) {
    detail::require(t_max >= 0 && t_max <= field.half_width(),
                    "evolve: t_max " + std::to_string(t_max) + " exceeds half_width " +
                        std::to_string(field.half_width()));
    for (std::size_t i = 0; i < sample_times.size(); ++i) {
        detail::require(sample_times[i] >= 0 && sample_times[i] <= t_max,
                        "evolve: sample time outside [0, t_max]");
        detail::require(i == 0 || sample_times[i] > sample_times[i - 1],
                        "evolve: sample times must be strictly increasing");
    }

    SigmaSeries series;
    series.meta = {field.epsilon(), field.disorder().width, field.disorder().model,
                   field.disorder().seed};
    series.samples.reserve(sample_times.size());

    const CoinTable coins(field);
    WaveState state = init_localized(psi_ic, field.half_width());
    auto next = sample_times.begin();
    for (;;) {
        if (next != sample_times.end() && *next == state.t()) {
            series.samples.push_back({state.t(), sigma(state)});
            ++next;
        }
        if (state.t() == t_max) break;
        step(state, coins);
    }
    return series;
}

inline SigmaSeries evolve(const CoinField& field, const Spinor& psi_ic, std::int64_t t_max) {
    const auto times = geometric_sample_times(t_max);
    return evolve(field, psi_ic, t_max, times);
}

}  // namespace qwalk
