#pragma once

// Exact decimation of the hierarchical walk in the generating-function
// variable z. Each step eliminates the odd sites of the current lattice
// (one hierarchy level, one shared coin) and rescales x -> x/2; the
// renormalized shift matrices absorb the eliminated paths.

#include <complex>
#include <cstdint>
#include <limits>

#include <Eigen/Dense>

#include "qwalk/coin_field.hpp"
#include "qwalk/error.hpp"
#include "qwalk/walker.hpp"

namespace qwalk {

using complex = std::complex<double>;
using Spinor2 = Eigen::Vector2cd;

/// Condition number above which a resolvent is treated as sitting on a pole.
inline constexpr double kPoleConditionLimit = 1e12;

/// Renormalized shifts after k decimation steps at fixed z.
struct RGTriple {
    int k = 0;
    Eigen::Matrix2cd sa = Eigen::Matrix2cd::Zero();  ///< rightward hop
    Eigen::Matrix2cd sb = Eigen::Matrix2cd::Zero();  ///< leftward hop
    Eigen::Matrix2cd sm = Eigen::Matrix2cd::Zero();  ///< renormalized self-loop
    complex z{0.0, 0.0};
};

/// Bare shifts: z times the up/down projectors, no self-loop.
inline RGTriple rg_init(complex z) {
    RGTriple triple;
    triple.z = z;
    triple.sa(0, 0) = z;
    triple.sb(1, 1) = z;
    return triple;
}

struct Resolvent {
    Eigen::Matrix2cd matrix = Eigen::Matrix2cd::Zero();
    double condition = std::numeric_limits<double>::infinity();
    bool pole_proximal = true;
};

/// [coin^-1 - sm]^-1 with its 2-norm condition number. The inverse is only
/// filled in when the matrix is nonsingular; no regularization is applied.
inline Resolvent coin_resolvent(const Eigen::Matrix2cd& coin, const Eigen::Matrix2cd& sm) {
    const Eigen::Matrix2cd core = coin.inverse() - sm;
    const Eigen::JacobiSVD<Eigen::Matrix2cd> svd(core);
    const auto& sv = svd.singularValues();
    Resolvent r;
    if (sv(1) > 0.0) {
        r.condition = sv(0) / sv(1);
        r.matrix = core.inverse();
    }
    r.pole_proximal = !(r.condition <= kPoleConditionLimit);
    return r;
}

struct RGStep {
    RGTriple next;
    double condition = 0.0;
    bool pole_proximal = false;
};

/// One decimation with the coin of hierarchy level k (the level whose sites
/// are eliminated). When pole_proximal is set the caller decides whether the
/// returned triple is usable.
inline RGStep rg_step(const RGTriple& state, const Eigen::Matrix2cd& coin_k) {
    const Resolvent g = coin_resolvent(coin_k, state.sm);
    RGStep out;
    out.condition = g.condition;
    out.pole_proximal = g.pole_proximal;
    RGTriple& next = out.next;
    next.k = state.k + 1;
    next.z = state.z;
    next.sa = state.sa * g.matrix * state.sa;
    next.sb = state.sb * g.matrix * state.sb;
    next.sm = state.sm + state.sa * g.matrix * state.sb + state.sb * g.matrix * state.sa;
    return out;
}

/// Generating functions of the arrival amplitudes at the walls 0 and 2^l.
struct WallAmplitudes {
    Spinor2 left = Spinor2::Zero();   ///< x = 0, reached by left-movers through sb
    Spinor2 right = Spinor2::Zero();  ///< x = 2^l, reached by right-movers through sa
    double worst_condition = 0.0;
    bool pole_proximal = false;
};

/// Decimates levels 0 .. l-2 of the segment between absorbing walls at 0 and
/// 2^l, leaving the start site 2^(l-1) (level l-1) between the two walls.
/// Requires a level-uniform field: every site of level k must carry C_k.
inline WallAmplitudes absorbed_amplitude(int l, const CoinField& field, complex z, const Spinor& psi_ic) {
    detail::require(l >= 1, "absorbed_amplitude: l must be >= 1");
    detail::require(field.level_uniform(),
                    "absorbed_amplitude: decimation needs one coin per level (not extensive disorder)");
    detail::require(l - 1 < field.level_count(),
                    "absorbed_amplitude: field has no coin for level l-1");

    WallAmplitudes result;
    RGTriple triple = rg_init(z);
    for (int k = 0; k + 1 < l; ++k) {
        const RGStep s = rg_step(triple, field.level_coin(k));
        result.worst_condition = std::max(result.worst_condition, s.condition);
        result.pole_proximal = result.pole_proximal || s.pole_proximal;
        triple = s.next;
    }
    const Resolvent g = coin_resolvent(field.level_coin(l - 1), triple.sm);
    result.worst_condition = std::max(result.worst_condition, g.condition);
    result.pole_proximal = result.pole_proximal || g.pole_proximal;

    const Spinor2 start(psi_ic.up, psi_ic.down);
    const Spinor2 emitted = g.matrix * start;
    result.right = triple.sa * emitted;
    result.left = triple.sb * emitted;
    return result;
}

}  // namespace qwalk
