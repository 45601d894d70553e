#pragma once

// Independent routes to the wall generating functions of the absorbing
// segment [0, 2^l], for checking the decimation.

#include <complex>
#include <cstdint>

#include <Eigen/Dense>

#include "qwalk/coin_field.hpp"
#include "qwalk/walker.hpp"

namespace qwalk_test {

struct WallPair {
    Eigen::Vector2cd left = Eigen::Vector2cd::Zero();
    Eigen::Vector2cd right = Eigen::Vector2cd::Zero();
};

/// Truncated series sum_{t <= T} psi_wall(t) z^t from the time-domain walk.
inline WallPair series_wall_amplitudes(const qwalk::CoinField& field, int l, const qwalk::Spinor& ic,
                                       std::complex<double> z, std::int64_t terms) {
    const auto rec = qwalk::evolve_absorbing(field, l, ic, terms);
    WallPair out;
    std::complex<double> zt = 1.0;
    for (std::int64_t t = 0; t <= terms; ++t) {
        const auto& a = rec.left[static_cast<std::size_t>(t)];
        const auto& b = rec.right[static_cast<std::size_t>(t)];
        out.left += zt * Eigen::Vector2cd(a.up, a.down);
        out.right += zt * Eigen::Vector2cd(b.up, b.down);
        zt *= z;
    }
    return out;
}

/// Solves (I - z T) psi = psi_IC on the interior sites, with T the one-step
/// propagator whose wall-bound amplitude leaves the system, then reads off
/// the wall arrivals z * (shifted coin output of the neighbouring site).
inline WallPair laplace_wall_amplitudes(const qwalk::CoinField& field, int l, const qwalk::Spinor& ic,
                                        std::complex<double> z) {
    const std::int64_t n = std::int64_t{1} << l;
    const auto interior = static_cast<Eigen::Index>(n - 1);
    const Eigen::Index dim = 2 * interior;
    auto slot = [](std::int64_t x, int comp) { return static_cast<Eigen::Index>(2 * (x - 1) + comp); };

    Eigen::MatrixXcd propagator = Eigen::MatrixXcd::Zero(dim, dim);
    for (std::int64_t x = 1; x < n; ++x) {
        const Eigen::Matrix2cd c = field.coin(x);
        for (int in = 0; in < 2; ++in) {
            if (x + 1 < n) propagator(slot(x + 1, 0), slot(x, in)) += c(0, in);
            if (x - 1 > 0) propagator(slot(x - 1, 1), slot(x, in)) += c(1, in);
        }
    }
    Eigen::VectorXcd source = Eigen::VectorXcd::Zero(dim);
    source(slot(n / 2, 0)) = ic.up;
    source(slot(n / 2, 1)) = ic.down;
    const Eigen::MatrixXcd system = Eigen::MatrixXcd::Identity(dim, dim) - z * propagator;
    const Eigen::VectorXcd psi = system.partialPivLu().solve(source);

    WallPair out;
    const Eigen::Vector2cd last(psi(slot(n - 1, 0)), psi(slot(n - 1, 1)));
    const Eigen::Vector2cd first(psi(slot(1, 0)), psi(slot(1, 1)));
    out.right(0) = z * (field.coin(n - 1) * last)(0);
    out.left(1) = z * (field.coin(1) * first)(1);
    return out;
}

}  // namespace qwalk_test
