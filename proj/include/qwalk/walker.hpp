#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <span>
#include <vector>

#include "qwalk/coin_field.hpp"
#include "qwalk/error.hpp"

namespace qwalk {

using amplitude = std::complex<double>;

/// Coin-space amplitudes at one site: up moves right, down moves left.
struct Spinor {
    amplitude up{1.0, 0.0};
    amplitude down{0.0, 0.0};

    double norm_squared() const noexcept { return std::norm(up) + std::norm(down); }

    /// (1, i)/sqrt(2): spreads without drift on the clean line.
    static Spinor symmetric() {
        const double h = 1.0 / std::numbers::sqrt2;
        return {{h, 0.0}, {0.0, h}};
    }
};

/// Real coin coefficients for every site of [-L, L], resolved once per run.
///
/// Field coins have chi = vartheta = 0, so each site is a real 2x2 matrix.
/// The origin holds the identity.
class CoinTable {
public:
    struct Entry {
        double a, b, c, d;  // [[a, b], [c, d]]
    };

    explicit CoinTable(const CoinField& field) : half_width_(field.half_width()) {
        entries_.resize(static_cast<std::size_t>(2 * half_width_ + 1));
        for (std::int64_t x = -half_width_; x <= half_width_; ++x) {
            const auto theta = field.angle(x);
            Entry e{1.0, 0.0, 0.0, 1.0};
            if (theta) {
                const double s = std::sin(*theta);
                const double c = std::cos(*theta);
                e = {s, c, c, -s};
            }
            entries_[static_cast<std::size_t>(x + half_width_)] = e;
        }
    }

    std::int64_t half_width() const noexcept { return half_width_; }
    const Entry& at(std::int64_t x) const { return entries_[static_cast<std::size_t>(x + half_width_)]; }
    const Entry* data_centered() const noexcept { return entries_.data() + half_width_; }

private:
    std::int64_t half_width_;
    std::vector<Entry> entries_;
};

/// Two-component wave function on [-L, L] for a walk started at the origin.
///
/// Storage is in co-moving frames: the up component of site x at time t lives
/// in slot (x - t) / 2 of its buffer and the down component in slot
/// (x + t) / 2, so the shift is implicit and a step is an in-place coin sweep.
/// Only sites with x = t (mod 2) are ever occupied; the other parity reads as 0.
class WaveState {
public:
    explicit WaveState(std::int64_t half_width)
        : half_width_(half_width),
          up_(static_cast<std::size_t>(half_width + 1)),
          down_(static_cast<std::size_t>(half_width + 1)) {
        detail::require(half_width >= 1, "WaveState: half_width must be positive");
    }

    std::int64_t t() const noexcept { return t_; }
    /// Light-cone radius: no amplitude at |x| > cone().
    std::int64_t cone() const noexcept { return t_; }
    std::int64_t half_width() const noexcept { return half_width_; }

    amplitude up(std::int64_t x) const {
        const std::int64_t rel = x - t_;
        if (rel > 0 || (rel & 1) != 0) return {};
        const std::int64_t slot = rel / 2 + half_width_;
        return slot < 0 ? amplitude{} : up_[static_cast<std::size_t>(slot)];
    }

    amplitude down(std::int64_t x) const {
        const std::int64_t rel = x + t_;
        if (rel < 0 || (rel & 1) != 0) return {};
        const std::int64_t slot = rel / 2;
        return slot > half_width_ ? amplitude{} : down_[static_cast<std::size_t>(slot)];
    }

    double density(std::int64_t x) const { return std::norm(up(x)) + std::norm(down(x)); }

    double norm() const {
        double total = 0.0;
        for (std::int64_t x = -t_; x <= t_; x += 2) total += density(x);
        return total;
    }

    /// Calls f(x, rho) for every site in the cone with matching parity.
    template <typename F>
    void for_each_density(F&& f) const {
        const amplitude* up = up_.data() + (half_width_ - t_);
        const amplitude* down = down_.data();
        for (std::int64_t m = 0; m <= t_; ++m) {
            f(-t_ + 2 * m, std::norm(up[m]) + std::norm(down[m]));
        }
    }

private:
    friend WaveState init_localized(const Spinor&, std::int64_t);
    friend void step(WaveState&, const CoinTable&);

    std::int64_t half_width_;
    std::int64_t t_ = 0;
    std::vector<amplitude> up_;
    std::vector<amplitude> down_;
};

inline WaveState init_localized(const Spinor& psi_ic, std::int64_t half_width) {
    detail::require(std::abs(psi_ic.norm_squared() - 1.0) < 1e-12,
                    "initial spinor must be normalized");
    WaveState state(half_width);
    state.up_[static_cast<std::size_t>(half_width)] = psi_ic.up;
    state.down_[0] = psi_ic.down;
    return state;
}

/// One application of shift * coin, restricted to the light cone.
inline void step(WaveState& state, const CoinTable& coins) {
    detail::require(state.t_ + 1 <= state.half_width_ && state.t_ + 1 <= coins.half_width(),
                    "step: light cone would leave the lattice (half_width " +
                        std::to_string(std::min(state.half_width_, coins.half_width())) + ")");
    const std::int64_t t = state.t_;
    amplitude* up = state.up_.data() + (state.half_width_ - t);
    amplitude* down = state.down_.data();
    const CoinTable::Entry* coin = coins.data_centered() - t;
    for (std::int64_t m = 0; m <= t; ++m) {
        const CoinTable::Entry& c = coin[2 * m];
        const amplitude u = up[m];
        const amplitude d = down[m];
        up[m] = c.a * u + c.b * d;
        down[m] = c.c * u + c.d * d;
    }
    ++state.t_;
}

/// Arrivals at the two absorbing walls, indexed by time (entry 0 is empty).
struct AbsorptionRecord {
    std::vector<Spinor> left;   ///< arrivals at x = 0
    std::vector<Spinor> right;  ///< arrivals at x = 2^l

    /// Probability absorbed at either wall up to and including time t.
    double cumulative(std::size_t t) const {
        double total = 0.0;
        for (std::size_t s = 0; s <= t && s < left.size(); ++s) {
            total += left[s].norm_squared() + right[s].norm_squared();
        }
        return total;
    }
};

/// Walk on the segment [0, 2^l] started at 2^(l-1) under the field's coins,
/// with fully absorbing walls: amplitude landing on a wall is recorded and
/// removed.
inline AbsorptionRecord evolve_absorbing(const CoinField& field, int l, const Spinor& psi_ic,
                                         std::int64_t t_max) {
    detail::require(l >= 1 && l < 62, "evolve_absorbing: l must be >= 1");
    detail::require(t_max >= 1, "evolve_absorbing: t_max must be >= 1");
    detail::require(std::abs(psi_ic.norm_squared() - 1.0) < 1e-12,
                    "initial spinor must be normalized");
    const std::int64_t wall = std::int64_t{1} << l;
    detail::require(field.half_width() >= wall - 1,
                    "evolve_absorbing: field too small for walls at 0 and 2^l");

    std::vector<CoinTable::Entry> coins(static_cast<std::size_t>(wall + 1));
    for (std::int64_t x = 1; x < wall; ++x) {
        const double theta = *field.angle(x);
        coins[static_cast<std::size_t>(x)] = {std::sin(theta), std::cos(theta), std::cos(theta),
                                              -std::sin(theta)};
    }

    const auto sites = static_cast<std::size_t>(wall + 1);
    std::vector<amplitude> up(sites), down(sites), next_up(sites), next_down(sites);
    up[static_cast<std::size_t>(wall / 2)] = psi_ic.up;
    down[static_cast<std::size_t>(wall / 2)] = psi_ic.down;

    AbsorptionRecord record;
    record.left.assign(static_cast<std::size_t>(t_max + 1), Spinor{{}, {}});
    record.right.assign(static_cast<std::size_t>(t_max + 1), Spinor{{}, {}});
    for (std::int64_t t = 1; t <= t_max; ++t) {
        std::fill(next_up.begin(), next_up.end(), amplitude{});
        std::fill(next_down.begin(), next_down.end(), amplitude{});
        for (std::size_t x = 1; x + 1 < sites; ++x) {
            const auto& c = coins[x];
            next_up[x + 1] += c.a * up[x] + c.b * down[x];
            next_down[x - 1] += c.c * up[x] + c.d * down[x];
        }
        const auto ti = static_cast<std::size_t>(t);
        record.left[ti] = {next_up[0], next_down[0]};
        record.right[ti] = {next_up[sites - 1], next_down[sites - 1]};
        next_up[0] = next_down[0] = next_up[sites - 1] = next_down[sites - 1] = amplitude{};
        std::swap(up, next_up);
        std::swap(down, next_down);
    }
    return record;
}

}  // namespace qwalk
