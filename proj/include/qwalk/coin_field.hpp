#pragma once

// Position-dependent coins on the line: hierarchical barrier schedule plus
// optional per-level (sub-extensive) or per-site (extensive) randomness.

#include <bit>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "qwalk/error.hpp"

namespace qwalk {

using Coin = Eigen::Matrix2cd;

/// Centre of the angle distribution; the Hadamard angle.
inline constexpr double kHadamardAngle = std::numbers::pi / 4;

/// Angles of the general unitary 2x2 coin
///   [[sin t, e^{i chi} cos t], [e^{i vt} cos t, -e^{i(chi+vt)} sin t]].
/// Only theta varies in this library; chi and vartheta stay 0 for every
/// field-generated coin.
struct CoinParams {
    double theta = kHadamardAngle;
    double chi = 0.0;
    double vartheta = 0.0;
};

inline Coin build_coin(const CoinParams& p) {
    using namespace std::complex_literals;
    const double s = std::sin(p.theta);
    const double c = std::cos(p.theta);
    const std::complex<double> e_chi = std::exp(1i * p.chi);
    const std::complex<double> e_vt = std::exp(1i * p.vartheta);
    Coin m;
    m << s, e_chi * c,
         e_vt * c, -e_chi * e_vt * s;
    return m;
}

/// x = 2^level * (2 * offset + 1).
struct HierarchyIndex {
    int level = 0;
    std::int64_t offset = 0;

    friend bool operator==(const HierarchyIndex&, const HierarchyIndex&) = default;
};

inline HierarchyIndex hierarchy_index(std::int64_t x) {
    detail::require(x != 0, "hierarchy_index: level of site 0 is undefined");
    const auto magnitude = x < 0 ? std::uint64_t{0} - static_cast<std::uint64_t>(x)
                                 : static_cast<std::uint64_t>(x);
    const int level = std::countr_zero(magnitude);
    const std::int64_t odd = x >> level;  // arithmetic shift, exact since the low bits are zero
    return {level, (odd - 1) / 2};
}

enum class DisorderModel { none, hierarchical, extensive };

inline std::string_view to_string(DisorderModel m) {
    switch (m) {
        case DisorderModel::none: return "none";
        case DisorderModel::hierarchical: return "hierarchical";
        case DisorderModel::extensive: return "extensive";
    }
    return "none";
}

inline DisorderModel parse_disorder_model(std::string_view name) {
    if (name == "none") return DisorderModel::none;
    if (name == "hierarchical") return DisorderModel::hierarchical;
    if (name == "extensive") return DisorderModel::extensive;
    throw precondition_error("unknown disorder model '" + std::string(name) +
                             "' (expected none|hierarchical|extensive)");
}

struct DisorderSpec {
    DisorderModel model = DisorderModel::none;
    double width = 0.0;  ///< half-width W of the uniform angle window, radians
    std::uint64_t seed = 0;
};

/// Angle stream for disorder draws.
///
/// Engine is std::mt19937_64 seeded directly with the 64-bit seed; its output
/// sequence is fixed by the standard. Uniforms are formed portably as
/// (raw >> 11) * 2^-53 rather than through std::uniform_real_distribution,
/// whose algorithm is implementation-defined.
class AngleStream {
public:
    static constexpr std::string_view kGeneratorName = "mt19937_64; u=(raw>>11)*2^-53";

    AngleStream(double width, std::uint64_t seed) : width_(width), engine_(seed) {}

    double next() {
        const double u = static_cast<double>(engine_() >> 11) * 0x1.0p-53;
        return kHadamardAngle - width_ + 2.0 * width_ * u;
    }

private:
    double width_;
    std::mt19937_64 engine_;
};

/// Draws `count` base angles from U[pi/4 - W, pi/4 + W].
/// For model none the table is the constant pi/4 and no engine is touched.
inline std::vector<double> draw_base_angles(const DisorderSpec& spec, std::size_t count) {
    detail::require(spec.width >= 0.0 && spec.width <= std::numbers::pi,
                    "disorder width W must lie in [0, pi]");
    std::vector<double> angles(count, kHadamardAngle);
    if (spec.model == DisorderModel::none) return angles;
    AngleStream stream(spec.width, spec.seed);
    for (auto& a : angles) a = stream.next();
    return angles;
}

/// Immutable site -> coin assignment on [-L, L].
///
/// Hierarchical and clean fields keep one angle per level; extensive fields
/// keep one per site (drawn in order x = -L, ..., L; the draw at x = 0 is
/// consumed but unused since the origin carries the identity coin).
class CoinField {
public:
    CoinField(double epsilon, DisorderSpec disorder, std::int64_t half_width)
        : epsilon_(epsilon), disorder_(disorder), half_width_(half_width) {
        detail::require(epsilon > 0.0 && epsilon <= 1.0, "epsilon must lie in (0, 1]");
        detail::require(half_width >= 1, "half_width must be positive");
        const auto levels = static_cast<std::size_t>(
            std::bit_width(static_cast<std::uint64_t>(half_width)));
        // eps^i by repeated multiplication keeps the table independent of libm pow.
        epsilon_powers_.resize(levels);
        double power = 1.0;
        for (auto& p : epsilon_powers_) {
            p = power;
            power *= epsilon;
        }
        switch (disorder.model) {
            case DisorderModel::none:
                draw_base_angles(disorder, 0);  // validates W
                break;
            case DisorderModel::hierarchical:
                base_angles_ = draw_base_angles(disorder, levels);
                break;
            case DisorderModel::extensive:
                base_angles_ = draw_base_angles(disorder, static_cast<std::size_t>(2 * half_width + 1));
                break;
        }
    }

    double epsilon() const noexcept { return epsilon_; }
    const DisorderSpec& disorder() const noexcept { return disorder_; }
    std::int64_t half_width() const noexcept { return half_width_; }
    int level_count() const noexcept { return static_cast<int>(epsilon_powers_.size()); }

    /// Raw draws: per level (hierarchical), per site from -L (extensive), empty (none).
    std::span<const double> base_angles() const noexcept { return base_angles_; }

    /// True when every site of a given level carries the same coin, which is
    /// what the level-by-level decimation needs.
    bool level_uniform() const noexcept { return disorder_.model != DisorderModel::extensive; }

    /// Coin angle at x; nullopt marks the identity coin at the origin.
    std::optional<double> angle(std::int64_t x) const {
        check_site(x);
        if (x == 0) return std::nullopt;
        const int level = hierarchy_index(x).level;
        return base_angle(x, level) * epsilon_powers_[static_cast<std::size_t>(level)];
    }

    /// Angle of the level-i coin; only meaningful for level-uniform fields.
    double level_angle(int level) const {
        detail::require(level_uniform(), "level_angle: extensive disorder has no per-level coin");
        detail::require(level >= 0 && level < level_count(), "level_angle: level out of range");
        const double base = disorder_.model == DisorderModel::hierarchical
                                ? base_angles_[static_cast<std::size_t>(level)]
                                : kHadamardAngle;
        return base * epsilon_powers_[static_cast<std::size_t>(level)];
    }

    Coin coin(std::int64_t x) const {
        const auto theta = angle(x);
        if (!theta) return Coin::Identity();
        return build_coin({*theta, 0.0, 0.0});
    }

    Coin level_coin(int level) const { return build_coin({level_angle(level), 0.0, 0.0}); }

private:
    void check_site(std::int64_t x) const {
        detail::require(x >= -half_width_ && x <= half_width_,
                        "site " + std::to_string(x) + " outside [-L, L] with L = " +
                            std::to_string(half_width_));
    }

    double base_angle(std::int64_t x, int level) const {
        switch (disorder_.model) {
            case DisorderModel::none: return kHadamardAngle;
            case DisorderModel::hierarchical: return base_angles_[static_cast<std::size_t>(level)];
            case DisorderModel::extensive: return base_angles_[static_cast<std::size_t>(x + half_width_)];
        }
        return kHadamardAngle;
    }

    double epsilon_;
    DisorderSpec disorder_;
    std::int64_t half_width_;
    std::vector<double> epsilon_powers_;
    std::vector<double> base_angles_;
};

inline std::optional<double> coin_angle(const CoinField& field, std::int64_t x) {
    return field.angle(x);
}

}  // namespace qwalk
