#pragma once

// Spreading measurements: RMS displacement, the 1/log t extrapolation of the
// walk dimension, and the transport classification built on it.

#include <cmath>
#include <cstdint>
#include <string_view>
#include <vector>

#include "qwalk/coin_field.hpp"
#include "qwalk/error.hpp"
#include "qwalk/walker.hpp"

namespace qwalk {

struct SigmaSample {
    std::int64_t t = 0;
    double sigma = 0.0;
};

struct SeriesMeta {
    double epsilon = 1.0;
    double width = 0.0;
    DisorderModel model = DisorderModel::none;
    std::uint64_t seed = 0;
};

/// sigma(t) trajectory of one evolution (or an instance average).
struct SigmaSeries {
    std::vector<SigmaSample> samples;
    SeriesMeta meta;
};

/// Standard deviation of the position distribution rho(x) = |up|^2 + |down|^2.
inline double sigma(const WaveState& state) {
    double first = 0.0;
    double second = 0.0;
    state.for_each_density([&](std::int64_t x, double rho) {
        const auto xd = static_cast<double>(x);
        first += xd * rho;
        second += xd * xd * rho;
    });
    const double variance = second - first * first;
    return variance > 0.0 ? std::sqrt(variance) : 0.0;
}

/// Powers of two and their midpoints (samples_per_octave = 2) up to t_max;
/// larger values subdivide each octave evenly.
inline std::vector<std::int64_t> geometric_sample_times(std::int64_t t_max, int samples_per_octave = 2) {
    detail::require(t_max >= 1, "sample grid: t_max must be >= 1");
    detail::require(samples_per_octave >= 1, "sample grid: samples_per_octave must be >= 1");
    std::vector<std::int64_t> times;
    for (std::int64_t octave = 1; octave <= t_max; octave *= 2) {
        for (int j = 0; j < samples_per_octave; ++j) {
            const std::int64_t t = octave + (octave * j) / samples_per_octave;
            if (t > t_max) break;
            if (times.empty() || t > times.back()) times.push_back(t);
        }
        if (octave > t_max / 2) break;
    }
    return times;
}

/// One point of the extrapolation plot, X = 1/ln t and Y = ln sigma / ln t.
struct ExtrapolationPoint {
    std::int64_t t = 0;
    double x = 0.0;
    double y = 0.0;
};

/// Points with t < 2 (ln t = 0) or sigma = 0 are dropped.
inline std::vector<ExtrapolationPoint> extrapolation_points(const SigmaSeries& series) {
    std::vector<ExtrapolationPoint> points;
    points.reserve(series.samples.size());
    for (const auto& s : series.samples) {
        if (s.t < 2 || !(s.sigma > 0.0)) continue;
        const double log_t = std::log(static_cast<double>(s.t));
        points.push_back({s.t, 1.0 / log_t, std::log(s.sigma) / log_t});
    }
    return points;
}

struct TimeWindow {
    std::int64_t lo = 0;
    std::int64_t hi = 0;

    bool contains(std::int64_t t) const noexcept { return t >= lo && t <= hi; }
};

/// Last four octaves: [t_max / 16, t_max].
inline TimeWindow default_window(std::int64_t t_max) { return {t_max / 16, t_max}; }

struct FitResult {
    double inv_dw = 0.0;         ///< intercept at X = 0
    double log_amplitude = 0.0;  ///< slope, ln A
    double std_error = 0.0;      ///< standard error of the intercept
    TimeWindow window;
    int points = 0;
};

/// Ordinary least squares of Y on X over the points inside the window.
inline FitResult fit_inv_dw(const std::vector<ExtrapolationPoint>& points, TimeWindow window) {
    double n = 0, sx = 0, sy = 0;
    for (const auto& p : points) {
        if (!window.contains(p.t)) continue;
        n += 1;
        sx += p.x;
        sy += p.y;
    }
    detail::require(n >= 3, "fit_inv_dw: need at least 3 points in window [" +
                                std::to_string(window.lo) + ", " + std::to_string(window.hi) + "]");
    const double mx = sx / n;
    const double my = sy / n;
    double sxx = 0, sxy = 0, sxx_raw = 0;
    for (const auto& p : points) {
        if (!window.contains(p.t)) continue;
        sxx += (p.x - mx) * (p.x - mx);
        sxy += (p.x - mx) * (p.y - my);
        sxx_raw += p.x * p.x;
    }
    detail::require(sxx > 0.0, "fit_inv_dw: degenerate abscissae");
    FitResult fit;
    fit.log_amplitude = sxy / sxx;
    fit.inv_dw = my - fit.log_amplitude * mx;
    double rss = 0;
    for (const auto& p : points) {
        if (!window.contains(p.t)) continue;
        const double r = p.y - (fit.inv_dw + fit.log_amplitude * p.x);
        rss += r * r;
    }
    const double s2 = rss / (n - 2);
    fit.std_error = std::sqrt(s2 * sxx_raw / (n * sxx));
    fit.window = window;
    fit.points = static_cast<int>(n);
    return fit;
}

/// Walk dimension of the clean hierarchical walk, d_w = 1/2 + log2(1 + eps^-2)/2.
inline double predicted_dw(double epsilon) {
    detail::require(epsilon > 0.0 && epsilon <= 1.0, "predicted_dw: epsilon must lie in (0, 1]");
    return 0.5 + 0.5 * std::log2(1.0 + 1.0 / (epsilon * epsilon));
}

inline double predicted_inv_dw(double epsilon) { return 1.0 / predicted_dw(epsilon); }

/// Conjectured quantum/classical relation for homogeneous walks, d_w^Q = d_w^R / 2.
/// Reference only; nothing here relies on it under disorder.
inline constexpr double quantum_walk_dimension_from_classical(double classical_dw) {
    return classical_dw / 2.0;
}

enum class Transport { localized, transporting, inconclusive };

inline std::string_view to_string(Transport t) {
    switch (t) {
        case Transport::localized: return "localized";
        case Transport::transporting: return "transporting";
        case Transport::inconclusive: return "inconclusive";
    }
    return "inconclusive";
}

inline constexpr double kLocalizationThreshold = 0.05;

/// Two-sigma test of the intercept against the threshold.
inline Transport classify(double inv_dw, double std_error, double threshold = kLocalizationThreshold) {
    if (inv_dw + 2.0 * std_error < threshold) return Transport::localized;
    if (inv_dw - 2.0 * std_error > threshold) return Transport::transporting;
    return Transport::inconclusive;
}

inline Transport classify(const FitResult& fit, double threshold = kLocalizationThreshold) {
    return classify(fit.inv_dw, fit.std_error, threshold);
}

}  // namespace qwalk
