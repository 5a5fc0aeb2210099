#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "entrochart/errors.hpp"
#include "entrochart/raster.hpp"
#include "entrochart/series.hpp"

namespace entrochart {

/// How a window of "size m" is formed and whether a window matches itself.
///
///  - Classical: m samples per window, W = N - m + 1, the self-match is
///    counted, so every similarity is >= 1/W and phi is always defined.
///  - Paper: m + 1 samples per window (indices i..i+m), W = N - m, the
///    self-match is excluded; phi is undefined when some window matches
///    nothing.
///
/// Both use the strict test d < r.
enum class WindowConvention { Classical, Paper };

std::string to_string(WindowConvention c);

struct EntropyParams {
    int m = 2;
    double r = 20.0;  ///< pixel units
    WindowConvention convention = WindowConvention::Classical;

    void validate() const {
        if (m < 1) throw InvalidArgument("entropy window length m must be >= 1");
        if (!(r > 0.0)) throw InvalidArgument("entropy tolerance r must be > 0");
    }
    /// Samples per window of size m.
    int window_samples() const { return convention == WindowConvention::Paper ? m + 1 : m; }
};

/// Entropy in nats. An empty `value` means the estimate is undefined
/// (a log of zero matches); callers must check `defined()`.
struct EntropyScore {
    std::optional<double> value;
    EntropyParams params;
    Eigen::Index n = 0;

    bool defined() const noexcept { return value.has_value(); }
    double operator*() const { return value.value(); }
};

/// max_{k in [0, m]} |ys[i+k] - ys[j+k]|. Spans m + 1 samples.
template <typename Derived>
typename Derived::Scalar window_distance(const Eigen::MatrixBase<Derived>& ys, Eigen::Index i, Eigen::Index j,
                                         int m) {
    using Scalar = typename Derived::Scalar;
    if (m < 0 || i < 0 || j < 0 || i + m >= ys.size() || j + m >= ys.size()) {
        throw InvalidArgument("window_distance: window out of range");
    }
    Scalar d(0);
    for (int k = 0; k <= m; ++k) {
        using std::abs;
        d = std::max(d, Scalar(abs(ys(i + k) - ys(j + k))));
    }
    return d;
}

namespace detail {

/// Match counts for windows of `len` and `len + 1` samples, self-matches
/// excluded. Each unordered pair is visited once; the longer window's test
/// reuses the shorter window's distance.
template <typename Derived>
std::pair<std::vector<long>, std::vector<long>> match_counts(const Eigen::MatrixBase<Derived>& ys, int len,
                                                              typename Derived::Scalar r) {
    using Scalar = typename Derived::Scalar;
    using std::abs;
    const Eigen::Index n = ys.size();
    const Eigen::Index w_short = n - len + 1;
    const Eigen::Index w_long = n - len;
    std::vector<long> c_short(static_cast<std::size_t>(std::max<Eigen::Index>(w_short, 0)), 0);
    std::vector<long> c_long(static_cast<std::size_t>(std::max<Eigen::Index>(w_long, 0)), 0);
    for (Eigen::Index lag = 1; lag < w_short; ++lag) {
        for (Eigen::Index i = 0; i + lag < w_short; ++i) {
            const Eigen::Index j = i + lag;
            Scalar d(0);
            int k = 0;
            for (; k < len; ++k) {
                d = std::max(d, Scalar(abs(ys(i + k) - ys(j + k))));
                if (!(d < r)) break;
            }
            if (k < len) continue;
            ++c_short[static_cast<std::size_t>(i)];
            ++c_short[static_cast<std::size_t>(j)];
            if (j < w_long && abs(ys(i + len) - ys(j + len)) < r) {
                ++c_long[static_cast<std::size_t>(i)];
                ++c_long[static_cast<std::size_t>(j)];
            }
        }
    }
    return {std::move(c_short), std::move(c_long)};
}

/// Logs are summed in ascending count order, so any permutation of the
/// windows (a reversed series, for one) gives a bitwise identical phi.
inline std::optional<double> phi_from_counts(std::vector<long> counts, bool self_match) {
    const auto w = static_cast<double>(counts.size());
    std::sort(counts.begin(), counts.end());
    double sum = 0.0;
    for (long c : counts) {
        const long total = c + (self_match ? 1 : 0);
        if (total == 0) return std::nullopt;
        sum += std::log(static_cast<double>(total) / w);
    }
    return sum / w;
}

inline void require_length(Eigen::Index n, const EntropyParams& params, const char* what) {
    params.validate();
    if (n <= params.m + 2) {
        throw InvalidArgument(std::string(what) + ": series length " + std::to_string(n) +
                              " too short for m=" + std::to_string(params.m) + " (need N > m + 2)");
    }
}

}  // namespace detail

/// Mean log similarity over all windows of size m at tolerance r.
template <typename Derived>
std::optional<double> phi(const Eigen::MatrixBase<Derived>& ys, int m, double r,
                          WindowConvention convention = WindowConvention::Classical) {
    const EntropyParams params{m, r, convention};
    params.validate();
    const int len = params.window_samples();
    if (ys.size() - len + 1 < 2) throw InvalidArgument("phi: fewer than 2 windows");
    auto counts = detail::match_counts(ys, len, typename Derived::Scalar(r)).first;
    return detail::phi_from_counts(counts, convention == WindowConvention::Classical);
}

/// E(m, r, N) = phi^m(r) - phi^{m+1}(r). Both phi terms come from a single
/// O(N^2 * len) pass over window pairs.
template <typename Derived>
EntropyScore approx_entropy(const Eigen::MatrixBase<Derived>& ys, const EntropyParams& params = {}) {
    detail::require_length(ys.size(), params, "approx_entropy");
    const bool self = params.convention == WindowConvention::Classical;
    const auto [c_m, c_m1] =
        detail::match_counts(ys, params.window_samples(), typename Derived::Scalar(params.r));
    EntropyScore score{std::nullopt, params, ys.size()};
    const auto a = detail::phi_from_counts(c_m, self);
    const auto b = detail::phi_from_counts(c_m1, self);
    if (a && b) score.value = *a - *b;
    return score;
}

/// -log(A / B): B counts template pairs (i < j, self excluded) matching over
/// the convention's window length, A those still matching one sample longer.
/// Templates are the first N - len, so A and B range over the same pairs.
template <typename Derived>
EntropyScore sample_entropy(const Eigen::MatrixBase<Derived>& ys, const EntropyParams& params = {}) {
    using Scalar = typename Derived::Scalar;
    using std::abs;
    detail::require_length(ys.size(), params, "sample_entropy");
    const int len = params.window_samples();
    const Eigen::Index templates = ys.size() - len;
    const Scalar r(params.r);
    long a = 0;
    long b = 0;
    for (Eigen::Index i = 0; i < templates; ++i) {
        for (Eigen::Index j = i + 1; j < templates; ++j) {
            Scalar d(0);
            int k = 0;
            for (; k < len; ++k) {
                d = std::max(d, Scalar(abs(ys(i + k) - ys(j + k))));
                if (!(d < r)) break;
            }
            if (k < len) continue;
            ++b;
            if (abs(ys(i + len) - ys(j + len)) < r) ++a;
        }
    }
    EntropyScore score{std::nullopt, params, ys.size()};
    if (a > 0 && b > 0) score.value = std::log(static_cast<double>(b) / static_cast<double>(a));
    return score;
}

/// Non-overlapping block means of `scale` consecutive samples (trailing partial block dropped).
Eigen::VectorXd coarse_grain(const Eigen::Ref<const Eigen::VectorXd>& ys, int scale);

struct ScaleEntropy {
    int scale;
    EntropyScore score;
};

/// approx_entropy of each coarse-grained series. Throws InvalidArgument naming
/// the first scale whose coarse length is <= m + 2.
std::vector<ScaleEntropy> multiscale_entropy(const Eigen::Ref<const Eigen::VectorXd>& ys,
                                             const EntropyParams& params, const std::vector<int>& scales);

/// Pixel approximate entropy: approx_entropy of the rasterized column values.
EntropyScore pae(const TimeSeries& series, const ChartDims& dims = {}, const EntropyParams& params = {});
inline EntropyScore pae(const PixelSeries& ps, const EntropyParams& params = {}) {
    return approx_entropy(ps.ys(), params);
}

/// Polyline arc length in pixel units; >= N - 1.
double flattened_length(const PixelSeries& ps);

/// Lag-1 Pearson correlation; undefined when either lagged half has zero variance.
std::optional<double> autocorr_lag1(const PixelSeries& ps);

/// Fraction of one-sided, mean-removed spectral power in bins above
/// cutoff_fraction * Nyquist. Undefined when total power is zero.
std::optional<double> fourier_highfreq_ratio(const PixelSeries& ps, double cutoff_fraction = 0.25);

}  // namespace entrochart
