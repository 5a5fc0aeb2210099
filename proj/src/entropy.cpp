#include "entrochart/entropy.hpp"

#include <unsupported/Eigen/FFT>

#include <complex>

namespace entrochart {

std::string to_string(WindowConvention c) {
    return c == WindowConvention::Paper ? "paper" : "classical";
}

Eigen::VectorXd coarse_grain(const Eigen::Ref<const Eigen::VectorXd>& ys, int scale) {
    if (scale < 1) throw InvalidArgument("coarse_grain: scale must be >= 1");
    const Eigen::Index blocks = ys.size() / scale;
    Eigen::VectorXd out(blocks);
    for (Eigen::Index b = 0; b < blocks; ++b) out[b] = ys.segment(b * scale, scale).mean();
    return out;
}

std::vector<ScaleEntropy> multiscale_entropy(const Eigen::Ref<const Eigen::VectorXd>& ys,
                                             const EntropyParams& params, const std::vector<int>& scales) {
    params.validate();
    for (int s : scales) {
        if (s < 1 || ys.size() / s <= params.m + 2) {
            throw InvalidArgument("multiscale_entropy: scale " + std::to_string(s) + " too large for N=" +
                                  std::to_string(ys.size()));
        }
    }
    std::vector<ScaleEntropy> out;
    out.reserve(scales.size());
    for (int s : scales) {
        const Eigen::VectorXd coarse = coarse_grain(ys, s);
        out.push_back({s, approx_entropy(coarse, params)});
    }
    return out;
}

EntropyScore pae(const TimeSeries& series, const ChartDims& dims, const EntropyParams& params) {
    return approx_entropy(rasterize(series, dims).ys(), params);
}

double flattened_length(const PixelSeries& ps) {
    const auto& y = ps.ys();
    const Eigen::Index n = y.size();
    const Eigen::ArrayXd dy = y.tail(n - 1) - y.head(n - 1);
    return (1.0 + dy.square()).sqrt().sum();
}

std::optional<double> autocorr_lag1(const PixelSeries& ps) {
    const auto& y = ps.ys();
    const Eigen::Index n = y.size();
    const Eigen::ArrayXd a = y.head(n - 1).array() - y.head(n - 1).mean();
    const Eigen::ArrayXd b = y.tail(n - 1).array() - y.tail(n - 1).mean();
    const double saa = a.square().sum();
    const double sbb = b.square().sum();
    if (saa <= 0.0 || sbb <= 0.0) return std::nullopt;
    return std::clamp((a * b).sum() / std::sqrt(saa * sbb), -1.0, 1.0);
}

std::optional<double> fourier_highfreq_ratio(const PixelSeries& ps, double cutoff_fraction) {
    if (!(cutoff_fraction > 0.0 && cutoff_fraction < 1.0)) {
        throw InvalidArgument("fourier_highfreq_ratio: cutoff_fraction must be in (0, 1)");
    }
    const Eigen::Index n = ps.size();
    if (n < 8) throw InvalidArgument("fourier_highfreq_ratio: need N >= 8");

    std::vector<double> centered(static_cast<std::size_t>(n));
    const double mean = ps.ys().mean();
    for (Eigen::Index i = 0; i < n; ++i) centered[static_cast<std::size_t>(i)] = ps.ys()[i] - mean;
    Eigen::FFT<double> fft;
    std::vector<std::complex<double>> spectrum;
    fft.fwd(spectrum, centered);

    const Eigen::Index nyquist_bin = n / 2;
    double total = 0.0;
    double high = 0.0;
    for (Eigen::Index k = 1; k <= nyquist_bin; ++k) {
        const bool unpaired = (n % 2 == 0) && k == nyquist_bin;
        const double power = (unpaired ? 1.0 : 2.0) * std::norm(spectrum[static_cast<std::size_t>(k)]);
        total += power;
        if (static_cast<double>(k) / (n / 2.0) > cutoff_fraction) high += power;
    }
    // Rounding residue of a constant series is not "power".
    if (total <= 1e-18 * static_cast<double>(n) * static_cast<double>(n)) return std::nullopt;
    return high / total;
}

}  // namespace entrochart
