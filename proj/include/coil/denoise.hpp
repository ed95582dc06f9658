#pragma once

#include "coil/image.hpp"
#include "coil/tv.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace coil {

enum class DenoiserKind { identity, gaussian, tv };

/// Pluggable AWGN denoiser D_sigma. sigma is the kernel width for gaussian
/// and the prox weight for tv; identity ignores it.
struct DenoiserSpec {
    DenoiserKind kind = DenoiserKind::gaussian;
    double sigma = 1.0;

    void validate() const {
        if (sigma < 0) throw std::invalid_argument("DenoiserSpec: sigma must be nonnegative");
    }
};

namespace detail {

/// Normalized 1D Gaussian taps truncated at radius ceil(3*sigma).
template <typename Scalar>
std::vector<Scalar> gaussian_kernel(Scalar sigma) {
    const auto radius = static_cast<int>(std::ceil(3.0 * static_cast<double>(sigma)));
    std::vector<Scalar> k(static_cast<std::size_t>(2 * radius + 1));
    Scalar sum = Scalar(0);
    for (int i = -radius; i <= radius; ++i) {
        const Scalar w = std::exp(-Scalar(i) * Scalar(i) / (Scalar(2) * sigma * sigma));
        k[static_cast<std::size_t>(i + radius)] = w;
        sum += w;
    }
    for (auto& w : k) w /= sum;
    return k;
}

/// Separable convolution with replicate boundary; equivalent to the 2D
/// tensor-product kernel because replicate padding is itself separable.
template <typename Scalar>
PixelMatrix<Scalar> gaussian_filter(const PixelMatrix<Scalar>& x, Scalar sigma) {
    const auto kernel = gaussian_kernel(sigma);
    const int radius = (static_cast<int>(kernel.size()) - 1) / 2;
    const Eigen::Index n = x.rows();
    PixelMatrix<Scalar> tmp(n, n), out(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) {
            Scalar acc = Scalar(0);
            for (int t = -radius; t <= radius; ++t) {
                const Eigen::Index jj = std::min<Eigen::Index>(n - 1, std::max<Eigen::Index>(0, j + t));
                acc += kernel[static_cast<std::size_t>(t + radius)] * x(i, jj);
            }
            tmp(i, j) = acc;
        }
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) {
            Scalar acc = Scalar(0);
            for (int t = -radius; t <= radius; ++t) {
                const Eigen::Index ii = std::min<Eigen::Index>(n - 1, std::max<Eigen::Index>(0, i + t));
                acc += kernel[static_cast<std::size_t>(t + radius)] * tmp(ii, j);
            }
            out(i, j) = acc;
        }
    return out;
}

} // namespace detail

template <typename Scalar>
Image<Scalar> denoise(const DenoiserSpec& spec, const Image<Scalar>& x) {
    spec.validate();
    switch (spec.kind) {
        case DenoiserKind::identity:
            return x;
        case DenoiserKind::gaussian: {
            if (spec.sigma == 0) return x;
            Image<Scalar> out(x.side(), x.pixel_size);
            out.pixels = detail::gaussian_filter(x.pixels, static_cast<Scalar>(spec.sigma));
            return out;
        }
        case DenoiserKind::tv:
            if (spec.sigma == 0) return x;
            return tv_prox(x, static_cast<Scalar>(spec.sigma));
    }
    throw std::invalid_argument("denoise: unknown denoiser kind");
}

} // namespace coil
