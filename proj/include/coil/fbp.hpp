#pragma once

#include "coil/radon.hpp"

#include <unsupported/Eigen/FFT>

#include <complex>
#include <numbers>
#include <vector>

namespace coil {

enum class FbpWindow { ram_lak, hann };

namespace detail {

inline Eigen::Index next_pow2_at_least(Eigen::Index n) {
    Eigen::Index p = 1;
    while (p < n) p <<= 1;
    return p;
}

} // namespace detail

/// Filtered backprojection. Each detector row is ramp-filtered in the
/// frequency domain (zero-padded to the next power of two >= 2D), then
/// backprojected through radon_adjoint. The pi/P factor discretizes the
/// angular integral; the 1/pixel_size^2 factor compensates the adjoint's
/// deposition density so dense-view reconstructions recover the image
/// amplitude.
template <typename Scalar>
Image<Scalar> fbp(const Sinogram<Scalar>& sinogram, Eigen::Index side,
                  FbpWindow window = FbpWindow::ram_lak, Scalar pixel_size = Scalar(1)) {
    sinogram.validate();
    const Eigen::Index p_views = sinogram.num_views();
    const Eigen::Index d = sinogram.num_detectors();
    const Eigen::Index nfft = detail::next_pow2_at_least(2 * d);

    // Ramp |freq| in cycles per detector sample, optionally Hann-tapered.
    std::vector<Scalar> ramp(static_cast<std::size_t>(nfft));
    for (Eigen::Index k = 0; k < nfft; ++k) {
        const Eigen::Index folded = std::min(k, nfft - k);
        const Scalar freq = static_cast<Scalar>(folded) / static_cast<Scalar>(nfft);
        Scalar h = freq;
        if (window == FbpWindow::hann)
            h *= Scalar(0.5) *
                 (Scalar(1) + std::cos(Scalar(2) * std::numbers::pi_v<Scalar> * freq));
        ramp[static_cast<std::size_t>(k)] = h;
    }

    Eigen::FFT<Scalar> fft;
    std::vector<std::complex<Scalar>> time(static_cast<std::size_t>(nfft));
    std::vector<std::complex<Scalar>> freq(static_cast<std::size_t>(nfft));
    Sinogram<Scalar> filtered;
    filtered.geometry = sinogram.geometry;
    filtered.responses.resize(p_views, d);
    for (Eigen::Index p = 0; p < p_views; ++p) {
        for (Eigen::Index j = 0; j < nfft; ++j)
            time[static_cast<std::size_t>(j)] =
                j < d ? std::complex<Scalar>(sinogram.responses(p, j), 0) : std::complex<Scalar>(0, 0);
        fft.fwd(freq, time);
        for (std::size_t k = 0; k < freq.size(); ++k) freq[k] *= ramp[k];
        fft.inv(time, freq);
        for (Eigen::Index j = 0; j < d; ++j)
            filtered.responses(p, j) = time[static_cast<std::size_t>(j)].real();
    }

    Image<Scalar> out = radon_adjoint(filtered, side, pixel_size);
    const Scalar scale = std::numbers::pi_v<Scalar> /
                         (static_cast<Scalar>(p_views) * pixel_size * pixel_size);
    out.pixels *= scale;
    return out;
}

} // namespace coil
