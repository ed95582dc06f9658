#pragma once

#include "coil/radon.hpp"
#include "coil/rng.hpp"

#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace coil {

/// Additive white Gaussian noise at a prescribed input SNR (dB).
struct NoiseSpec {
    double input_snr_db = 40.0;
    std::uint64_t seed = 0;
};

/// Returns y + e with e white Gaussian rescaled so that
/// 20*log10(|y|/|e|) equals input_snr_db by construction.
template <typename Scalar>
Sinogram<Scalar> add_noise(const Sinogram<Scalar>& sinogram, const NoiseSpec& noise) {
    sinogram.validate();
    const Scalar y_norm = sinogram.responses.norm();
    if (y_norm == Scalar(0))
        throw std::invalid_argument("add_noise: input SNR undefined for an all-zero sinogram");

    Sinogram<Scalar> out = sinogram;
    Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> e(
        sinogram.responses.rows(), sinogram.responses.cols());
    Rng rng(noise.seed);
    for (Eigen::Index i = 0; i < e.size(); ++i)
        e.data()[i] = static_cast<Scalar>(rng.gaussian());
    const Scalar target = y_norm * std::pow(Scalar(10), -static_cast<Scalar>(noise.input_snr_db) / Scalar(20));
    out.responses += e * (target / e.norm());
    return out;
}

} // namespace coil
