#pragma once

#include "coil/geometry.hpp"
#include "coil/image.hpp"
#include "coil/rng.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace coil {

/// Measurement matrix for one acquisition: responses(p, j) is the line
/// integral at view p, detector j. Row-major, so the flat layout is
/// view-major as produced by coordinates_of.
template <typename Scalar>
struct Sinogram {
    Geometry<Scalar> geometry;
    Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> responses;

    Eigen::Index num_views() const { return responses.rows(); }
    Eigen::Index num_detectors() const { return responses.cols(); }

    void validate() const {
        geometry.validate();
        if (responses.rows() != geometry.num_views() ||
            responses.cols() != geometry.num_detectors())
            throw std::invalid_argument("Sinogram: responses shape does not match geometry");
    }
};

using SinogramD = Sinogram<double>;

namespace detail {

/// The detector line spans the image diagonal, centered on the image, so a
/// normalized position l in [0, 1] maps to the physical offset below.
template <typename Scalar>
Scalar detector_span(Eigen::Index side, Scalar pixel_size) {
    return std::numbers::sqrt2_v<Scalar> * static_cast<Scalar>(side) * pixel_size;
}

/// Walks every ray of the geometry with a fixed half-pixel step and hands
/// each bilinear sample (4 pixel taps) to the sink. Both the projector and
/// its adjoint are built on this single walker, which makes the adjoint the
/// literal transpose of the forward discretization.
///
/// Sink signature: (view, detector, pixel_index, weight) where weight
/// already includes the arc-length step.
template <typename Scalar, typename Sink>
void for_each_ray_sample(const Geometry<Scalar>& geometry, Eigen::Index side, Scalar pixel_size,
                         Sink&& sink) {
    const Scalar span = detector_span(side, pixel_size);
    const Scalar s_max = Scalar(0.5) * span;
    const Scalar step = Scalar(0.5) * pixel_size;
    const auto n_steps = static_cast<Eigen::Index>(std::ceil(span / step));
    const Scalar half = Scalar(0.5) * pixel_size * static_cast<Scalar>(side);
    const Scalar inv_ps = Scalar(1) / pixel_size;

    for (Eigen::Index p = 0; p < geometry.num_views(); ++p) {
        const Scalar c = std::cos(geometry.angles[p]);
        const Scalar s = std::sin(geometry.angles[p]);
        for (Eigen::Index j = 0; j < geometry.num_detectors(); ++j) {
            const Scalar t = (geometry.detector_positions[j] - Scalar(0.5)) * span;
            // Ray point: (t*c - u*s, t*s + u*c) for arc parameter u.
            const Scalar u0 = -s_max + Scalar(0.5) * step;
            Scalar x = t * c - u0 * s;
            Scalar y = t * s + u0 * c;
            const Scalar dx = -s * step;
            const Scalar dy = c * step;
            // Fractional pixel indices; row 0 is the top of the scene.
            Scalar fj = (x + half) * inv_ps - Scalar(0.5);
            Scalar fi = (half - y) * inv_ps - Scalar(0.5);
            const Scalar dfj = dx * inv_ps;
            const Scalar dfi = -dy * inv_ps;
            for (Eigen::Index k = 0; k < n_steps; ++k, fi += dfi, fj += dfj) {
                const Scalar fli = std::floor(fi);
                const Scalar flj = std::floor(fj);
                const auto i0 = static_cast<Eigen::Index>(fli);
                const auto j0 = static_cast<Eigen::Index>(flj);
                if (i0 < -1 || i0 >= side || j0 < -1 || j0 >= side) continue;
                const Scalar di = fi - fli;
                const Scalar dj = fj - flj;
                const Scalar w00 = (Scalar(1) - di) * (Scalar(1) - dj) * step;
                const Scalar w01 = (Scalar(1) - di) * dj * step;
                const Scalar w10 = di * (Scalar(1) - dj) * step;
                const Scalar w11 = di * dj * step;
                const bool i0_ok = i0 >= 0;
                const bool i1_ok = i0 + 1 < side;
                const bool j0_ok = j0 >= 0;
                const bool j1_ok = j0 + 1 < side;
                const Eigen::Index base = i0 * side + j0;
                if (i0_ok && j0_ok) sink(p, j, base, w00);
                if (i0_ok && j1_ok) sink(p, j, base + 1, w01);
                if (i1_ok && j0_ok) sink(p, j, base + side, w10);
                if (i1_ok && j1_ok) sink(p, j, base + side + 1, w11);
            }
        }
    }
}

} // namespace detail

/// Ray-driven parallel-beam projector: line integrals by midpoint marching
/// with bilinear interpolation at half-pixel steps. Linear in the image.
template <typename Scalar>
Sinogram<Scalar> radon_forward(const Image<Scalar>& image, const Geometry<Scalar>& geometry) {
    geometry.validate();
    Sinogram<Scalar> sino;
    sino.geometry = geometry;
    sino.responses.setZero(geometry.num_views(), geometry.num_detectors());
    const Scalar* px = image.data();
    Scalar* out = sino.responses.data();
    const Eigen::Index d = geometry.num_detectors();
    detail::for_each_ray_sample(geometry, image.side(), image.pixel_size,
                                [px, out, d](Eigen::Index p, Eigen::Index j, Eigen::Index idx,
                                             Scalar w) { out[p * d + j] += w * px[idx]; });
    return sino;
}

/// Exact transpose of radon_forward for the same (side, pixel_size)
/// discretization: every interpolation weight is deposited back.
template <typename Scalar>
Image<Scalar> radon_adjoint(const Sinogram<Scalar>& sinogram, Eigen::Index side,
                            Scalar pixel_size = Scalar(1)) {
    sinogram.validate();
    if (side <= 0) throw std::invalid_argument("radon_adjoint: side must be positive");
    Image<Scalar> image(side, pixel_size);
    Scalar* px = image.data();
    const Scalar* in = sinogram.responses.data();
    const Eigen::Index d = sinogram.num_detectors();
    detail::for_each_ray_sample(sinogram.geometry, side, pixel_size,
                                [px, in, d](Eigen::Index p, Eigen::Index j, Eigen::Index idx,
                                            Scalar w) { px[idx] += w * in[p * d + j]; });
    return image;
}

} // namespace coil
