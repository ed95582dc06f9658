#pragma once

#include "coil/image.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>

namespace coil {

namespace detail {

/// Forward differences with replicate boundary (last row/column difference
/// is zero), matching the discrete gradient used by tv_value and tv_prox.
template <typename Scalar>
void image_gradient(const PixelMatrix<Scalar>& x, PixelMatrix<Scalar>& gx,
                    PixelMatrix<Scalar>& gy) {
    const Eigen::Index n = x.rows();
    gx.setZero(n, n);
    gy.setZero(n, n);
    if (n < 2) return;
    gx.leftCols(n - 1) = x.rightCols(n - 1) - x.leftCols(n - 1);
    gy.topRows(n - 1) = x.bottomRows(n - 1) - x.topRows(n - 1);
}

/// Negative adjoint of image_gradient.
template <typename Scalar>
void image_divergence(const PixelMatrix<Scalar>& px, const PixelMatrix<Scalar>& py,
                      PixelMatrix<Scalar>& div) {
    const Eigen::Index n = px.rows();
    div.setZero(n, n);
    if (n < 2) return;
    div.leftCols(n - 1) += px.leftCols(n - 1);
    div.rightCols(n - 1) -= px.leftCols(n - 1);
    div.topRows(n - 1) += py.topRows(n - 1);
    div.bottomRows(n - 1) -= py.topRows(n - 1);
}

} // namespace detail

/// Isotropic total variation: tau * sum of sqrt(dx^2 + dy^2) over pixels.
template <typename Scalar>
Scalar tv_value(const Image<Scalar>& x, Scalar tau) {
    if (tau < Scalar(0)) throw std::invalid_argument("tv_value: tau must be nonnegative");
    if (tau == Scalar(0)) return Scalar(0);
    PixelMatrix<Scalar> gx, gy;
    detail::image_gradient(x.pixels, gx, gy);
    return tau * (gx.array().square() + gy.array().square()).sqrt().sum();
}

/// Proximal operator of mu*TV via Chambolle's dual projection method with a
/// fixed inner iteration count. The dual field stays inside the unit ball
/// by construction, which certifies feasibility of the returned point.
template <typename Scalar>
Image<Scalar> tv_prox(const Image<Scalar>& x, Scalar mu, int inner_iters = 30,
                      Scalar dual_step = Scalar(0.248)) {
    if (!(mu > Scalar(0))) throw std::invalid_argument("tv_prox: mu must be positive");
    const Eigen::Index n = x.side();
    PixelMatrix<Scalar> px = PixelMatrix<Scalar>::Zero(n, n);
    PixelMatrix<Scalar> py = PixelMatrix<Scalar>::Zero(n, n);
    PixelMatrix<Scalar> div, u, gx, gy;
    for (int it = 0; it < inner_iters; ++it) {
        detail::image_divergence(px, py, div);
        u = div - x.pixels / mu;
        detail::image_gradient(u, gx, gy);
        const auto mag = (gx.array().square() + gy.array().square()).sqrt();
        const auto denom = (Scalar(1) + dual_step * mag).matrix();
        px = (px + dual_step * gx).cwiseQuotient(denom);
        py = (py + dual_step * gy).cwiseQuotient(denom);
    }
    detail::image_divergence(px, py, div);
    Image<Scalar> out(n, x.pixel_size);
    out.pixels = x.pixels - mu * div;
    return out;
}

} // namespace coil
