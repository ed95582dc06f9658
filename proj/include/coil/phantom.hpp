#pragma once

#include "coil/image.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace coil {

/// One phantom ellipse: additive intensity, semi-axes, center, rotation.
template <typename Scalar>
struct PhantomEllipse {
    Scalar intensity;
    Scalar a, b;   // semi-axes in the [-1, 1] phantom frame
    Scalar x0, y0; // center
    Scalar phi;    // rotation in radians, counter-clockwise
};

/// The ten Shepp-Logan ellipses with the modified (Toft) intensities, which
/// keep the summed phantom inside [0, 1].
template <typename Scalar>
std::array<PhantomEllipse<Scalar>, 10> shepp_logan_ellipses() {
    const Scalar deg = std::numbers::pi_v<Scalar> / Scalar(180);
    return {{
        {Scalar(1.0), Scalar(0.69), Scalar(0.92), Scalar(0.0), Scalar(0.0), Scalar(0)},
        {Scalar(-0.8), Scalar(0.6624), Scalar(0.8740), Scalar(0.0), Scalar(-0.0184), Scalar(0)},
        {Scalar(-0.2), Scalar(0.1100), Scalar(0.3100), Scalar(0.22), Scalar(0.0), Scalar(-18) * deg},
        {Scalar(-0.2), Scalar(0.1600), Scalar(0.4100), Scalar(-0.22), Scalar(0.0), Scalar(18) * deg},
        {Scalar(0.1), Scalar(0.2100), Scalar(0.2500), Scalar(0.0), Scalar(0.35), Scalar(0)},
        {Scalar(0.1), Scalar(0.0460), Scalar(0.0460), Scalar(0.0), Scalar(0.1), Scalar(0)},
        {Scalar(0.1), Scalar(0.0460), Scalar(0.0460), Scalar(0.0), Scalar(-0.1), Scalar(0)},
        {Scalar(0.1), Scalar(0.0460), Scalar(0.0230), Scalar(-0.08), Scalar(-0.605), Scalar(0)},
        {Scalar(0.1), Scalar(0.0230), Scalar(0.0230), Scalar(0.0), Scalar(-0.606), Scalar(0)},
        {Scalar(0.1), Scalar(0.0230), Scalar(0.0460), Scalar(0.06), Scalar(-0.605), Scalar(0)},
    }};
}

/// Shepp-Logan phantom sampled at pixel centers on [-1, 1]^2, row 0 at the
/// top (y = +1 edge). Values are clamped to [0, 1].
template <typename Scalar = double>
Image<Scalar> make_shepp_logan(Eigen::Index side) {
    if (side < 16) throw std::invalid_argument("make_shepp_logan: side must be >= 16");
    const auto ellipses = shepp_logan_ellipses<Scalar>();
    Image<Scalar> img(side);
    const Scalar step = Scalar(2) / static_cast<Scalar>(side);
    for (Eigen::Index i = 0; i < side; ++i) {
        const Scalar y = Scalar(1) - (static_cast<Scalar>(i) + Scalar(0.5)) * step;
        for (Eigen::Index j = 0; j < side; ++j) {
            const Scalar x = Scalar(-1) + (static_cast<Scalar>(j) + Scalar(0.5)) * step;
            Scalar v = Scalar(0);
            for (const auto& e : ellipses) {
                const Scalar c = std::cos(e.phi), s = std::sin(e.phi);
                const Scalar dx = x - e.x0, dy = y - e.y0;
                const Scalar u = (dx * c + dy * s) / e.a;
                const Scalar w = (-dx * s + dy * c) / e.b;
                if (u * u + w * w <= Scalar(1)) v += e.intensity;
            }
            img.pixels(i, j) = std::min(Scalar(1), std::max(Scalar(0), v));
        }
    }
    return img;
}

} // namespace coil
