#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "coil/fbp.hpp"
#include "coil/metrics.hpp"
#include "coil/noise.hpp"
#include "coil/phantom.hpp"
#include "coil/radon.hpp"
#include "coil/rng.hpp"

#include <cmath>

using namespace coil;

namespace {

ImageD random_image(Eigen::Index side, Rng& rng) {
    ImageD img(side);
    for (Eigen::Index i = 0; i < img.size(); ++i) img.data()[i] = rng.uniform(-1.0, 1.0);
    return img;
}

SinogramD random_sinogram(const GeometryD& g, Rng& rng) {
    SinogramD s;
    s.geometry = g;
    s.responses.resize(g.num_views(), g.num_detectors());
    for (Eigen::Index i = 0; i < s.responses.size(); ++i)
        s.responses.data()[i] = rng.uniform(-1.0, 1.0);
    return s;
}

/// Disk with antialiased rim: pixel value is the coverage fraction sampled
/// on a 4x4 subgrid, so line integrals approximate the continuous disk.
ImageD disk_image(Eigen::Index side, double radius_px) {
    ImageD img(side);
    const double c = 0.5 * static_cast<double>(side);
    for (Eigen::Index i = 0; i < side; ++i)
        for (Eigen::Index j = 0; j < side; ++j) {
            int hits = 0;
            for (int si = 0; si < 4; ++si)
                for (int sj = 0; sj < 4; ++sj) {
                    const double y = static_cast<double>(i) + (si + 0.5) / 4.0 - c;
                    const double x = static_cast<double>(j) + (sj + 0.5) / 4.0 - c;
                    if (x * x + y * y <= radius_px * radius_px) ++hits;
                }
            img.pixels(i, j) = hits / 16.0;
        }
    return img;
}

} // namespace

TEST_CASE("radon_forward maps zero to zero") {
    const ImageD zero(32);
    const auto sino = radon_forward(zero, make_geometry(8, 32));
    CHECK(sino.responses.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("radon_forward matches the analytic chord length of a disk") {
    const Eigen::Index side = 256;
    const double radius = 0.4 * static_cast<double>(side);
    const auto img = disk_image(side, radius);
    const auto geometry = make_geometry(12, side);
    const auto sino = radon_forward(img, geometry);
    const double span = std::numbers::sqrt2 * static_cast<double>(side);
    for (Eigen::Index p = 0; p < geometry.num_views(); ++p)
        for (Eigen::Index j = 0; j < geometry.num_detectors(); ++j) {
            const double t = (geometry.detector_positions[j] - 0.5) * span;
            if (std::abs(t) > 0.9 * radius) continue; // relative error diverges at the rim
            const double chord = 2.0 * std::sqrt(radius * radius - t * t);
            CHECK(std::abs(sino.responses(p, j) - chord) <= 0.02 * chord);
        }
}

TEST_CASE("radon_forward is linear") {
    Rng rng(7);
    const auto g = make_geometry(16, 32);
    for (int trial = 0; trial < 5; ++trial) {
        const auto x1 = random_image(32, rng);
        const auto x2 = random_image(32, rng);
        const double a = rng.uniform(-2.0, 2.0);
        const double b = rng.uniform(-2.0, 2.0);
        ImageD combo(32);
        combo.pixels = a * x1.pixels + b * x2.pixels;
        const auto lhs = radon_forward(combo, g);
        const auto s1 = radon_forward(x1, g);
        const auto s2 = radon_forward(x2, g);
        const double scale = lhs.responses.norm() + 1e-30;
        CHECK((lhs.responses - a * s1.responses - b * s2.responses).norm() <= 1e-10 * scale);
    }
}

TEST_CASE("radon_adjoint maps zero to zero and satisfies the dot-product identity") {
    const auto g = make_geometry(16, 32);
    SinogramD zero;
    zero.geometry = g;
    zero.responses.setZero(16, 32);
    CHECK(radon_adjoint(zero, 32).pixels.cwiseAbs().maxCoeff() == 0.0);

    Rng rng(99);
    for (int trial = 0; trial < 10; ++trial) {
        const auto x = random_image(32, rng);
        const auto y = random_sinogram(g, rng);
        const auto ax = radon_forward(x, g);
        const auto aty = radon_adjoint(y, 32);
        const double lhs = (ax.responses.array() * y.responses.array()).sum();
        const double rhs = (x.pixels.array() * aty.pixels.array()).sum();
        CHECK(std::abs(lhs - rhs) / (std::abs(lhs) + 1e-30) < 1e-10);
    }
}

TEST_CASE("radon_adjoint of a single response is a narrow straight strip") {
    const auto g = make_geometry(16, 32); // view 0 has angle exactly 0
    SinogramD impulse;
    impulse.geometry = g;
    impulse.responses.setZero(16, 32);
    impulse.responses(0, 9) = 1.0;
    const auto img = radon_adjoint(impulse, 32);
    // An angle-0 ray is vertical; its bilinear footprint covers at most two
    // adjacent columns.
    Eigen::Index min_col = 32, max_col = -1;
    for (Eigen::Index i = 0; i < 32; ++i)
        for (Eigen::Index j = 0; j < 32; ++j)
            if (img.pixels(i, j) != 0.0) {
                min_col = std::min(min_col, j);
                max_col = std::max(max_col, j);
            }
    REQUIRE(max_col >= min_col);
    CHECK(max_col - min_col + 1 <= 2);
}

TEST_CASE("fbp maps zero to zero") {
    const auto g = make_geometry(24, 64);
    SinogramD zero;
    zero.geometry = g;
    zero.responses.setZero(24, 64);
    CHECK(fbp(zero, 64).pixels.cwiseAbs().maxCoeff() == 0.0);
    const ImageD zimg(64);
    CHECK(fbp(radon_forward(zimg, g), 64).pixels.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("fbp sanity: dense-view reconstruction approaches the phantom") {
    const auto phantom = make_shepp_logan(64);
    const auto sino = radon_forward(phantom, make_geometry(180, 64));
    const auto recon = fbp(sino, 64);
    CHECK(snr_db(recon.pixels, phantom.pixels) > 14.0);
}

TEST_CASE("fbp hann window smooths but stays close") {
    const auto phantom = make_shepp_logan(64);
    const auto sino = radon_forward(phantom, make_geometry(180, 64));
    const auto recon = fbp(sino, 64, FbpWindow::hann);
    CHECK(snr_db(recon.pixels, phantom.pixels) > 10.0);
}

TEST_CASE("add_noise hits the requested SNR exactly") {
    const auto phantom = make_shepp_logan(32);
    const auto clean = radon_forward(phantom, make_geometry(12, 32));
    for (double snr : {0.0, 30.0, 40.0, 50.0}) {
        const auto noisy = add_noise(clean, NoiseSpec{snr, 42});
        const double e_norm = (noisy.responses - clean.responses).norm();
        const double target = clean.responses.norm() * std::pow(10.0, -snr / 20.0);
        CHECK(std::abs(e_norm - target) <= 1e-13 * clean.responses.norm());
    }
    const auto at40 = add_noise(clean, NoiseSpec{40.0, 7});
    CHECK((at40.responses - clean.responses).norm() ==
          doctest::Approx(clean.responses.norm() / 100.0).epsilon(1e-12));
}

TEST_CASE("add_noise determinism contract") {
    const auto phantom = make_shepp_logan(32);
    const auto clean = radon_forward(phantom, make_geometry(12, 32));
    const auto a = add_noise(clean, NoiseSpec{40.0, 123});
    const auto b = add_noise(clean, NoiseSpec{40.0, 123});
    CHECK(a.responses == b.responses);
    const auto c = add_noise(clean, NoiseSpec{40.0, 124});
    CHECK(a.responses != c.responses);
}

TEST_CASE("add_noise rejects an all-zero sinogram") {
    SinogramD zero;
    zero.geometry = make_geometry(4, 8);
    zero.responses.setZero(4, 8);
    CHECK_THROWS_AS(add_noise(zero, NoiseSpec{40.0, 1}), std::invalid_argument);
}
