#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "coil/geometry.hpp"
#include "coil/phantom.hpp"
#include "coil/rng.hpp"

#include <cmath>
#include <numbers>

using namespace coil;

namespace {

// Independent re-evaluation of the ten-ellipse definition, written as a
// straight-line oracle: different rotation algebra (explicit rotation of the
// point into the ellipse frame) and Kahan-free plain accumulation.
double phantom_oracle_value(double x, double y) {
    struct E {
        double a, b, x0, y0, phi_deg, v;
    };
    const E table[10] = {
        {0.69, 0.92, 0.0, 0.0, 0.0, 1.0},      {0.6624, 0.8740, 0.0, -0.0184, 0.0, -0.8},
        {0.1100, 0.3100, 0.22, 0.0, -18.0, -0.2}, {0.1600, 0.4100, -0.22, 0.0, 18.0, -0.2},
        {0.2100, 0.2500, 0.0, 0.35, 0.0, 0.1},  {0.0460, 0.0460, 0.0, 0.1, 0.0, 0.1},
        {0.0460, 0.0460, 0.0, -0.1, 0.0, 0.1},  {0.0460, 0.0230, -0.08, -0.605, 0.0, 0.1},
        {0.0230, 0.0230, 0.0, -0.606, 0.0, 0.1}, {0.0230, 0.0460, 0.06, -0.605, 0.0, 0.1},
    };
    double v = 0.0;
    for (const auto& e : table) {
        const double phi = e.phi_deg * std::numbers::pi / 180.0;
        const double px = x - e.x0, py = y - e.y0;
        const double rx = px * std::cos(-phi) - py * std::sin(-phi);
        const double ry = px * std::sin(-phi) + py * std::cos(-phi);
        if ((rx / e.a) * (rx / e.a) + (ry / e.b) * (ry / e.b) <= 1.0) v += e.v;
    }
    return std::min(1.0, std::max(0.0, v));
}

} // namespace

TEST_CASE("make_shepp_logan basic contract at side 16") {
    const auto img = make_shepp_logan(16);
    CHECK(img.side() == 16);
    CHECK(img.pixels.minCoeff() >= 0.0);
    CHECK(img.pixels.maxCoeff() <= 1.0);
    CHECK(img.pixels(8, 8) > 0.0);
}

TEST_CASE("make_shepp_logan rejects side below 16") {
    CHECK_THROWS_AS(make_shepp_logan(15), std::invalid_argument);
    CHECK_THROWS_AS(make_shepp_logan(0), std::invalid_argument);
}

TEST_CASE("make_shepp_logan matches the direct-evaluation oracle at side 128") {
    const Eigen::Index side = 128;
    const auto img = make_shepp_logan(side);
    double sum_impl = 0.0, sum_oracle = 0.0;
    const double step = 2.0 / static_cast<double>(side);
    for (Eigen::Index i = 0; i < side; ++i) {
        const double y = 1.0 - (static_cast<double>(i) + 0.5) * step;
        for (Eigen::Index j = 0; j < side; ++j) {
            const double x = -1.0 + (static_cast<double>(j) + 0.5) * step;
            sum_impl += img.pixels(i, j);
            sum_oracle += phantom_oracle_value(x, y);
        }
    }
    CHECK(std::abs(sum_impl - sum_oracle) <= 1e-12 * std::abs(sum_oracle));
}

TEST_CASE("make_shepp_logan discretization consistency across resolutions") {
    const auto coarse = make_shepp_logan(128);
    const auto fine = make_shepp_logan(256);
    double max_diff = 0.0;
    for (Eigen::Index i = 0; i < 128; ++i)
        for (Eigen::Index j = 0; j < 128; ++j) {
            const double avg = 0.25 * (fine.pixels(2 * i, 2 * j) + fine.pixels(2 * i, 2 * j + 1) +
                                       fine.pixels(2 * i + 1, 2 * j) +
                                       fine.pixels(2 * i + 1, 2 * j + 1));
            max_diff = std::max(max_diff, std::abs(avg - coarse.pixels(i, j)));
        }
    CHECK(max_diff <= 0.5);
}

TEST_CASE("make_shepp_logan is deterministic") {
    const auto a = make_shepp_logan(64);
    const auto b = make_shepp_logan(64);
    CHECK(a.pixels == b.pixels);
}

TEST_CASE("make_geometry closed-form grids") {
    const auto g = make_geometry(4, 2);
    REQUIRE(g.num_views() == 4);
    REQUIRE(g.num_detectors() == 2);
    CHECK(g.angles[0] == doctest::Approx(0.0));
    CHECK(g.angles[1] == doctest::Approx(std::numbers::pi / 4));
    CHECK(g.angles[2] == doctest::Approx(std::numbers::pi / 2));
    CHECK(g.angles[3] == doctest::Approx(3 * std::numbers::pi / 4));
    CHECK(g.detector_positions[0] == doctest::Approx(0.25));
    CHECK(g.detector_positions[1] == doctest::Approx(0.75));

    const auto dense = make_geometry(360, 512);
    CHECK(dense.num_views() == 360);
    CHECK(dense.angles[359] == doctest::Approx(359.0 * std::numbers::pi / 360.0));
    CHECK(dense.angles[359] < std::numbers::pi);

    const auto single = make_geometry(1, 2);
    CHECK(single.angles[0] == 0.0);
}

TEST_CASE("make_geometry preconditions") {
    CHECK_THROWS_AS(make_geometry(0, 4), std::invalid_argument);
    CHECK_THROWS_AS(make_geometry(4, 1), std::invalid_argument);
}

TEST_CASE("coordinates_of ordering and normalization") {
    GeometryD single;
    single.angles.resize(1);
    single.angles[0] = 0.0;
    single.detector_positions.resize(1);
    single.detector_positions[0] = 0.5;
    const auto one = coordinates_of(single);
    REQUIRE(one.size() == 1);
    CHECK(one[0].theta_norm == 0.0);
    CHECK(one[0].l == 0.5);

    const auto g = make_geometry(2, 2);
    const auto coords = coordinates_of(g);
    REQUIRE(coords.size() == 4);
    CHECK(coords[0].theta_norm == doctest::Approx(0.0));
    CHECK(coords[0].l == doctest::Approx(0.25));
    CHECK(coords[1].l == doctest::Approx(0.75));
    CHECK(coords[2].theta_norm == doctest::Approx(0.5));
}

TEST_CASE("coordinates_of property: length and unit range for random geometries") {
    Rng rng(1234);
    for (int trial = 0; trial < 20; ++trial) {
        const auto p = static_cast<Eigen::Index>(1 + rng.below(40));
        const auto d = static_cast<Eigen::Index>(2 + rng.below(40));
        const auto g = make_geometry(p, d);
        const auto coords = coordinates_of(g);
        REQUIRE(static_cast<Eigen::Index>(coords.size()) == p * d);
        for (const auto& c : coords) {
            CHECK(c.theta_norm >= 0.0);
            CHECK(c.theta_norm <= 1.0);
            CHECK(c.l >= 0.0);
            CHECK(c.l <= 1.0);
        }
    }
    const auto big = coordinates_of(make_geometry(360, 512));
    CHECK(big.size() == 184320);
}

TEST_CASE("geometry validation rejects bad angle order and detector range") {
    GeometryD g = make_geometry(4, 4);
    std::swap(g.angles[1], g.angles[2]);
    CHECK_THROWS_AS(g.validate(), std::invalid_argument);
    GeometryD h = make_geometry(4, 4);
    h.detector_positions[0] = -0.1;
    CHECK_THROWS_AS(h.validate(), std::invalid_argument);
}
