#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace coil {

/// Parallel-beam acquisition geometry. View angles live in [0, pi) and
/// detector positions are normalized sensor-plane locations l in [0, 1],
/// uniformly spaced sample centers.
template <typename Scalar>
struct Geometry {
    Eigen::Matrix<Scalar, Eigen::Dynamic, 1> angles;             // P, strictly increasing
    Eigen::Matrix<Scalar, Eigen::Dynamic, 1> detector_positions; // D, in [0, 1]

    Eigen::Index num_views() const { return angles.size(); }
    Eigen::Index num_detectors() const { return detector_positions.size(); }

    void validate() const {
        if (angles.size() < 1) throw std::invalid_argument("Geometry: need at least one view");
        if (detector_positions.size() < 1)
            throw std::invalid_argument("Geometry: need at least one detector");
        for (Eigen::Index i = 0; i + 1 < angles.size(); ++i)
            if (!(angles[i + 1] > angles[i]))
                throw std::invalid_argument("Geometry: angles must be strictly increasing");
        for (Eigen::Index j = 0; j < detector_positions.size(); ++j)
            if (!(detector_positions[j] >= Scalar(0) && detector_positions[j] <= Scalar(1)))
                throw std::invalid_argument("Geometry: detector positions must lie in [0, 1]");
    }
};

/// One normalized measurement coordinate v = (theta/pi, l).
template <typename Scalar>
struct Coordinate {
    Scalar theta_norm; // view angle divided by pi
    Scalar l;          // sensor-plane location
};

enum class AngleSpan { half_circle };

/// Uniform half-circle geometry: angles[i] = i*pi/P, positions[j] = (j+0.5)/D.
template <typename Scalar = double>
Geometry<Scalar> make_geometry(Eigen::Index num_views, Eigen::Index num_detectors,
                               AngleSpan span = AngleSpan::half_circle) {
    if (num_views < 1) throw std::invalid_argument("make_geometry: num_views must be >= 1");
    if (num_detectors < 2)
        throw std::invalid_argument("make_geometry: num_detectors must be >= 2");
    (void)span;
    Geometry<Scalar> g;
    g.angles.resize(num_views);
    for (Eigen::Index i = 0; i < num_views; ++i)
        g.angles[i] = static_cast<Scalar>(i) * std::numbers::pi_v<Scalar> /
                      static_cast<Scalar>(num_views);
    g.detector_positions.resize(num_detectors);
    for (Eigen::Index j = 0; j < num_detectors; ++j)
        g.detector_positions[j] =
            (static_cast<Scalar>(j) + Scalar(0.5)) / static_cast<Scalar>(num_detectors);
    return g;
}

/// All P*D coordinates of a geometry in view-major order.
template <typename Scalar>
std::vector<Coordinate<Scalar>> coordinates_of(const Geometry<Scalar>& g) {
    g.validate();
    std::vector<Coordinate<Scalar>> out;
    out.reserve(static_cast<std::size_t>(g.num_views() * g.num_detectors()));
    for (Eigen::Index p = 0; p < g.num_views(); ++p) {
        const Scalar theta_norm = g.angles[p] / std::numbers::pi_v<Scalar>;
        for (Eigen::Index j = 0; j < g.num_detectors(); ++j)
            out.push_back({theta_norm, g.detector_positions[j]});
    }
    return out;
}

using GeometryD = Geometry<double>;
using CoordinateD = Coordinate<double>;

} // namespace coil
