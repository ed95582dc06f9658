#pragma once

#include <Eigen/Dense>

#include <stdexcept>

namespace coil {

template <typename Scalar>
using PixelMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Square grayscale pixel grid. Row-major storage, row 0 at the top of the
/// physical scene, pixel (0,0) in the top-left corner.
template <typename Scalar>
struct Image {
    PixelMatrix<Scalar> pixels; // side x side
    Scalar pixel_size = Scalar(1);

    Image() = default;
    explicit Image(Eigen::Index side, Scalar pixel_size_ = Scalar(1))
        : pixels(PixelMatrix<Scalar>::Zero(side, side)), pixel_size(pixel_size_) {
        if (side <= 0) throw std::invalid_argument("Image: side must be positive");
    }
    Image(PixelMatrix<Scalar> px, Scalar pixel_size_ = Scalar(1))
        : pixels(std::move(px)), pixel_size(pixel_size_) {
        if (pixels.rows() != pixels.cols())
            throw std::invalid_argument("Image: pixel grid must be square");
    }

    Eigen::Index side() const { return pixels.rows(); }
    Eigen::Index size() const { return pixels.size(); }

    /// Physical half-width of the grid, measured from its center.
    Scalar half_extent() const { return Scalar(0.5) * pixel_size * Scalar(side()); }

    Scalar* data() { return pixels.data(); }
    const Scalar* data() const { return pixels.data(); }
};

using ImageD = Image<double>;

} // namespace coil
