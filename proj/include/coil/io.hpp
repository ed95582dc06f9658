#pragma once

#include "coil/errors.hpp"
#include "coil/field_io.hpp" // byte reader/writer helpers
#include "coil/image.hpp"
#include "coil/radon.hpp"

#include <charconv>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace coil {

inline constexpr char kArrayMagic[8] = {'C', 'O', 'I', 'L', 'A', '1', '\0', '\0'};
inline constexpr std::uint32_t kArrayVersion = 1;

/// Binary array container: magic "COILA1\0\0", u32 version, u32 rank, u32
/// dims, then row-major little-endian 64-bit floats.
inline void write_array(const std::vector<double>& values, const std::vector<std::uint32_t>& dims,
                        const std::string& path) {
    std::uint64_t count = 1;
    for (std::uint32_t d : dims) count *= d;
    if (count != values.size())
        throw std::invalid_argument("write_array: product of dims must equal value count");
    std::string out;
    out.append(kArrayMagic, sizeof kArrayMagic);
    detail::put_u32(out, kArrayVersion);
    detail::put_u32(out, static_cast<std::uint32_t>(dims.size()));
    for (std::uint32_t d : dims) detail::put_u32(out, d);
    for (double v : values) detail::put_f64(out, v);
    detail::write_file_bytes(path, out);
}

inline std::pair<std::vector<double>, std::vector<std::uint32_t>> read_array(
    const std::string& path) {
    detail::ByteReader r(detail::read_file_bytes(path), "COILA1 " + path);
    r.expect_magic(kArrayMagic, sizeof kArrayMagic);
    const std::uint32_t version = r.u32();
    if (version != kArrayVersion)
        throw format_error("COILA1 " + path + ": unsupported version " + std::to_string(version));
    const std::uint32_t rank = r.u32();
    std::vector<std::uint32_t> dims(rank);
    std::uint64_t count = 1;
    for (auto& d : dims) {
        d = r.u32();
        count *= d;
    }
    std::vector<double> values(count);
    for (auto& v : values) v = r.f64();
    r.expect_end();
    return {std::move(values), std::move(dims)};
}

inline void save_image(const Image<double>& image, const std::string& path) {
    std::vector<double> values(image.data(), image.data() + image.size());
    const auto side = static_cast<std::uint32_t>(image.side());
    write_array(values, {side, side}, path);
}

inline Image<double> load_image(const std::string& path) {
    auto [values, dims] = read_array(path);
    if (dims.size() != 2 || dims[0] != dims[1] || dims[0] == 0)
        throw format_error("COILA1 " + path + ": expected a square rank-2 array");
    Image<double> image(static_cast<Eigen::Index>(dims[0]));
    std::copy(values.begin(), values.end(), image.data());
    return image;
}

/// Sinograms are stored as [views x detectors] arrays; the uniform
/// half-circle geometry is implied by the shape.
inline void save_sinogram(const Sinogram<double>& sino, const std::string& path) {
    std::vector<double> values(sino.responses.data(), sino.responses.data() + sino.responses.size());
    write_array(values,
                {static_cast<std::uint32_t>(sino.num_views()),
                 static_cast<std::uint32_t>(sino.num_detectors())},
                path);
}

inline Sinogram<double> load_sinogram(const std::string& path) {
    auto [values, dims] = read_array(path);
    if (dims.size() != 2 || dims[0] == 0 || dims[1] < 2)
        throw format_error("COILA1 " + path + ": expected a [views x detectors] rank-2 array");
    Sinogram<double> sino;
    sino.geometry = make_geometry<double>(dims[0], dims[1]);
    sino.responses.resize(dims[0], dims[1]);
    std::copy(values.begin(), values.end(), sino.responses.data());
    return sino;
}

/// Binary PGM (P5) preview. The window [lo, hi] maps linearly to [0, 255]
/// with clamping and round-half-up; the default window is the image range.
/// A degenerate window (constant image) maps every pixel to lo's byte (0).
inline void write_image_pgm(const Image<double>& image, const std::string& path,
                            std::optional<std::pair<double, double>> window = std::nullopt) {
    double lo, hi;
    if (window) {
        lo = window->first;
        hi = window->second;
        if (!(hi > lo)) throw std::invalid_argument("write_image_pgm: window hi must exceed lo");
    } else {
        lo = image.pixels.minCoeff();
        hi = image.pixels.maxCoeff();
    }
    std::string out = "P5\n" + std::to_string(image.side()) + " " + std::to_string(image.side()) +
                      "\n255\n";
    const double span = hi - lo;
    for (Eigen::Index i = 0; i < image.size(); ++i) {
        double u = span > 0 ? (image.data()[i] - lo) / span : 0.0;
        u = std::min(1.0, std::max(0.0, u));
        const auto byte = static_cast<unsigned>(std::floor(u * 255.0 + 0.5));
        out.push_back(static_cast<char>(std::min(255u, byte)));
    }
    detail::write_file_bytes(path, out);
}

/// Locale-independent "%.*g"-style formatting via to_chars; infinities and
/// NaN become "inf"/"-inf"/"nan".
inline std::string format_real(double v, int significant_digits = 6) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general,
                             significant_digits);
    return std::string(buf, res.ptr);
}

/// 64-bit FNV-1a over a byte string; used for the grid's resume manifest.
inline std::uint64_t fnv1a64(const std::string& bytes) {
    std::uint64_t h = 0xCBF29CE484222325ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001B3ull;
    }
    return h;
}

inline std::uint64_t fnv1a64_file(const std::string& path) {
    return fnv1a64(detail::read_file_bytes(path));
}

} // namespace coil
