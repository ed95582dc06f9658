#pragma once

#include "coil/errors.hpp"
#include "coil/neural_field.hpp"

#include <algorithm>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

namespace coil {

namespace detail {

inline void put_u32(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

inline void put_f64(std::string& out, double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, sizeof bits);
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((bits >> (8 * i)) & 0xFF));
}

class ByteReader {
  public:
    ByteReader(const std::string& bytes, std::string what)
        : bytes_(bytes), what_(std::move(what)) {}

    std::uint32_t u32() {
        need(4, "u32 field");
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i)
            v |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes_[at_ + i])) << (8 * i);
        at_ += 4;
        return v;
    }

    std::uint8_t u8() {
        need(1, "u8 field");
        return static_cast<std::uint8_t>(bytes_[at_++]);
    }

    double f64() {
        need(8, "f64 field");
        std::uint64_t bits = 0;
        for (int i = 0; i < 8; ++i)
            bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes_[at_ + i])) << (8 * i);
        at_ += 8;
        double v;
        std::memcpy(&v, &bits, sizeof v);
        return v;
    }

    void expect_magic(const char* magic, std::size_t len) {
        need(len, "magic bytes");
        if (std::memcmp(bytes_.data() + at_, magic, len) != 0)
            throw format_error(what_ + ": bad magic bytes");
        at_ += len;
    }

    void expect_end() {
        if (at_ != bytes_.size()) throw format_error(what_ + ": trailing bytes after payload");
    }

  private:
    void need(std::size_t n, const char* field) {
        if (at_ + n > bytes_.size())
            throw format_error(what_ + ": truncated while reading " + field);
    }

    const std::string& bytes_;
    std::string what_;
    std::size_t at_ = 0;
};

inline std::string read_file_bytes(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw io_error("cannot open for reading: " + path);
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (in.bad()) throw io_error("read failed: " + path);
    return bytes;
}

inline void write_file_bytes(const std::string& path, const std::string& bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw io_error("cannot open for writing: " + path);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) throw io_error("write failed: " + path);
}

} // namespace detail

inline constexpr char kFieldMagic[8] = {'C', 'O', 'I', 'L', 'N', 'F', '1', '\0'};
inline constexpr std::uint32_t kFieldVersion = 1;

/// Serializes a field: magic "COILNF1\0", then little-endian version (u32),
/// ffm mode (u8), L (u32), layer count (u32), and per layer rows (u32),
/// cols (u32), row-major weights and then biases as 64-bit floats.
inline void save_field(const NeuralField<double>& field, const std::string& path) {
    field.validate_shapes();
    std::string out;
    out.append(kFieldMagic, sizeof kFieldMagic);
    detail::put_u32(out, kFieldVersion);
    out.push_back(static_cast<char>(field.ffm.mode));
    detail::put_u32(out, static_cast<std::uint32_t>(field.ffm.num_frequencies));
    detail::put_u32(out, static_cast<std::uint32_t>(field.layers.size()));
    for (const auto& layer : field.layers) {
        detail::put_u32(out, static_cast<std::uint32_t>(layer.weights.rows()));
        detail::put_u32(out, static_cast<std::uint32_t>(layer.weights.cols()));
        for (Eigen::Index i = 0; i < layer.weights.size(); ++i)
            detail::put_f64(out, layer.weights.data()[i]);
        for (Eigen::Index i = 0; i < layer.bias.size(); ++i)
            detail::put_f64(out, layer.bias[i]);
    }
    detail::write_file_bytes(path, out);
}

/// Inverse of save_field. The MLP shape (widths, depth, skip layers) is
/// reconstructed from the stored layer dimensions and re-validated.
inline NeuralField<double> load_field(const std::string& path) {
    detail::ByteReader r(detail::read_file_bytes(path), "COILNF1 " + path);
    r.expect_magic(kFieldMagic, sizeof kFieldMagic);
    const std::uint32_t version = r.u32();
    if (version != kFieldVersion)
        throw format_error("COILNF1 " + path + ": unsupported version " + std::to_string(version));
    const std::uint8_t mode_byte = r.u8();
    if (mode_byte > 2) throw format_error("COILNF1 " + path + ": unknown ffm mode byte");
    NeuralField<double> field;
    field.ffm.mode = static_cast<FfmMode>(mode_byte);
    field.ffm.num_frequencies = static_cast<int>(r.u32());
    const std::uint32_t layer_count = r.u32();
    if (layer_count < 3) throw format_error("COILNF1 " + path + ": needs at least 3 layers");
    field.layers.resize(layer_count);
    for (auto& layer : field.layers) {
        const std::uint32_t rows = r.u32();
        const std::uint32_t cols = r.u32();
        if (rows == 0 || cols == 0)
            throw format_error("COILNF1 " + path + ": zero-sized layer");
        layer.weights.resize(rows, cols);
        for (Eigen::Index i = 0; i < layer.weights.size(); ++i)
            layer.weights.data()[i] = r.f64();
        layer.bias.resize(rows);
        for (Eigen::Index i = 0; i < layer.bias.size(); ++i) layer.bias[i] = r.f64();
    }
    r.expect_end();

    auto& mlp = field.mlp;
    mlp.input_dim = field.ffm.output_dim();
    mlp.num_hidden_layers = static_cast<int>(layer_count) - 2;
    mlp.hidden_width = static_cast<int>(field.layers.front().weights.rows());
    mlp.penultimate_width = static_cast<int>(field.layers[layer_count - 2].weights.rows());
    mlp.skip_layers.clear();
    for (int k = 2; k <= mlp.num_hidden_layers; ++k)
        if (field.layers[static_cast<std::size_t>(k - 1)].weights.cols() ==
            mlp.hidden_width + mlp.input_dim)
            mlp.skip_layers.push_back(k - 1);
    try {
        field.validate_shapes();
    } catch (const std::invalid_argument& e) {
        throw format_error("COILNF1 " + path + ": inconsistent layer shapes (" + e.what() + ")");
    }
    return field;
}

} // namespace coil
