#pragma once

#include "lact/geometry.hpp"

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace lact::io {

inline constexpr std::uint32_t kImageVersion = 1;
inline constexpr std::uint32_t kSinogramVersion = 1;

/// Little-endian encoder into a growing byte buffer.
class ByteWriter {
public:
    void magic(std::string_view four);
    void u32(std::uint32_t v);
    void u64(std::uint64_t v);
    void f32(float v);
    void f64(double v);
    void f32s(std::span<const float> v);
    void bytes(std::string_view s);

    const std::vector<std::uint8_t>& data() const { return buf_; }

private:
    std::vector<std::uint8_t> buf_;
};

/// Little-endian decoder over a byte span. Every read checks bounds and
/// throws TruncatedError on underflow.
class ByteReader {
public:
    explicit ByteReader(std::span<const std::uint8_t> data, std::string what = "file")
        : data_(data), what_(std::move(what)) {}

    void expect_magic(std::string_view four);
    std::uint32_t u32();
    std::uint64_t u64();
    float f32();
    double f64();
    void f32s(std::span<float> out);
    std::string bytes(std::size_t n);

    std::size_t remaining() const { return data_.size() - pos_; }

private:
    void need(std::size_t n);

    std::span<const std::uint8_t> data_;
    std::size_t pos_ = 0;
    std::string what_;
};

std::vector<std::uint8_t> read_file(const std::filesystem::path& path);
/// Writes to a temporary sibling and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

std::vector<std::uint8_t> encode_image(const Image& image);
Image decode_image(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> encode_sinogram(const Sinogram& sino);
Sinogram decode_sinogram(std::span<const std::uint8_t> bytes);

void write_image(const std::filesystem::path& path, const Image& image);
Image read_image(const std::filesystem::path& path);
void write_sinogram(const std::filesystem::path& path, const Sinogram& sino);
Sinogram read_sinogram(const std::filesystem::path& path);
/// Reads a sinogram and checks its geometry against `expected`.
Sinogram read_sinogram(const std::filesystem::path& path, const FanBeamGeometry& expected);
/// Header-only probe: returns the stored geometry without reading values.
FanBeamGeometry probe_sinogram(const std::filesystem::path& path);

enum class ViewMode { pgm16, png8 };

struct ValueWindow {
    double lo = 0.0;
    double hi = 1.0;
};

/// Maps `window` linearly onto the full integer range of the mode.
std::vector<std::uint8_t> encode_view(const Image& image, ViewMode mode, ValueWindow window);
void export_view(const Image& image, const std::filesystem::path& path, ViewMode mode, ValueWindow window);
ViewMode view_mode_from_path(const std::filesystem::path& path);

} // namespace lact::io
