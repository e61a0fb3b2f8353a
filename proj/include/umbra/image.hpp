#pragma once
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace umbra {

// Declared value range of a FloatImage. Operations check tags on entry so a
// raw [0,255] raster cannot silently flow into code expecting [-1,1] data.
enum class Range : std::uint8_t {
    Raw255,      // [0, 255]
    Signed1,     // [-1, 1]
    Unit1,       // [0, 1]
    Lab,         // L in [0,100], a/b in [-128,128]
    Unbounded,   // no contract (e.g. region-reweighted activations)
};

const char* range_name(Range r);

// H x W x C raster, row-major, interleaved channels, double precision.
struct FloatImage {
    int height = 0;
    int width = 0;
    int channels = 0;
    Range range = Range::Raw255;
    std::vector<double> data;

    FloatImage() = default;
    FloatImage(int h, int w, int c, Range r, double fill = 0.0)
        : height(h), width(w), channels(c), range(r),
          data((std::size_t)h * w * c, fill) {}

    std::size_t size() const { return data.size(); }
    std::size_t pixel_count() const { return (std::size_t)height * width; }

    double& at(int y, int x, int c) {
        return data[((std::size_t)y * width + x) * channels + c];
    }
    double at(int y, int x, int c) const {
        return data[((std::size_t)y * width + x) * channels + c];
    }

    bool same_dims(const FloatImage& o) const {
        return height == o.height && width == o.width && channels == o.channels;
    }

    void require_range(Range r, const char* op) const;
};

// 8-bit mask raster; after binarize() shadow pixels are 255, non-shadow 0.
struct RawMask {
    int height = 0;
    int width = 0;
    std::vector<std::uint8_t> data;

    RawMask() = default;
    RawMask(int h, int w, std::uint8_t fill = 0)
        : height(h), width(w), data((std::size_t)h * w, fill) {}

    std::size_t size() const { return data.size(); }
    std::uint8_t& at(int y, int x) { return data[(std::size_t)y * width + x]; }
    std::uint8_t at(int y, int x) const { return data[(std::size_t)y * width + x]; }

    bool is_binary() const;
    std::size_t shadow_count() const;
};

// Threshold a soft mask at 127: >127 -> 255, else 0.
RawMask binarize(const RawMask& soft);

// x -> x/255*2 - 1. Requires Raw255 input.
FloatImage normalize_signed(const FloatImage& img);

// Inverse of normalize_signed; input clamped to [-1,1] before mapping.
FloatImage denormalize_signed(const FloatImage& img);

// x -> x/255. Requires Raw255 input.
FloatImage to_unit(const FloatImage& img);

FloatImage clamp_raw255(FloatImage img);

// Nearest-neighbor resize (harness-only; no filtering by design).
FloatImage resize_nearest(const FloatImage& img, int out_h, int out_w);
RawMask resize_nearest(const RawMask& mask, int out_h, int out_w);

struct ImageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace umbra
