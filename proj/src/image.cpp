#include "umbra/image.hpp"

#include <algorithm>

namespace umbra {

const char* range_name(Range r) {
    switch (r) {
        case Range::Raw255: return "raw255";
        case Range::Signed1: return "signed1";
        case Range::Unit1: return "unit1";
        case Range::Lab: return "lab";
        case Range::Unbounded: return "unbounded";
    }
    return "?";
}

void FloatImage::require_range(Range r, const char* op) const {
    if (range != r)
        throw ImageError(std::string(op) + ": expected " + range_name(r) + " input, got " +
                         range_name(range));
}

bool RawMask::is_binary() const {
    return std::all_of(data.begin(), data.end(),
                       [](std::uint8_t v) { return v == 0 || v == 255; });
}

std::size_t RawMask::shadow_count() const {
    return std::count(data.begin(), data.end(), std::uint8_t{255});
}

RawMask binarize(const RawMask& soft) {
    RawMask out(soft.height, soft.width);
    for (std::size_t i = 0; i < soft.data.size(); ++i)
        out.data[i] = soft.data[i] > 127 ? 255 : 0;
    return out;
}

FloatImage normalize_signed(const FloatImage& img) {
    img.require_range(Range::Raw255, "normalize_signed");
    FloatImage out(img.height, img.width, img.channels, Range::Signed1);
    // (x/255)*2 - 1, evaluated literally so 0/127.5/255 map exactly.
    for (std::size_t i = 0; i < img.size(); ++i)
        out.data[i] = (img.data[i] / 255.0) * 2.0 - 1.0;
    return out;
}

FloatImage denormalize_signed(const FloatImage& img) {
    img.require_range(Range::Signed1, "denormalize_signed");
    FloatImage out(img.height, img.width, img.channels, Range::Raw255);
    for (std::size_t i = 0; i < img.size(); ++i) {
        const double v = std::clamp(img.data[i], -1.0, 1.0);
        out.data[i] = (v + 1.0) * (255.0 / 2.0);
    }
    return out;
}

FloatImage to_unit(const FloatImage& img) {
    img.require_range(Range::Raw255, "to_unit");
    FloatImage out(img.height, img.width, img.channels, Range::Unit1);
    for (std::size_t i = 0; i < img.size(); ++i) out.data[i] = img.data[i] / 255.0;
    return out;
}

FloatImage clamp_raw255(FloatImage img) {
    for (double& v : img.data) v = std::clamp(v, 0.0, 255.0);
    img.range = Range::Raw255;
    return img;
}

FloatImage resize_nearest(const FloatImage& img, int out_h, int out_w) {
    FloatImage out(out_h, out_w, img.channels, img.range);
    for (int y = 0; y < out_h; ++y) {
        int sy = std::min((int)((std::int64_t)y * img.height / out_h), img.height - 1);
        for (int x = 0; x < out_w; ++x) {
            int sx = std::min((int)((std::int64_t)x * img.width / out_w), img.width - 1);
            for (int c = 0; c < img.channels; ++c) out.at(y, x, c) = img.at(sy, sx, c);
        }
    }
    return out;
}

RawMask resize_nearest(const RawMask& mask, int out_h, int out_w) {
    RawMask out(out_h, out_w);
    for (int y = 0; y < out_h; ++y) {
        int sy = std::min((int)((std::int64_t)y * mask.height / out_h), mask.height - 1);
        for (int x = 0; x < out_w; ++x) {
            int sx = std::min((int)((std::int64_t)x * mask.width / out_w), mask.width - 1);
            out.at(y, x) = mask.at(sy, sx);
        }
    }
    return out;
}

}  // namespace umbra
