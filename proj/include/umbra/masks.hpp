#pragma once
#include <optional>

#include "umbra/image.hpp"

namespace umbra {

// 0/1 mask: shadow pixels 1, non-shadow 0.
struct UnitMask {
    int height = 0;
    int width = 0;
    std::vector<double> data;

    double at(int y, int x) const { return data[(std::size_t)y * width + x]; }
    std::size_t size() const { return data.size(); }
};

// -1/+1 mask: shadow pixels +1, non-shadow -1. Equals 2*UnitMask - 1.
struct SignedMask {
    int height = 0;
    int width = 0;
    std::vector<double> data;

    double at(int y, int x) const { return data[(std::size_t)y * width + x]; }
    std::size_t size() const { return data.size(); }
};

// mask/255: 255 -> 1, 0 -> 0. Requires a binary mask.
UnitMask binarize_unit(const RawMask& mask);

// (mask/255)*2 - 1: 255 -> +1, 0 -> -1.
SignedMask binarize_signed(const RawMask& mask);

// Per-region sign fractions of a Signed1 image (counted over pixels x
// channels). pos + neg + zero = 1 in each region; an empty region reports
// nullopt instead of zeros.
struct SignStats {
    std::optional<double> shadow_pos_frac;
    std::optional<double> shadow_neg_frac;
    std::optional<double> nonshadow_pos_frac;
    std::optional<double> nonshadow_neg_frac;
};

SignStats sign_statistics(const FloatImage& img, const RawMask& mask);

}  // namespace umbra
