#pragma once
#include <array>

#include "umbra/image.hpp"

namespace umbra {

// sRGB (D65) -> CIE L*a*b*. Input must be a 3-channel Unit1 image.
// L lands in [0,100], a/b roughly in [-128,128].
FloatImage rgb_to_lab(const FloatImage& img);

// Single-pixel variant used by the conversion and by test oracles.
std::array<double, 3> rgb_to_lab_pixel(double r, double g, double b);

}  // namespace umbra
