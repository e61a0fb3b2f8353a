#pragma once
#include <string>

#include "umbra/image.hpp"

namespace umbra {

// Reads an 8-bit PNG (gray or RGB; palette expanded) or binary PPM/PGM.
// Values are exact integer promotions of the stored bytes, tagged Raw255.
// Throws ImageError naming the path on missing files, 16-bit depth, or
// alpha/unsupported channel layouts.
FloatImage load_image(const std::string& path);

// Loads a mask image (must decode to one channel, or three identical
// channels) and binarizes it at threshold 127.
RawMask load_mask(const std::string& path);

// Writes 8-bit PNG (.png) or binary PPM/PGM (.ppm/.pgm), chosen by
// extension. Values are clamped to [0,255] and rounded to nearest.
void save_image(const FloatImage& img, const std::string& path);

void save_mask(const RawMask& mask, const std::string& path);

}  // namespace umbra
