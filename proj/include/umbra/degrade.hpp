#pragma once
#include <cstdint>
#include <vector>

#include "umbra/image.hpp"
#include "umbra/metrics.hpp"

namespace umbra {

struct DegradeSpec {
    double target_ber = 1.0;  // in (0,100); 0 means "no degradation"
    std::uint64_t seed = 0;
    int band_width = 2;  // Chebyshev radius of the contour band
};

// Shadow pixels within band_width (Chebyshev distance, 8-connectivity) of a
// non-shadow pixel, in row-major order. Pixels outside the image do not
// count as non-shadow neighbors.
std::vector<std::size_t> extract_contour(const RawMask& mask, int band_width);

struct DegradeResult {
    RawMask mask;
    BerScore achieved;
    std::size_t flipped = 0;
};

// Flips a seeded random subset of contour shadow pixels to non-shadow; the
// flip count is found by bisection on exact BER so |achieved - target| is at
// most one flip's worth. Degradation only ever shrinks the shadow set.
// Throws when the target exceeds the BER of flipping the whole contour.
DegradeResult degrade_mask(const RawMask& mask, const DegradeSpec& spec);

struct DegradeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace umbra
