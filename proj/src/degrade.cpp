#include "umbra/degrade.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace umbra {

std::vector<std::size_t> extract_contour(const RawMask& mask, int band_width) {
    if (!mask.is_binary()) throw DegradeError("extract_contour: mask must be binary");
    const int h = mask.height, w = mask.width;
    std::vector<std::size_t> contour;
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            if (mask.at(y, x) != 255) continue;
            bool near_nonshadow = false;
            for (int dy = -band_width; dy <= band_width && !near_nonshadow; ++dy)
                for (int dx = -band_width; dx <= band_width; ++dx) {
                    const int ny = y + dy, nx = x + dx;
                    if (ny < 0 || ny >= h || nx < 0 || nx >= w) continue;
                    if (mask.at(ny, nx) != 255) {
                        near_nonshadow = true;
                        break;
                    }
                }
            if (near_nonshadow) contour.push_back((std::size_t)y * w + x);
        }
    return contour;
}

DegradeResult degrade_mask(const RawMask& mask, const DegradeSpec& spec) {
    if (spec.target_ber < 0.0 || spec.target_ber >= 100.0)
        throw DegradeError("degrade_mask: target BER out of range");

    std::vector<std::size_t> contour = extract_contour(mask, spec.band_width);

    // Shuffle once; flipping the first n entries makes BER monotone in n.
    std::mt19937_64 rng(spec.seed);
    std::shuffle(contour.begin(), contour.end(), rng);

    auto ber_of = [&](std::size_t flips) {
        RawMask degraded = mask;
        for (std::size_t i = 0; i < flips; ++i) degraded.data[contour[i]] = 0;
        BerScore score = ber(degraded, mask);
        if (!score.ber)
            throw DegradeError("degrade_mask: BER undefined (single-class ground truth)");
        return std::make_pair(*score.ber, std::move(degraded));
    };

    if (spec.target_ber > 0.0) {
        const double max_ber = ber_of(contour.size()).first;
        if (max_ber < spec.target_ber)
            throw DegradeError("degrade_mask: target BER " + std::to_string(spec.target_ber) +
                               " unreachable; flipping the whole contour gives " +
                               std::to_string(max_ber));
    }

    // Exact-BER bisection: find the smallest flip count with BER >= target,
    // then keep whichever neighbor lands closer.
    std::size_t lo = 0, hi = contour.size();
    while (lo < hi) {
        const std::size_t mid = lo + (hi - lo) / 2;
        if (ber_of(mid).first >= spec.target_ber) hi = mid;
        else lo = mid + 1;
    }
    std::size_t best = lo;
    if (lo > 0) {
        const double above = ber_of(lo).first;
        const double below = ber_of(lo - 1).first;
        if (std::fabs(below - spec.target_ber) <= std::fabs(above - spec.target_ber))
            best = lo - 1;
    }

    auto [achieved_ber, degraded] = ber_of(best);
    (void)achieved_ber;
    DegradeResult result;
    result.achieved = ber(degraded, mask);
    result.mask = std::move(degraded);
    result.flipped = best;
    return result;
}

}  // namespace umbra
