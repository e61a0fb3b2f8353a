#pragma once
#include <cstdint>
#include <optional>

#include "umbra/image.hpp"

namespace umbra {

// One value per aggregation scope; empty regions report nullopt rather
// than a fake zero.
struct RegionValues {
    std::optional<double> shadow;
    std::optional<double> nonshadow;
    std::optional<double> all;
};

struct RegionMetrics {
    RegionValues mae_lab;
    RegionValues psnr_db;
    RegionValues ssim;
    std::size_t shadow_pixels = 0;
    std::size_t nonshadow_pixels = 0;
};

struct BerScore {
    std::optional<double> ber;  // 100*(1 - (sens+spec)/2); nullopt if a class is empty
    std::uint64_t tp = 0, tn = 0, fp = 0, fn = 0;
};

// Mean |Lab(pred) - Lab(gt)| over masked pixels x 3 channels. Predictions
// are clamped to [0,255] before conversion.
RegionValues mae_lab(const FloatImage& pred, const FloatImage& gt, const RawMask& mask);

// Aggregation step on already-converted Lab images.
RegionValues mae_lab_from_lab(const FloatImage& lab_pred, const FloatImage& lab_gt,
                              const RawMask& mask);

// 10*log10(255^2 / MSE) over masked RGB values, capped at 100 dB.
RegionValues psnr(const FloatImage& pred, const FloatImage& gt, const RawMask& mask);

// Single-scale SSIM, 11x11 Gaussian window (sigma 1.5), C1=(0.01*255)^2,
// C2=(0.03*255)^2, computed per RGB channel on the full image (windows are
// clipped and renormalized at borders) and channel-averaged; the region
// value is the mean of the map over the mask. Images must be >= 11x11.
RegionValues ssim(const FloatImage& pred, const FloatImage& gt, const RawMask& mask);

BerScore ber(const RawMask& pred_mask, const RawMask& gt_mask);

RegionMetrics evaluate_pair(const FloatImage& pred, const FloatImage& gt, const RawMask& mask);

struct MetricError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace umbra
