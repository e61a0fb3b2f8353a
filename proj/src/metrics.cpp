#include "umbra/metrics.hpp"

#include <cmath>

#include "umbra/color.hpp"

namespace umbra {
namespace {

constexpr int kWin = 11;
constexpr int kHalf = kWin / 2;
constexpr double kSigma = 1.5;
constexpr double kC1 = (0.01 * 255.0) * (0.01 * 255.0);
constexpr double kC2 = (0.03 * 255.0) * (0.03 * 255.0);

void check_pair(const FloatImage& pred, const FloatImage& gt, const RawMask& mask,
                const char* op) {
    if (!pred.same_dims(gt) || pred.height != mask.height || pred.width != mask.width)
        throw MetricError(std::string(op) + ": dimension mismatch");
    if (pred.channels != 3) throw MetricError(std::string(op) + ": expected 3 channels");
}

RegionValues split_by_region(const std::vector<double>& per_pixel, const RawMask& mask) {
    double s_sum = 0, n_sum = 0;
    std::size_t s_cnt = 0, n_cnt = 0;
    for (std::size_t p = 0; p < per_pixel.size(); ++p) {
        if (mask.data[p] == 255) {
            s_sum += per_pixel[p];
            ++s_cnt;
        } else {
            n_sum += per_pixel[p];
            ++n_cnt;
        }
    }
    RegionValues out;
    if (s_cnt) out.shadow = s_sum / (double)s_cnt;
    if (n_cnt) out.nonshadow = n_sum / (double)n_cnt;
    if (s_cnt + n_cnt) out.all = (s_sum + n_sum) / (double)(s_cnt + n_cnt);
    return out;
}

// Weighted moving average along rows (or columns when transposed access is
// used); window clipped at the borders with the weight sum renormalized.
void gauss_pass_rows(const std::vector<double>& in, std::vector<double>& out, int h, int w,
                     const double* g) {
    for (int y = 0; y < h; ++y) {
        const double* row = in.data() + (std::size_t)y * w;
        double* orow = out.data() + (std::size_t)y * w;
        for (int x = 0; x < w; ++x) {
            double acc = 0, wsum = 0;
            const int lo = std::max(-kHalf, -x), hi = std::min(kHalf, w - 1 - x);
            for (int d = lo; d <= hi; ++d) {
                acc += g[d + kHalf] * row[x + d];
                wsum += g[d + kHalf];
            }
            orow[x] = acc / wsum;
        }
    }
}

void gauss_pass_cols(const std::vector<double>& in, std::vector<double>& out, int h, int w,
                     const double* g) {
    for (int x = 0; x < w; ++x) {
        for (int y = 0; y < h; ++y) {
            double acc = 0, wsum = 0;
            const int lo = std::max(-kHalf, -y), hi = std::min(kHalf, h - 1 - y);
            for (int d = lo; d <= hi; ++d) {
                acc += g[d + kHalf] * in[(std::size_t)(y + d) * w + x];
                wsum += g[d + kHalf];
            }
            out[(std::size_t)y * w + x] = acc / wsum;
        }
    }
}

void gauss_filter(const std::vector<double>& in, std::vector<double>& out, int h, int w,
                  const double* g) {
    std::vector<double> tmp(in.size());
    gauss_pass_rows(in, tmp, h, w, g);
    gauss_pass_cols(tmp, out, h, w, g);
}

}  // namespace

RegionValues mae_lab_from_lab(const FloatImage& lab_pred, const FloatImage& lab_gt,
                              const RawMask& mask) {
    check_pair(lab_pred, lab_gt, mask, "mae_lab");
    std::vector<double> per_pixel(lab_pred.pixel_count());
    for (std::size_t p = 0; p < per_pixel.size(); ++p) {
        double s = 0;
        for (int c = 0; c < 3; ++c)
            s += std::fabs(lab_pred.data[p * 3 + c] - lab_gt.data[p * 3 + c]);
        per_pixel[p] = s / 3.0;
    }
    return split_by_region(per_pixel, mask);
}

RegionValues mae_lab(const FloatImage& pred, const FloatImage& gt, const RawMask& mask) {
    check_pair(pred, gt, mask, "mae_lab");
    const FloatImage lab_p = rgb_to_lab(to_unit(clamp_raw255(pred)));
    const FloatImage lab_g = rgb_to_lab(to_unit(clamp_raw255(gt)));
    return mae_lab_from_lab(lab_p, lab_g, mask);
}

RegionValues psnr(const FloatImage& pred, const FloatImage& gt, const RawMask& mask) {
    check_pair(pred, gt, mask, "psnr");
    double s_se = 0, n_se = 0;
    std::size_t s_cnt = 0, n_cnt = 0;
    for (std::size_t p = 0; p < pred.pixel_count(); ++p) {
        double se = 0;
        for (int c = 0; c < 3; ++c) {
            const double d = pred.data[p * 3 + c] - gt.data[p * 3 + c];
            se += d * d;
        }
        if (mask.data[p] == 255) {
            s_se += se;
            ++s_cnt;
        } else {
            n_se += se;
            ++n_cnt;
        }
    }
    auto to_db = [](double se, std::size_t px) -> double {
        const double mse = se / (double)(px * 3);
        if (mse <= 0.0) return 100.0;
        return std::min(100.0, 10.0 * std::log10(255.0 * 255.0 / mse));
    };
    RegionValues out;
    if (s_cnt) out.shadow = to_db(s_se, s_cnt);
    if (n_cnt) out.nonshadow = to_db(n_se, n_cnt);
    if (s_cnt + n_cnt) out.all = to_db(s_se + n_se, s_cnt + n_cnt);
    return out;
}

RegionValues ssim(const FloatImage& pred, const FloatImage& gt, const RawMask& mask) {
    check_pair(pred, gt, mask, "ssim");
    const int h = pred.height, w = pred.width;
    if (h < kWin || w < kWin) throw MetricError("ssim: image smaller than 11x11");

    double g[kWin];
    for (int i = 0; i < kWin; ++i) {
        const double d = i - kHalf;
        g[i] = std::exp(-(d * d) / (2.0 * kSigma * kSigma));
    }

    const std::size_t px = pred.pixel_count();
    std::vector<double> map(px, 0.0);
    std::vector<double> a(px), b(px), aa(px), bb(px), ab(px);
    std::vector<double> mu_a(px), mu_b(px), m_aa(px), m_bb(px), m_ab(px);

    for (int c = 0; c < 3; ++c) {
        for (std::size_t p = 0; p < px; ++p) {
            a[p] = pred.data[p * 3 + c];
            b[p] = gt.data[p * 3 + c];
            aa[p] = a[p] * a[p];
            bb[p] = b[p] * b[p];
            ab[p] = a[p] * b[p];
        }
        gauss_filter(a, mu_a, h, w, g);
        gauss_filter(b, mu_b, h, w, g);
        gauss_filter(aa, m_aa, h, w, g);
        gauss_filter(bb, m_bb, h, w, g);
        gauss_filter(ab, m_ab, h, w, g);
        for (std::size_t p = 0; p < px; ++p) {
            const double va = m_aa[p] - mu_a[p] * mu_a[p];
            const double vb = m_bb[p] - mu_b[p] * mu_b[p];
            const double cov = m_ab[p] - mu_a[p] * mu_b[p];
            const double s = ((2.0 * mu_a[p] * mu_b[p] + kC1) * (2.0 * cov + kC2)) /
                             ((mu_a[p] * mu_a[p] + mu_b[p] * mu_b[p] + kC1) * (va + vb + kC2));
            map[p] += s;
        }
    }
    for (double& v : map) v /= 3.0;
    return split_by_region(map, mask);
}

BerScore ber(const RawMask& pred_mask, const RawMask& gt_mask) {
    if (pred_mask.height != gt_mask.height || pred_mask.width != gt_mask.width)
        throw MetricError("ber: dimension mismatch");
    if (!pred_mask.is_binary() || !gt_mask.is_binary())
        throw MetricError("ber: masks must be binary");
    BerScore s;
    for (std::size_t p = 0; p < gt_mask.size(); ++p) {
        const bool gt_pos = gt_mask.data[p] == 255;
        const bool pr_pos = pred_mask.data[p] == 255;
        if (gt_pos && pr_pos) ++s.tp;
        else if (gt_pos) ++s.fn;
        else if (pr_pos) ++s.fp;
        else ++s.tn;
    }
    const std::uint64_t pos = s.tp + s.fn, neg = s.tn + s.fp;
    if (pos > 0 && neg > 0) {
        const double sens = (double)s.tp / (double)pos;
        const double spec = (double)s.tn / (double)neg;
        s.ber = 100.0 * (1.0 - 0.5 * (sens + spec));
    }
    return s;
}

RegionMetrics evaluate_pair(const FloatImage& pred, const FloatImage& gt,
                            const RawMask& mask) {
    RegionMetrics m;
    m.mae_lab = mae_lab(pred, gt, mask);
    m.psnr_db = psnr(pred, gt, mask);
    m.ssim = ssim(pred, gt, mask);
    m.shadow_pixels = mask.shadow_count();
    m.nonshadow_pixels = mask.size() - m.shadow_pixels;
    return m;
}

}  // namespace umbra
