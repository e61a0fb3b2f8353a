#include "umbra/shadow_model.hpp"

#include <algorithm>
#include <cmath>

namespace umbra {
namespace {

void check_scene(const SceneParams& scene) {
    scene.reflectance.require_range(Range::Unit1, "shadow_model");
    if (scene.reflectance.channels != 3)
        throw ShadowModelError("scene reflectance must have 3 channels");
}

void check_dims(const SceneParams& scene, const AttenuationField& atten, const RawMask& mask) {
    const FloatImage& r = scene.reflectance;
    if (atten.a.height != r.height || atten.a.width != r.width || atten.a.channels != 1)
        throw ShadowModelError("attenuation field dimension mismatch");
    if (mask.height != r.height || mask.width != r.width)
        throw ShadowModelError("mask dimension mismatch");
}

inline double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

}  // namespace

FloatImage render_shadow_free(const SceneParams& scene) {
    check_scene(scene);
    const FloatImage& r = scene.reflectance;
    FloatImage out(r.height, r.width, 3, Range::Raw255);
    for (std::size_t p = 0; p < r.pixel_count(); ++p)
        for (int c = 0; c < 3; ++c)
            out.data[p * 3 + c] =
                255.0 * clamp01((scene.direct_illum[c] + scene.ambient_illum[c]) * r.data[p * 3 + c]);
    return out;
}

FloatImage render_shadow(const SceneParams& scene, const AttenuationField& atten,
                         const RawMask& mask) {
    check_scene(scene);
    check_dims(scene, atten, mask);
    const FloatImage& r = scene.reflectance;
    FloatImage out(r.height, r.width, 3, Range::Raw255);
    for (std::size_t p = 0; p < r.pixel_count(); ++p) {
        const bool shadow = mask.data[p] == 255;
        for (int c = 0; c < 3; ++c) {
            const double refl = r.data[p * 3 + c];
            const double v = shadow
                                 ? atten.a.data[p] * scene.ambient_illum[c] * refl
                                 : (scene.direct_illum[c] + scene.ambient_illum[c]) * refl;
            out.data[p * 3 + c] = 255.0 * clamp01(v);
        }
    }
    return out;
}

FloatImage relight(const FloatImage& shadow, const SceneParams& scene,
                   const AttenuationField& atten, const RawMask& mask) {
    check_scene(scene);
    check_dims(scene, atten, mask);
    if (!shadow.same_dims(scene.reflectance))
        throw ShadowModelError("shadow image dimension mismatch");

    FloatImage out = shadow;
    out.range = Range::Raw255;
    for (std::size_t p = 0; p < shadow.pixel_count(); ++p) {
        if (mask.data[p] != 255) continue;
        const double a = atten.a.data[p];
        if (a <= 0.0)
            throw ShadowModelError("relight: zero attenuation inside the shadow mask");
        for (int c = 0; c < 3; ++c) {
            const double direct = 255.0 * scene.direct_illum[c] * scene.reflectance.data[p * 3 + c];
            const double v = direct + shadow.data[p * 3 + c] / a;
            out.data[p * 3 + c] = std::clamp(v, 0.0, 255.0);
        }
    }
    return out;
}

FloatImage apply_linear_map(const FloatImage& shadow, const LinearShadowParams& params,
                            const RawMask& mask) {
    if (shadow.channels != 3) throw ShadowModelError("apply_linear_map: expected 3 channels");
    if (mask.height != shadow.height || mask.width != shadow.width)
        throw ShadowModelError("apply_linear_map: mask dimension mismatch");
    FloatImage out = shadow;
    out.range = Range::Unbounded;
    for (std::size_t p = 0; p < shadow.pixel_count(); ++p) {
        if (mask.data[p] != 255) continue;
        for (int c = 0; c < 3; ++c)
            out.data[p * 3 + c] = params.w[c] * shadow.data[p * 3 + c] + params.b[c];
    }
    return out;
}

LinearShadowParams fit_linear_map(const FloatImage& shadow, const FloatImage& lit,
                                  const RawMask& mask) {
    if (shadow.channels != 3 || lit.channels != 3)
        throw ShadowModelError("fit_linear_map: expected 3-channel images");
    if (!shadow.same_dims(lit) || mask.height != shadow.height || mask.width != shadow.width)
        throw ShadowModelError("fit_linear_map: dimension mismatch");

    LinearShadowParams params;
    for (int c = 0; c < 3; ++c) {
        double sx = 0, sy = 0;
        std::size_t n = 0;
        for (std::size_t p = 0; p < shadow.pixel_count(); ++p) {
            if (mask.data[p] != 255) continue;
            sx += shadow.data[p * 3 + c];
            sy += lit.data[p * 3 + c];
            ++n;
        }
        if (n < 2) throw ShadowModelError("fit_linear_map: fewer than 2 masked pixels");
        const double mean_x = sx / (double)n;
        const double mean_y = sy / (double)n;

        double var_x = 0, cov_xy = 0;
        for (std::size_t p = 0; p < shadow.pixel_count(); ++p) {
            if (mask.data[p] != 255) continue;
            const double dx = shadow.data[p * 3 + c] - mean_x;
            const double dy = lit.data[p * 3 + c] - mean_y;
            var_x += dx * dx;
            cov_xy += dx * dy;
        }
        if (var_x <= 1e-12 * (double)n * std::max(1.0, mean_x * mean_x))
            throw ShadowModelError("fit_linear_map: rank-deficient (constant) shadow channel");
        params.w[c] = cov_xy / var_x;
        params.b[c] = mean_y - params.w[c] * mean_x;

        double ss = 0;
        for (std::size_t p = 0; p < shadow.pixel_count(); ++p) {
            if (mask.data[p] != 255) continue;
            const double r = lit.data[p * 3 + c] -
                             (params.w[c] * shadow.data[p * 3 + c] + params.b[c]);
            ss += r * r;
        }
        params.residual_rms[c] = std::sqrt(ss / (double)n);
    }
    return params;
}

}  // namespace umbra
