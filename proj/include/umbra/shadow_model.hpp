#pragma once
#include <array>

#include "umbra/image.hpp"

namespace umbra {

// Physical illumination scene: lit pixel = (L_d + L_a) * R per channel,
// shadowed pixel = a * L_a * R. Wavelength collapses to the channel index;
// direct and ambient illumination are per-channel scalars so the linear
// shadow->lit mapping is exactly constant inside the umbra.
struct SceneParams {
    FloatImage reflectance;               // Unit1, 3 channels
    std::array<double, 3> direct_illum;   // L_d, > 0 allowed to be 0 for tests
    std::array<double, 3> ambient_illum;  // L_a, > 0
};

// Fraction of ambient light surviving the occluder, per pixel. Unit1,
// single channel, values in (0,1]; 1 outside the shadow mask.
struct AttenuationField {
    FloatImage a;
};

// Per-channel linear mapping lit = w*shadow + b, constant in the umbra.
struct LinearShadowParams {
    std::array<double, 3> w{1.0, 1.0, 1.0};
    std::array<double, 3> b{0.0, 0.0, 0.0};
    std::array<double, 3> residual_rms{0.0, 0.0, 0.0};  // filled by fit_linear_map
};

// 255 * clamp((L_d + L_a) * R) per pixel/channel.
FloatImage render_shadow_free(const SceneParams& scene);

// Inside the mask: 255 * clamp(a * L_a * R); outside: shadow-free value.
FloatImage render_shadow(const SceneParams& scene, const AttenuationField& atten,
                         const RawMask& mask);

// Analytic relighting: L_d*R + a^-1 * shadow inside the mask (identity
// outside). Throws on zero attenuation inside the mask.
FloatImage relight(const FloatImage& shadow, const SceneParams& scene,
                   const AttenuationField& atten, const RawMask& mask);

// Inside the mask: out_k = w_k * in_k + b_k; outside unchanged. Output is
// tagged Unbounded (w > 1 can push values past 255; callers clamp if needed).
FloatImage apply_linear_map(const FloatImage& shadow, const LinearShadowParams& params,
                            const RawMask& mask);

// Per-channel ordinary least squares of lit on shadow over masked pixels.
// Throws on a (near-)constant shadow channel.
LinearShadowParams fit_linear_map(const FloatImage& shadow, const FloatImage& lit,
                                  const RawMask& mask);

struct ShadowModelError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace umbra
