#pragma once
#include "umbra/image.hpp"
#include "umbra/masks.hpp"
#include "umbra/ops.hpp"
#include "umbra/tensor.hpp"

namespace umbra {

// Patch-embedding stage. The full pipeline is
//   normalize -> region reweight (w1/w2) -> signed-mask modulation -> 3x3
//   conv projection (stride = patch size, pad 1) -> token sequence,
// with two ablation variants: the plain embedding (no mask use at all) and
// the 0/1-modulated one (signed mask replaced by the unit mask).
enum class EmbedVariant { Masked, Plain, MaskedUnitMod };

EmbedVariant embed_variant_from_name(const std::string& name);
const char* embed_variant_name(EmbedVariant v);

struct MapeConfig {
    double w1 = 2.5;  // shadow-region weight; must exceed w2
    double w2 = 1.0;  // non-shadow weight
    int patch_size = 4;
    int embed_dim = 32;
    bool trainable_weights = false;  // make w1/w2 graph parameters
    static constexpr int kernel_size = 3;
};

// Projection parameters: kernel [embed_dim, 3, 3, 3], bias [embed_dim].
struct ProjectionWeights {
    int embed_dim = 0;
    std::vector<double> kernel;
    std::vector<double> bias;

    static ProjectionWeights zeros(int embed_dim);
};

// --- pure image-level ops (reference path; no tape) ---

// T_s = (w1*Ms + w2*(1-Ms)) .* img, mask broadcast over channels.
FloatImage region_reweight(const FloatImage& img, const UnitMask& ms, const MapeConfig& cfg);

// T_m = Mp .* t_s; applying twice returns t_s exactly.
FloatImage mask_modulate(const FloatImage& t_s, const SignedMask& mp);

// 3x3 convolution, stride = patch size, zero pad 1, flattened to
// [tokens, embed_dim] in row-major grid order. Constant (no-grad) tensor.
Tensor project(const FloatImage& t_m, const ProjectionWeights& weights, const MapeConfig& cfg);

// --- tape path (shared by the model and by gradient tests) ---

// Builds the embedding subgraph from existing leaves. img_chw is the raw
// [0,255] image as a [3,H,W] tensor; kernel/bias/w1/w2 may require grad.
Tensor embed_tokens(const Tensor& img_chw, const RawMask& mask, const Tensor& kernel,
                    const Tensor& bias, const Tensor& w1, const Tensor& w2,
                    const MapeConfig& cfg, EmbedVariant variant);

// Convenience wrapper owning its leaves; tokens.backward() then fills the
// leaf gradients.
struct MapeGraph {
    Tensor tokens;
    Tensor image;   // [3,H,W] raw255 leaf
    Tensor kernel;  // [embed_dim,3,3,3]
    Tensor bias;    // [embed_dim]
    Tensor w1, w2;  // scalars
};

MapeGraph mape_forward(const FloatImage& img, const RawMask& mask,
                       const ProjectionWeights& weights, const MapeConfig& cfg,
                       EmbedVariant variant = EmbedVariant::Masked,
                       bool image_requires_grad = false);

}  // namespace umbra
