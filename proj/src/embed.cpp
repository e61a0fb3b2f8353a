#include "umbra/embed.hpp"

namespace umbra {

EmbedVariant embed_variant_from_name(const std::string& name) {
    if (name == "mape") return EmbedVariant::Masked;
    if (name == "plain_pe") return EmbedVariant::Plain;
    if (name == "mape_ms_only") return EmbedVariant::MaskedUnitMod;
    throw ImageError("unknown embedding variant: " + name);
}

const char* embed_variant_name(EmbedVariant v) {
    switch (v) {
        case EmbedVariant::Masked: return "mape";
        case EmbedVariant::Plain: return "plain_pe";
        case EmbedVariant::MaskedUnitMod: return "mape_ms_only";
    }
    return "?";
}

ProjectionWeights ProjectionWeights::zeros(int embed_dim) {
    ProjectionWeights w;
    w.embed_dim = embed_dim;
    w.kernel.assign((std::size_t)embed_dim * 3 * 3 * 3, 0.0);
    w.bias.assign((std::size_t)embed_dim, 0.0);
    return w;
}

FloatImage region_reweight(const FloatImage& img, const UnitMask& ms, const MapeConfig& cfg) {
    img.require_range(Range::Signed1, "region_reweight");
    if (img.height != ms.height || img.width != ms.width)
        throw ImageError("region_reweight: mask dimension mismatch");
    FloatImage out(img.height, img.width, img.channels, Range::Unbounded);
    for (std::size_t p = 0; p < img.pixel_count(); ++p) {
        const double weight = cfg.w1 * ms.data[p] + cfg.w2 * (1.0 - ms.data[p]);
        for (int c = 0; c < img.channels; ++c)
            out.data[p * img.channels + c] = weight * img.data[p * img.channels + c];
    }
    return out;
}

FloatImage mask_modulate(const FloatImage& t_s, const SignedMask& mp) {
    if (t_s.height != mp.height || t_s.width != mp.width)
        throw ImageError("mask_modulate: mask dimension mismatch");
    FloatImage out = t_s;
    for (std::size_t p = 0; p < t_s.pixel_count(); ++p)
        for (int c = 0; c < t_s.channels; ++c)
            out.data[p * t_s.channels + c] = mp.data[p] * t_s.data[p * t_s.channels + c];
    return out;
}

Tensor project(const FloatImage& t_m, const ProjectionWeights& weights, const MapeConfig& cfg) {
    if (t_m.height % cfg.patch_size != 0 || t_m.width % cfg.patch_size != 0)
        throw ImageError("project: image dimensions not divisible by patch size");
    Tensor x = ops::image_to_chw(t_m);
    Tensor k = Tensor::from_data({weights.embed_dim, t_m.channels, 3, 3}, weights.kernel);
    Tensor b = Tensor::from_data({weights.embed_dim}, weights.bias);
    Tensor conv = ops::conv2d(x, k, b, cfg.patch_size, 1);
    return ops::chw_to_tokens(conv);
}

Tensor embed_tokens(const Tensor& img_chw, const RawMask& mask, const Tensor& kernel,
                    const Tensor& bias, const Tensor& w1, const Tensor& w2,
                    const MapeConfig& cfg, EmbedVariant variant) {
    if (img_chw.dim(1) % cfg.patch_size != 0 || img_chw.dim(2) % cfg.patch_size != 0)
        throw ImageError("embed_tokens: image dimensions not divisible by patch size");
    if (img_chw.dim(1) != mask.height || img_chw.dim(2) != mask.width)
        throw ImageError("embed_tokens: mask dimension mismatch");

    Tensor x = ops::signed_normalize(img_chw);

    if (variant != EmbedVariant::Plain) {
        const UnitMask ms = binarize_unit(mask);
        x = ops::region_reweight(x, ms, w1, w2);
        if (variant == EmbedVariant::Masked) {
            x = ops::mul_plane(x, binarize_signed(mask).data);
        } else {
            x = ops::mul_plane(x, ms.data);
        }
    }
    Tensor conv = ops::conv2d(x, kernel, bias, cfg.patch_size, 1);
    return ops::chw_to_tokens(conv);
}

MapeGraph mape_forward(const FloatImage& img, const RawMask& mask,
                       const ProjectionWeights& weights, const MapeConfig& cfg,
                       EmbedVariant variant, bool image_requires_grad) {
    img.require_range(Range::Raw255, "mape_forward");
    MapeGraph g;
    g.image = ops::image_to_chw(img, image_requires_grad);
    g.kernel = Tensor::from_data({cfg.embed_dim, img.channels, 3, 3}, weights.kernel, true);
    g.bias = Tensor::from_data({cfg.embed_dim}, weights.bias, true);
    g.w1 = Tensor::scalar(cfg.w1, cfg.trainable_weights);
    g.w2 = Tensor::scalar(cfg.w2, cfg.trainable_weights);
    g.tokens = embed_tokens(g.image, mask, g.kernel, g.bias, g.w1, g.w2, cfg, variant);
    return g;
}

}  // namespace umbra
