#pragma once
#include <cstdint>
#include <random>

#include "umbra/embed.hpp"
#include "umbra/image.hpp"
#include "umbra/ops.hpp"
#include "umbra/tensor.hpp"

namespace umbra {

struct ModelConfig {
    int num_blocks = 2;
    int num_heads = 4;
    int embed_dim = 32;
    double ffn_ratio = 4.0;
    int patch_size = 4;
    bool global_residual = true;
    bool learned_pos = false;  // additive positional table (off: conv carries locality)
    int pos_tokens = 0;        // token count the pos table is sized for (0 = lazy at first use)
};

// Named parameter leaves in a stable registration order (checkpoint and
// optimizer state are keyed by these names).
struct ParamStore {
    std::vector<std::pair<std::string, Tensor>> items;

    Tensor add(const std::string& name, std::vector<int> shape);
    Tensor* find(const std::string& name);
    std::size_t total_count() const;
    void zero_grad();
};

// Token-transformer restoration model: masked patch embedding, N pre-norm
// blocks (LN -> MHA -> residual, LN -> FFN -> residual), a per-token affine
// head folded back to pixels, and an optional global residual.
class RestorationModel {
  public:
    RestorationModel(ModelConfig cfg, MapeConfig mape, EmbedVariant variant,
                     std::uint64_t init_seed);

    // Raw-255-scale prediction as a [3,H,W] tensor, unclamped so the L1
    // training loss keeps gradients everywhere. If image_leaf is non-null it
    // receives the raw input leaf (for input-gradient checks).
    Tensor forward(const FloatImage& img, const RawMask& mask,
                   Tensor* image_leaf = nullptr, bool image_requires_grad = false);

    // Evaluation entry: clamped Raw255 image.
    FloatImage predict(const FloatImage& img, const RawMask& mask);

    ParamStore& params() { return params_; }
    const ParamStore& params() const { return params_; }
    std::size_t parameter_count() const { return params_.total_count(); }

    const ModelConfig& config() const { return cfg_; }
    const MapeConfig& mape_config() const { return mape_; }
    EmbedVariant variant() const { return variant_; }

    // Row sums of every attention map from the last forward (test hook).
    const std::vector<double>& last_attention_row_sums() const { return attn_row_sums_; }

  private:
    struct BlockParams {
        Tensor ln1_gamma, ln1_beta, ln2_gamma, ln2_beta;
        Tensor wq, bq, wk, bk, wv, bv, wo, bo;
        Tensor ffn_w1, ffn_b1, ffn_w2, ffn_b2;
    };

    Tensor mha(const Tensor& x, const BlockParams& p);

    ModelConfig cfg_;
    MapeConfig mape_;
    EmbedVariant variant_;
    ParamStore params_;

    Tensor embed_kernel_, embed_bias_, w1_, w2_;
    std::vector<BlockParams> blocks_;
    Tensor head_w_, head_b_;
    Tensor pos_table_;

    std::vector<double> attn_row_sums_;
};

// Plain (non-tape) mean-absolute-difference between two same-shape images.
double l1_loss(const FloatImage& a, const FloatImage& b);

// Truncated normal initializer (resamples outside +-2 sigma).
void init_trunc_normal(std::vector<double>& v, double sigma, std::mt19937_64& rng);

}  // namespace umbra
