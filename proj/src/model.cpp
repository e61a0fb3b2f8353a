#include "umbra/model.hpp"

#include <cmath>

#include "umbra/kernels.hpp"

namespace umbra {

Tensor ParamStore::add(const std::string& name, std::vector<int> shape) {
    Tensor t = Tensor::zeros(std::move(shape), true);
    items.emplace_back(name, t);
    return t;
}

Tensor* ParamStore::find(const std::string& name) {
    for (auto& [n, t] : items)
        if (n == name) return &t;
    return nullptr;
}

std::size_t ParamStore::total_count() const {
    std::size_t n = 0;
    for (const auto& [name, t] : items) n += t.size();
    return n;
}

void ParamStore::zero_grad() {
    for (auto& [name, t] : items) t.zero_grad();
}

void init_trunc_normal(std::vector<double>& v, double sigma, std::mt19937_64& rng) {
    std::normal_distribution<double> dist(0.0, sigma);
    for (double& x : v) {
        double s;
        do {
            s = dist(rng);
        } while (std::fabs(s) > 2.0 * sigma);
        x = s;
    }
}

RestorationModel::RestorationModel(ModelConfig cfg, MapeConfig mape, EmbedVariant variant,
                                   std::uint64_t init_seed)
    : cfg_(cfg), mape_(mape), variant_(variant) {
    if (cfg_.embed_dim % cfg_.num_heads != 0)
        throw TensorError("embed_dim must be divisible by num_heads");
    if (cfg_.num_blocks < 1) throw TensorError("num_blocks must be >= 1");
    mape_.embed_dim = cfg_.embed_dim;
    mape_.patch_size = cfg_.patch_size;

    const int d = cfg_.embed_dim;
    const int hidden = (int)std::lround(cfg_.ffn_ratio * d);
    const int head_out = cfg_.patch_size * cfg_.patch_size * 3;

    std::mt19937_64 rng(init_seed);

    embed_kernel_ = params_.add("embed.kernel", {d, 3, 3, 3});
    embed_bias_ = params_.add("embed.bias", {d});
    init_trunc_normal(embed_kernel_.value(), 0.02, rng);

    if (mape_.trainable_weights) {
        w1_ = params_.add("embed.w1", {1});
        w2_ = params_.add("embed.w2", {1});
        w1_.value()[0] = mape_.w1;
        w2_.value()[0] = mape_.w2;
    } else {
        w1_ = Tensor::scalar(mape_.w1);
        w2_ = Tensor::scalar(mape_.w2);
    }

    for (int i = 0; i < cfg_.num_blocks; ++i) {
        const std::string pre = "block" + std::to_string(i) + ".";
        BlockParams b;
        b.ln1_gamma = params_.add(pre + "ln1.gamma", {d});
        b.ln1_beta = params_.add(pre + "ln1.beta", {d});
        b.wq = params_.add(pre + "attn.wq", {d, d});
        b.bq = params_.add(pre + "attn.bq", {d});
        b.wk = params_.add(pre + "attn.wk", {d, d});
        b.bk = params_.add(pre + "attn.bk", {d});
        b.wv = params_.add(pre + "attn.wv", {d, d});
        b.bv = params_.add(pre + "attn.bv", {d});
        b.wo = params_.add(pre + "attn.wo", {d, d});
        b.bo = params_.add(pre + "attn.bo", {d});
        b.ln2_gamma = params_.add(pre + "ln2.gamma", {d});
        b.ln2_beta = params_.add(pre + "ln2.beta", {d});
        b.ffn_w1 = params_.add(pre + "ffn.w1", {d, hidden});
        b.ffn_b1 = params_.add(pre + "ffn.b1", {hidden});
        b.ffn_w2 = params_.add(pre + "ffn.w2", {hidden, d});
        b.ffn_b2 = params_.add(pre + "ffn.b2", {d});

        std::fill(b.ln1_gamma.value().begin(), b.ln1_gamma.value().end(), 1.0);
        std::fill(b.ln2_gamma.value().begin(), b.ln2_gamma.value().end(), 1.0);
        init_trunc_normal(b.wq.value(), 0.02, rng);
        init_trunc_normal(b.wk.value(), 0.02, rng);
        init_trunc_normal(b.wv.value(), 0.02, rng);
        init_trunc_normal(b.wo.value(), 0.02, rng);
        init_trunc_normal(b.ffn_w1.value(), 0.02, rng);
        init_trunc_normal(b.ffn_w2.value(), 0.02, rng);
        blocks_.push_back(std::move(b));
    }

    head_w_ = params_.add("head.weight", {d, head_out});
    head_b_ = params_.add("head.bias", {head_out});
    init_trunc_normal(head_w_.value(), 0.02, rng);

    if (cfg_.learned_pos) {
        if (cfg_.pos_tokens <= 0)
            throw TensorError("learned_pos requires pos_tokens to be set");
        pos_table_ = params_.add("pos.table", {cfg_.pos_tokens, d});
        init_trunc_normal(pos_table_.value(), 0.02, rng);
    }
}

Tensor RestorationModel::mha(const Tensor& x, const BlockParams& p) {
    const int t = x.dim(0), d = x.dim(1);
    const int heads = cfg_.num_heads;
    const int dh = d / heads;
    const double scale = 1.0 / std::sqrt((double)dh);

    Tensor q = ops::add_rowvec(ops::matmul(x, p.wq), p.bq);
    Tensor k = ops::add_rowvec(ops::matmul(x, p.wk), p.bk);
    Tensor v = ops::add_rowvec(ops::matmul(x, p.wv), p.bv);

    std::vector<Tensor> head_outs;
    head_outs.reserve(heads);
    for (int h = 0; h < heads; ++h) {
        Tensor qh = ops::slice_cols(q, h * dh, (h + 1) * dh);
        Tensor kh = ops::slice_cols(k, h * dh, (h + 1) * dh);
        Tensor vh = ops::slice_cols(v, h * dh, (h + 1) * dh);
        Tensor scores = ops::affine(ops::matmul_nt(qh, kh), scale, 0.0);
        Tensor probs = ops::softmax_rows(scores);
        for (int row = 0; row < t; ++row)
            attn_row_sums_.push_back(kernels::reduce_sum(
                probs.value().data() + (std::size_t)row * t, (std::size_t)t));
        head_outs.push_back(ops::matmul(probs, vh));
    }
    Tensor merged = heads == 1 ? head_outs[0] : ops::concat_cols(head_outs);
    return ops::add_rowvec(ops::matmul(merged, p.wo), p.bo);
}

Tensor RestorationModel::forward(const FloatImage& img, const RawMask& mask,
                                 Tensor* image_leaf, bool image_requires_grad) {
    img.require_range(Range::Raw255, "model forward");
    if (img.channels != 3) throw TensorError("model forward: expected 3 channels");
    if (img.height % cfg_.patch_size != 0 || img.width % cfg_.patch_size != 0)
        throw TensorError("model forward: dimensions not divisible by patch size");

    attn_row_sums_.clear();

    Tensor raw = ops::image_to_chw(img, image_requires_grad);
    if (image_leaf) *image_leaf = raw;

    Tensor x = embed_tokens(raw, mask, embed_kernel_, embed_bias_, w1_, w2_, mape_, variant_);
    const int tokens = x.dim(0);
    if (pos_table_.defined()) {
        if (tokens != cfg_.pos_tokens)
            throw TensorError("model forward: token count does not match pos table");
        x = ops::add(x, pos_table_);
    }

    for (const BlockParams& b : blocks_) {
        x = ops::add(x, mha(ops::layer_norm(x, b.ln1_gamma, b.ln1_beta), b));
        Tensor h = ops::layer_norm(x, b.ln2_gamma, b.ln2_beta);
        h = ops::add_rowvec(ops::matmul(h, b.ffn_w1), b.ffn_b1);
        h = ops::gelu(h);
        h = ops::add_rowvec(ops::matmul(h, b.ffn_w2), b.ffn_b2);
        x = ops::add(x, h);
    }

    Tensor patches = ops::add_rowvec(ops::matmul(x, head_w_), head_b_);
    Tensor folded = ops::fold_tokens(patches, cfg_.patch_size, img.height / cfg_.patch_size,
                                     img.width / cfg_.patch_size, 3);

    // Signed-scale output back to raw255. With the global residual the raw
    // input is added directly: denorm(fold + norm(x)) == 127.5*fold + x, and
    // this form keeps a zeroed head an exact identity.
    if (cfg_.global_residual)
        return ops::add(ops::affine(folded, 255.0 / 2.0, 0.0), raw);
    return ops::affine(folded, 255.0 / 2.0, 255.0 / 2.0);
}

FloatImage RestorationModel::predict(const FloatImage& img, const RawMask& mask) {
    Tensor out = forward(img, mask);
    return clamp_raw255(ops::chw_to_image(out, Range::Raw255));
}

double l1_loss(const FloatImage& a, const FloatImage& b) {
    if (!a.same_dims(b)) throw ImageError("l1_loss: shape mismatch");
    return kernels::reduce_abs_diff(a.data.data(), b.data.data(), a.size()) / (double)a.size();
}

}  // namespace umbra
