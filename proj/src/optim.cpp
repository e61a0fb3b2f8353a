#include "umbra/optim.hpp"

#include <cmath>

namespace umbra {

double cosine_lr(double lr0, std::int64_t step, std::int64_t total_steps) {
    if (total_steps <= 0) return lr0;
    if (step >= total_steps) return 0.0;
    return lr0 * 0.5 * (1.0 + std::cos(M_PI * (double)step / (double)total_steps));
}

AdamW::AdamW(ParamStore& params, const TrainConfig& cfg) : params_(params), cfg_(cfg) {
    m_.reserve(params.items.size());
    v_.reserve(params.items.size());
    for (auto& [name, t] : params.items) {
        m_.emplace_back(t.size(), 0.0);
        v_.emplace_back(t.size(), 0.0);
    }
}

void AdamW::step(double lr) {
    ++t_;
    const double bc1 = 1.0 - std::pow(cfg_.beta1, (double)t_);
    const double bc2 = 1.0 - std::pow(cfg_.beta2, (double)t_);
    for (std::size_t pi = 0; pi < params_.items.size(); ++pi) {
        Tensor& p = params_.items[pi].second;
        const std::vector<double>& g = p.grad();
        std::vector<double>& val = p.value();
        std::vector<double>& m = m_[pi];
        std::vector<double>& v = v_[pi];
        for (std::size_t i = 0; i < val.size(); ++i) {
            m[i] = cfg_.beta1 * m[i] + (1.0 - cfg_.beta1) * g[i];
            v[i] = cfg_.beta2 * v[i] + (1.0 - cfg_.beta2) * g[i] * g[i];
            const double mhat = m[i] / bc1;
            const double vhat = v[i] / bc2;
            val[i] -= lr * (mhat / (std::sqrt(vhat) + cfg_.eps) + cfg_.weight_decay * val[i]);
        }
    }
}

AdamW::State AdamW::export_state() const { return State{t_, m_, v_}; }

void AdamW::import_state(const State& s) {
    if (s.m.size() != m_.size() || s.v.size() != v_.size())
        throw TensorError("optimizer state does not match parameter layout");
    t_ = s.t;
    m_ = s.m;
    v_ = s.v;
}

}  // namespace umbra
