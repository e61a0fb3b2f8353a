#pragma once
#include <cstdint>
#include <vector>

#include "umbra/model.hpp"

namespace umbra {

struct TrainConfig {
    double lr = 2e-4;
    int epochs = 30;
    int batch_size = 1;
    double weight_decay = 1e-2;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    std::uint64_t seed = 0;
};

// lr0 * 0.5 * (1 + cos(pi * t / total)): lr0 at t=0, 0 at t=total.
double cosine_lr(double lr0, std::int64_t step, std::int64_t total_steps);

// AdamW with decoupled weight decay. State is keyed by parameter order,
// which the ParamStore keeps stable.
class AdamW {
  public:
    AdamW(ParamStore& params, const TrainConfig& cfg);

    void step(double lr);

    std::int64_t steps_taken() const { return t_; }

    // Checkpoint access.
    struct State {
        std::int64_t t = 0;
        std::vector<std::vector<double>> m, v;
    };
    State export_state() const;
    void import_state(const State& s);

  private:
    ParamStore& params_;
    TrainConfig cfg_;
    std::int64_t t_ = 0;
    std::vector<std::vector<double>> m_, v_;
};

}  // namespace umbra
