#pragma once
#include <optional>
#include <string>

#include "umbra/checkpoint.hpp"
#include "umbra/config.hpp"
#include "umbra/dataset.hpp"
#include "umbra/degrade.hpp"
#include "umbra/metrics.hpp"
#include "umbra/model.hpp"
#include "umbra/optim.hpp"

namespace umbra {

// Epoch-granular training driver. Deterministic given the seed: the sample
// order, every forward/backward and the AdamW trajectory replay exactly,
// and the RNG state round-trips through checkpoints for resume.
class Trainer {
  public:
    Trainer(RestorationModel& model, const TrainConfig& tc, std::size_t train_size);

    double run_epoch(const std::vector<Sample>& train);  // returns mean L1

    int epochs_done() const { return epochs_done_; }
    std::int64_t global_step() const { return step_; }
    std::int64_t total_steps() const { return total_steps_; }
    double last_lr() const { return last_lr_; }
    AdamW& optimizer() { return opt_; }

    std::string rng_state() const;
    void restore(const std::string& rng_state, int epochs_done, std::int64_t step);

  private:
    RestorationModel& model_;
    TrainConfig tc_;
    AdamW opt_;
    std::mt19937_64 rng_;
    std::int64_t total_steps_ = 0;
    std::int64_t step_ = 0;
    int epochs_done_ = 0;
    double last_lr_ = 0.0;
};

// Per-image metric rows plus the equally-weighted dataset means.
struct AggregateMetrics {
    RegionValues mae_lab;
    RegionValues psnr_db;
    RegionValues ssim;
    std::size_t images = 0;
};

struct EvalOutcome {
    std::vector<std::pair<std::string, RegionMetrics>> per_image;
    AggregateMetrics aggregate;
};

// Regions always come from the ground-truth masks; input_masks, when given,
// replace the masks fed to the model (the degraded-mask study).
EvalOutcome evaluate_model(RestorationModel& model, const std::vector<Sample>& test,
                           int eval_resolution,
                           const std::vector<RawMask>* input_masks = nullptr);

struct RunResult {
    AggregateMetrics final_metrics;
    std::string checkpoint_path;
    std::string metrics_path;
    int epochs_done = 0;
};

// Full experiment: lock the output directory, train (optionally resuming
// from the directory's checkpoint), evaluate the test split, and write
// config echo, train_log.jsonl, metrics.jsonl, table.txt/csv, predictions
// and checkpoint.bin.
RunResult run_experiment(const RunConfig& cfg, bool resume = false);

// Evaluation-only pass against an existing checkpoint; never trains (the
// parameter hash is logged before and after and verified unchanged).
RunResult run_eval(const RunConfig& cfg, const std::string& checkpoint_path,
                   const std::string& out_dir,
                   const std::optional<std::string>& mask_dir = std::nullopt);

// Plain-text table for one or more result directories (reads metrics.jsonl).
std::string report_table(const std::vector<std::string>& result_dirs);
std::string report_csv(const std::vector<std::string>& result_dirs);

struct ExperimentError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Training produced a non-finite loss; carries the state-dump path.
struct TrainAbort : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace umbra
