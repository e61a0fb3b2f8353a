#include "umbra/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "umbra/image_io.hpp"
#include "umbra/kernels.hpp"
#include "umbra/ops.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace umbra {
namespace {

// Exclusive ownership of an output directory for the process lifetime.
class DirLock {
  public:
    explicit DirLock(const fs::path& dir) : path_(dir / ".lock") {
        if (fs::exists(path_))
            throw ExperimentError("output directory is locked (remove " + path_.string() +
                                  " if no other run owns it)");
        std::ofstream out(path_);
        if (!out) throw ExperimentError("cannot create lock file: " + path_.string());
    }
    ~DirLock() {
        std::error_code ec;
        fs::remove(path_, ec);
    }
    DirLock(const DirLock&) = delete;
    DirLock& operator=(const DirLock&) = delete;

  private:
    fs::path path_;
};

json region_json(const RegionValues& v) {
    json j;
    j["S"] = v.shadow ? json(*v.shadow) : json(nullptr);
    j["NS"] = v.nonshadow ? json(*v.nonshadow) : json(nullptr);
    j["All"] = v.all ? json(*v.all) : json(nullptr);
    return j;
}

std::optional<double> region_from_json(const json& j, const char* key) {
    if (!j.contains(key) || j[key].is_null()) return std::nullopt;
    return j[key].get<double>();
}

std::string hash_hex(std::uint64_t h) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", (unsigned long long)h);
    return buf;
}

struct RegionAccum {
    double sum_s = 0, sum_ns = 0, sum_all = 0;
    std::size_t n_s = 0, n_ns = 0, n_all = 0;

    void add(const RegionValues& v) {
        if (v.shadow) {
            sum_s += *v.shadow;
            ++n_s;
        }
        if (v.nonshadow) {
            sum_ns += *v.nonshadow;
            ++n_ns;
        }
        if (v.all) {
            sum_all += *v.all;
            ++n_all;
        }
    }
    RegionValues mean() const {
        RegionValues out;
        if (n_s) out.shadow = sum_s / (double)n_s;
        if (n_ns) out.nonshadow = sum_ns / (double)n_ns;
        if (n_all) out.all = sum_all / (double)n_all;
        return out;
    }
};

std::string fmt(std::optional<double> v, const char* spec = "%8.4f") {
    if (!v) return "       -";
    char buf[32];
    std::snprintf(buf, sizeof buf, spec, *v);
    return buf;
}

struct RunRow {
    std::string name;
    AggregateMetrics agg;
};

RunRow read_run_dir(const std::string& dir) {
    const fs::path path = fs::path(dir) / "metrics.jsonl";
    std::ifstream in(path);
    if (!in) throw ExperimentError("missing metrics log: " + path.string());
    RunRow row;
    row.name = fs::path(dir).filename().string();
    bool found_aggregate = false;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        json j = json::parse(line);
        if (j.value("type", "") == "run" && j.contains("variant"))
            row.name = j["variant"].get<std::string>() + " (" + row.name + ")";
        if (j.value("type", "") != "aggregate") continue;
        row.agg.images = j.value("images", 0);
        for (auto [field, dest] : {std::pair{"mae_lab", &row.agg.mae_lab},
                                   std::pair{"psnr", &row.agg.psnr_db},
                                   std::pair{"ssim", &row.agg.ssim}}) {
            dest->shadow = region_from_json(j[field], "S");
            dest->nonshadow = region_from_json(j[field], "NS");
            dest->all = region_from_json(j[field], "All");
        }
        found_aggregate = true;
    }
    if (!found_aggregate)
        throw ExperimentError("metrics log has no aggregate record (incomplete run?): " +
                              path.string());
    return row;
}

void write_table_files(const fs::path& out_dir, const std::vector<std::string>& dirs) {
    std::ofstream(out_dir / "table.txt") << report_table(dirs);
    std::ofstream(out_dir / "table.csv") << report_csv(dirs);
}

}  // namespace

Trainer::Trainer(RestorationModel& model, const TrainConfig& tc, std::size_t train_size)
    : model_(model), tc_(tc), opt_(model.params(), tc), rng_(tc.seed) {
    const std::int64_t steps_per_epoch =
        ((std::int64_t)train_size + tc.batch_size - 1) / tc.batch_size;
    total_steps_ = steps_per_epoch * tc.epochs;
}

double Trainer::run_epoch(const std::vector<Sample>& train) {
    if (train.empty()) throw ExperimentError("training set is empty");
    std::vector<std::size_t> order(train.size());
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng_);

    double loss_sum = 0.0;
    std::size_t i = 0;
    while (i < order.size()) {
        const std::size_t batch = std::min<std::size_t>(tc_.batch_size, order.size() - i);
        model_.params().zero_grad();
        double batch_loss = 0.0;
        for (std::size_t b = 0; b < batch; ++b, ++i) {
            const Sample& s = train[order[i]];
            Tensor pred = model_.forward(s.shadow, s.mask);
            Tensor gt = ops::image_to_chw(s.free);
            Tensor loss = ops::l1_loss(pred, gt);
            if (batch > 1) loss = ops::affine(loss, 1.0 / (double)batch, 0.0);
            if (!std::isfinite(loss.item()))
                throw TrainAbort("non-finite loss at step " + std::to_string(step_) +
                                 " (epoch " + std::to_string(epochs_done_ + 1) + ", sample " +
                                 s.id + ")");
            loss.backward();
            batch_loss += loss.item();
        }
        last_lr_ = cosine_lr(tc_.lr, step_, total_steps_);
        opt_.step(last_lr_);
        ++step_;
        loss_sum += batch_loss;
    }
    ++epochs_done_;
    return loss_sum * (double)tc_.batch_size / (double)train.size();
}

std::string Trainer::rng_state() const {
    std::ostringstream out;
    out << rng_;
    return out.str();
}

void Trainer::restore(const std::string& rng_state, int epochs_done, std::int64_t step) {
    std::istringstream in(rng_state);
    in >> rng_;
    if (!in) throw ExperimentError("corrupt RNG state in checkpoint");
    epochs_done_ = epochs_done;
    step_ = step;
}

EvalOutcome evaluate_model(RestorationModel& model, const std::vector<Sample>& test,
                           int eval_resolution, const std::vector<RawMask>* input_masks) {
    if (input_masks && input_masks->size() != test.size())
        throw ExperimentError("input mask list does not match the test set");
    EvalOutcome out;
    RegionAccum acc_mae, acc_psnr, acc_ssim;
    for (std::size_t i = 0; i < test.size(); ++i) {
        const Sample& s = test[i];
        const RawMask& input_mask = input_masks ? (*input_masks)[i] : s.mask;
        FloatImage pred = model.predict(s.shadow, input_mask);
        FloatImage gt = s.free;
        RawMask region_mask = s.mask;
        if (eval_resolution > 0 &&
            (eval_resolution != pred.height || eval_resolution != pred.width)) {
            pred = resize_nearest(pred, eval_resolution, eval_resolution);
            gt = resize_nearest(gt, eval_resolution, eval_resolution);
            region_mask = resize_nearest(region_mask, eval_resolution, eval_resolution);
        }
        RegionMetrics m = evaluate_pair(pred, gt, region_mask);
        acc_mae.add(m.mae_lab);
        acc_psnr.add(m.psnr_db);
        acc_ssim.add(m.ssim);
        out.per_image.emplace_back(s.id, std::move(m));
    }
    out.aggregate.mae_lab = acc_mae.mean();
    out.aggregate.psnr_db = acc_psnr.mean();
    out.aggregate.ssim = acc_ssim.mean();
    out.aggregate.images = test.size();
    return out;
}

namespace {

// The positional table is sized by the dataset's token grid.
ModelConfig resolve_model_config(const RunConfig& cfg, const std::vector<Sample>& samples) {
    ModelConfig mc = cfg.model;
    if (mc.learned_pos && mc.pos_tokens == 0 && !samples.empty())
        mc.pos_tokens = (samples[0].shadow.height / mc.patch_size) *
                        (samples[0].shadow.width / mc.patch_size);
    return mc;
}

void write_metrics_jsonl(const fs::path& path, const RunConfig& cfg, std::uint64_t ckpt_hash,
                         const EvalOutcome& eval, int eval_resolution) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw ExperimentError("cannot write " + path.string());
    json head;
    head["type"] = "run";
    head["variant"] = embed_variant_name(cfg.variant);
    head["seed"] = cfg.train.seed;
    head["eval_resolution"] = eval_resolution;
    head["kernels"] = std::string(kernels::active_name());
    head["checkpoint_hash"] = hash_hex(ckpt_hash);
    out << head.dump() << "\n";
    for (const auto& [id, m] : eval.per_image) {
        json j;
        j["type"] = "image";
        j["id"] = id;
        j["mae_lab"] = region_json(m.mae_lab);
        j["psnr"] = region_json(m.psnr_db);
        j["ssim"] = region_json(m.ssim);
        j["shadow_pixels"] = m.shadow_pixels;
        j["nonshadow_pixels"] = m.nonshadow_pixels;
        out << j.dump() << "\n";
    }
    json agg;
    agg["type"] = "aggregate";
    agg["images"] = eval.aggregate.images;
    agg["mae_lab"] = region_json(eval.aggregate.mae_lab);
    agg["psnr"] = region_json(eval.aggregate.psnr_db);
    agg["ssim"] = region_json(eval.aggregate.ssim);
    out << agg.dump() << "\n";
}

void save_predictions(RestorationModel& model, const std::vector<Sample>& test,
                      const fs::path& dir) {
    fs::create_directories(dir);
    for (const Sample& s : test) {
        FloatImage pred = model.predict(s.shadow, s.mask);
        std::string name = s.id;
        std::replace(name.begin(), name.end(), '/', '_');
        save_image(pred, (dir / name).string());
    }
}

Checkpoint make_checkpoint(const RestorationModel& model, Trainer& trainer,
                           const RunConfig& cfg) {
    Checkpoint ckpt = snapshot(model);
    ckpt.config_echo = config_echo(cfg);
    ckpt.epochs_done = trainer.epochs_done();
    ckpt.global_step = trainer.global_step();
    ckpt.rng_state = trainer.rng_state();
    ckpt.optimizer = trainer.optimizer().export_state();
    return ckpt;
}

}  // namespace

RunResult run_experiment(const RunConfig& cfg, bool resume) {
    cfg.validate();
    if (cfg.out_dir.empty()) throw ExperimentError("run: output directory not set");
    if (cfg.dataset_root.empty()) throw ExperimentError("run: dataset root not set");

    const fs::path out_dir(cfg.out_dir);
    fs::create_directories(out_dir);
    DirLock lock(out_dir);

    Dataset ds = ingest_dataset(cfg.dataset_root);
    for (const std::string& w : ds.warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
    std::vector<Sample> train = load_samples(ds.train);
    std::vector<Sample> test = load_samples(ds.test);
    if (train.empty()) throw ExperimentError("dataset has no training triplets");

    std::ofstream(out_dir / "config.ini") << config_echo(cfg);

    RestorationModel model(resolve_model_config(cfg, train), cfg.mape, cfg.variant,
                           cfg.train.seed);
    Trainer trainer(model, cfg.train, train.size());

    const fs::path ckpt_path = out_dir / "checkpoint.bin";
    const fs::path log_path = out_dir / "train_log.jsonl";
    if (resume && fs::exists(ckpt_path)) {
        Checkpoint ckpt = load_checkpoint(ckpt_path.string());
        if (ckpt.config_echo != config_echo(cfg))
            throw ExperimentError("resume: checkpoint config does not match this run");
        restore_params(model, ckpt);
        if (ckpt.optimizer) trainer.optimizer().import_state(*ckpt.optimizer);
        trainer.restore(ckpt.rng_state, (int)ckpt.epochs_done, ckpt.global_step);
        std::fprintf(stderr, "resuming after epoch %d\n", trainer.epochs_done());
    } else {
        std::ofstream(log_path, std::ios::trunc);
    }

    std::ofstream log(log_path, std::ios::app);
    try {
        while (trainer.epochs_done() < cfg.train.epochs) {
            const double mean_loss = trainer.run_epoch(train);
            json rec;
            rec["type"] = "epoch";
            rec["epoch"] = trainer.epochs_done();
            rec["loss"] = mean_loss;
            rec["lr"] = trainer.last_lr();
            const bool do_eval = !test.empty() && cfg.eval_every > 0 &&
                                 (trainer.epochs_done() % cfg.eval_every == 0 ||
                                  trainer.epochs_done() == cfg.train.epochs);
            if (do_eval) {
                EvalOutcome val = evaluate_model(model, test, cfg.eval_resolution);
                rec["val_mae_lab"] = region_json(val.aggregate.mae_lab);
                rec["val_psnr"] = region_json(val.aggregate.psnr_db);
                rec["val_ssim"] = region_json(val.aggregate.ssim);
            }
            log << rec.dump() << "\n";
            log.flush();
            save_checkpoint(ckpt_path.string(), make_checkpoint(model, trainer, cfg));
        }
    } catch (const TrainAbort& e) {
        // State dump so the failure is inspectable, then propagate.
        save_checkpoint((out_dir / "abort.bin").string(), make_checkpoint(model, trainer, cfg));
        throw TrainAbort(std::string(e.what()) + " [state dumped to " +
                         (out_dir / "abort.bin").string() + "]");
    }
    if (!fs::exists(ckpt_path))
        save_checkpoint(ckpt_path.string(), make_checkpoint(model, trainer, cfg));

    EvalOutcome eval;
    if (!test.empty()) eval = evaluate_model(model, test, cfg.eval_resolution);
    write_metrics_jsonl(out_dir / "metrics.jsonl", cfg, param_hash(model), eval,
                        cfg.eval_resolution);
    if (cfg.save_predictions && !test.empty())
        save_predictions(model, test, out_dir / "predictions");
    write_table_files(out_dir, {out_dir.string()});

    RunResult result;
    result.final_metrics = eval.aggregate;
    result.checkpoint_path = ckpt_path.string();
    result.metrics_path = (out_dir / "metrics.jsonl").string();
    result.epochs_done = trainer.epochs_done();
    return result;
}

RunResult run_eval(const RunConfig& cfg, const std::string& checkpoint_path,
                   const std::string& out_dir, const std::optional<std::string>& mask_dir) {
    cfg.validate();
    const fs::path out(out_dir);
    fs::create_directories(out);
    DirLock lock(out);

    Dataset ds = ingest_dataset(cfg.dataset_root);
    std::vector<Sample> test = load_samples(ds.test);
    if (test.empty()) throw ExperimentError("dataset has no test triplets");

    RestorationModel model(resolve_model_config(cfg, test), cfg.mape, cfg.variant,
                           cfg.train.seed);
    Checkpoint ckpt = load_checkpoint(checkpoint_path);
    restore_params(model, ckpt);
    const std::uint64_t hash_before = param_hash(model);

    std::optional<std::vector<RawMask>> input_masks;
    if (mask_dir) {
        input_masks.emplace();
        for (const Sample& s : test) {
            std::string name = s.id.substr(s.id.find('/') + 1);
            const fs::path p = fs::path(*mask_dir) / name;
            if (!fs::exists(p))
                throw ExperimentError("mask replacement missing for " + s.id + ": " + p.string());
            input_masks->push_back(load_mask(p.string()));
        }
    }

    EvalOutcome eval = evaluate_model(model, test, cfg.eval_resolution,
                                      input_masks ? &*input_masks : nullptr);
    const std::uint64_t hash_after = param_hash(model);
    if (hash_before != hash_after)
        throw ExperimentError("evaluation mutated model parameters (hash changed)");

    write_metrics_jsonl(out / "metrics.jsonl", cfg, hash_after, eval, cfg.eval_resolution);
    write_table_files(out, {out.string()});

    RunResult result;
    result.final_metrics = eval.aggregate;
    result.checkpoint_path = checkpoint_path;
    result.metrics_path = (out / "metrics.jsonl").string();
    return result;
}

std::string report_table(const std::vector<std::string>& result_dirs) {
    std::ostringstream out;
    out << "run                              region   MAE-LAB     PSNR     SSIM\n";
    out << "--------------------------------------------------------------------\n";
    for (const std::string& dir : result_dirs) {
        RunRow row = read_run_dir(dir);
        const char* regions[3] = {"S", "NS", "All"};
        const std::optional<double> mae[3] = {row.agg.mae_lab.shadow, row.agg.mae_lab.nonshadow,
                                              row.agg.mae_lab.all};
        const std::optional<double> ps[3] = {row.agg.psnr_db.shadow, row.agg.psnr_db.nonshadow,
                                             row.agg.psnr_db.all};
        const std::optional<double> ss[3] = {row.agg.ssim.shadow, row.agg.ssim.nonshadow,
                                             row.agg.ssim.all};
        for (int r = 0; r < 3; ++r) {
            char name[40];
            std::snprintf(name, sizeof name, "%-32s", r == 0 ? row.name.c_str() : "");
            out << name << " " << regions[r] << (r == 2 ? " " : "  ") << " " << fmt(mae[r])
                << " " << fmt(ps[r], "%8.2f") << " " << fmt(ss[r], "%8.4f") << "\n";
        }
    }
    return out.str();
}

std::string report_csv(const std::vector<std::string>& result_dirs) {
    std::ostringstream out;
    out << "run,images,mae_s,mae_ns,mae_all,psnr_s,psnr_ns,psnr_all,ssim_s,ssim_ns,ssim_all\n";
    auto cell = [](std::optional<double> v) {
        if (!v) return std::string();
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.6f", *v);
        return std::string(buf);
    };
    for (const std::string& dir : result_dirs) {
        RunRow row = read_run_dir(dir);
        out << row.name << "," << row.agg.images << "," << cell(row.agg.mae_lab.shadow) << ","
            << cell(row.agg.mae_lab.nonshadow) << "," << cell(row.agg.mae_lab.all) << ","
            << cell(row.agg.psnr_db.shadow) << "," << cell(row.agg.psnr_db.nonshadow) << ","
            << cell(row.agg.psnr_db.all) << "," << cell(row.agg.ssim.shadow) << ","
            << cell(row.agg.ssim.nonshadow) << "," << cell(row.agg.ssim.all) << "\n";
    }
    return out.str();
}

}  // namespace umbra
