#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

#include <json.hpp>

#include "umbra/config.hpp"
#include "umbra/dataset.hpp"
#include "umbra/degrade.hpp"
#include "umbra/embed.hpp"
#include "umbra/experiment.hpp"
#include "umbra/image_io.hpp"
#include "umbra/kernels.hpp"
#include "umbra/masks.hpp"

namespace fs = std::filesystem;
using namespace umbra;

namespace {

struct CommonOverrides {
    std::string config_path;
    std::string out_dir;
    std::string variant;
    std::int64_t seed = -1;

    RunConfig resolve() const {
        RunConfig cfg = config_path.empty() ? RunConfig{} : load_config(config_path);
        if (!out_dir.empty()) cfg.out_dir = out_dir;
        if (!variant.empty()) cfg.variant = embed_variant_from_name(variant);
        if (seed >= 0) cfg.train.seed = (std::uint64_t)seed;
        return cfg;
    }
};

void print_aggregate(const AggregateMetrics& agg) {
    auto show = [](const char* name, const RegionValues& v) {
        auto cell = [](std::optional<double> x) {
            return x ? std::to_string(*x) : std::string("-");
        };
        std::cout << "  " << name << "  S=" << cell(v.shadow) << "  NS=" << cell(v.nonshadow)
                  << "  All=" << cell(v.all) << "\n";
    };
    std::cout << "aggregate over " << agg.images << " images:\n";
    show("MAE-LAB", agg.mae_lab);
    show("PSNR   ", agg.psnr_db);
    show("SSIM   ", agg.ssim);
}

int cmd_synth(const std::string& out, int n_train, int n_test, int size, std::uint64_t seed) {
    SynthConfig cfg;
    cfg.count_train = n_train;
    cfg.count_test = n_test;
    cfg.size = size;
    cfg.seed = seed;
    generate_synthetic(out, cfg);
    std::cout << "wrote " << n_train << " train + " << n_test << " test triplets to " << out
              << "\n";
    return 0;
}

int cmd_ingest_check(const std::string& root, bool stats) {
    Dataset ds = ingest_dataset(root);
    for (const std::string& w : ds.warnings) std::cerr << "warning: " << w << "\n";
    std::cout << "train triplets: " << ds.train.size() << "\n";
    std::cout << "test triplets:  " << ds.test.size() << "\n";

    // Validate by loading everything.
    auto check = [&](const std::vector<DatasetTriplet>& list, const char* split) {
        std::vector<Sample> samples = load_samples(list);
        if (!stats || samples.empty()) return;
        // Sign statistics of the signed-normalized shadow images, both before
        // and after signed-mask modulation.
        double s_neg = 0, ns_pos = 0, s_neg_mod = 0, ns_pos_mod = 0;
        std::size_t counted = 0;
        for (const Sample& s : samples) {
            FloatImage norm = normalize_signed(s.shadow);
            SignStats pre = sign_statistics(norm, s.mask);
            FloatImage modulated = mask_modulate(norm, binarize_signed(s.mask));
            SignStats post = sign_statistics(modulated, s.mask);
            if (!pre.shadow_neg_frac || !pre.nonshadow_pos_frac) continue;
            s_neg += *pre.shadow_neg_frac;
            ns_pos += *pre.nonshadow_pos_frac;
            s_neg_mod += *post.shadow_neg_frac;
            ns_pos_mod += *post.nonshadow_pos_frac;
            ++counted;
        }
        if (counted) {
            std::cout << split << " sign statistics (" << counted << " images):\n"
                      << "  normalized:  shadow-negative " << s_neg / counted
                      << ", non-shadow-positive " << ns_pos / counted << "\n"
                      << "  modulated:   shadow-negative " << s_neg_mod / counted
                      << ", non-shadow-positive " << ns_pos_mod / counted << "\n";
        }
    };
    check(ds.train, "train");
    check(ds.test, "test");
    std::cout << "ok\n";
    return 0;
}

int cmd_degrade(const std::string& root, const std::string& split, const std::string& out,
                double target_ber, std::uint64_t seed, int band_width) {
    Dataset ds = ingest_dataset(root);
    const auto& list = split == "train" ? ds.train : ds.test;
    if (list.empty()) throw DatasetError("no triplets in split '" + split + "'");
    fs::create_directories(out);

    nlohmann::json manifest;
    manifest["target_ber"] = target_ber;
    manifest["seed"] = seed;
    manifest["band_width"] = band_width;
    manifest["images"] = nlohmann::json::object();
    double sum = 0;
    for (const auto& t : list) {
        RawMask mask = load_mask(t.mask_path);
        DegradeSpec spec{target_ber, seed, band_width};
        DegradeResult r = degrade_mask(mask, spec);
        const std::string name = fs::path(t.mask_path).filename().string();
        save_mask(r.mask, (fs::path(out) / name).string());
        const double achieved = r.achieved.ber.value_or(0.0);
        manifest["images"][t.id] = achieved;
        sum += achieved;
    }
    manifest["mean_achieved_ber"] = sum / (double)list.size();
    std::ofstream(fs::path(out) / "manifest.json") << manifest.dump(2) << "\n";
    std::cout << "degraded " << list.size() << " masks, mean achieved BER "
              << sum / (double)list.size() << "\n";
    return 0;
}

int cmd_report(const std::vector<std::string>& dirs, bool csv) {
    std::cout << (csv ? report_csv(dirs) : report_table(dirs));
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"shadow-removal research toolkit"};
    app.require_subcommand(1);

    // synth
    auto* synth = app.add_subcommand("synth", "generate a synthetic triplet dataset");
    std::string synth_out;
    int synth_n = 200, synth_n_test = 50, synth_size = 64;
    std::uint64_t synth_seed = 0;
    synth->add_option("--out", synth_out, "output dataset root")->required();
    synth->add_option("--n", synth_n, "training triplets");
    synth->add_option("--n-test", synth_n_test, "test triplets");
    synth->add_option("--size", synth_size, "image side length");
    synth->add_option("--seed", synth_seed, "generator seed");

    // ingest-check
    auto* ingest = app.add_subcommand("ingest-check", "validate a dataset in triplet layout");
    std::string ingest_root;
    bool ingest_stats = false;
    ingest->add_option("--root", ingest_root, "dataset root")->required();
    ingest->add_flag("--stats", ingest_stats, "report region sign statistics");

    // train
    auto* train = app.add_subcommand("train", "train a model per config");
    CommonOverrides train_ov;
    bool train_resume = false;
    train->add_option("--config", train_ov.config_path, "run config file")->required();
    train->add_option("--out", train_ov.out_dir, "output directory override");
    train->add_option("--variant", train_ov.variant, "embedding variant override");
    train->add_option("--seed", train_ov.seed, "seed override");
    train->add_flag("--resume", train_resume, "resume from the directory checkpoint");

    // eval
    auto* eval = app.add_subcommand("eval", "evaluate an existing checkpoint (never trains)");
    CommonOverrides eval_ov;
    std::string eval_ckpt, eval_out, eval_mask_dir;
    eval->add_option("--config", eval_ov.config_path, "run config file")->required();
    eval->add_option("--checkpoint", eval_ckpt, "checkpoint to evaluate")->required();
    eval->add_option("--out", eval_out, "output directory")->required();
    eval->add_option("--variant", eval_ov.variant, "embedding variant override");
    eval->add_option("--mask-dir", eval_mask_dir,
                     "replace model input masks with this directory's masks");

    // degrade
    auto* degrade = app.add_subcommand("degrade", "write BER-degraded masks for a split");
    std::string deg_root, deg_split = "test", deg_out;
    double deg_target = 1.0;
    std::uint64_t deg_seed = 0;
    int deg_band = 2;
    degrade->add_option("--root", deg_root, "dataset root")->required();
    degrade->add_option("--split", deg_split, "train or test");
    degrade->add_option("--out", deg_out, "output mask directory")->required();
    degrade->add_option("--target-ber", deg_target, "target BER in (0,100)")->required();
    degrade->add_option("--seed", deg_seed, "degradation seed");
    degrade->add_option("--band-width", deg_band, "contour band width (pixels)");

    // ablate
    auto* ablate = app.add_subcommand("ablate", "run all three embedding variants");
    CommonOverrides ablate_ov;
    ablate->add_option("--config", ablate_ov.config_path, "run config file")->required();
    ablate->add_option("--out", ablate_ov.out_dir, "output directory")->required();
    ablate->add_option("--seed", ablate_ov.seed, "seed override");

    // report
    auto* report = app.add_subcommand("report", "format result tables from run directories");
    std::vector<std::string> report_dirs;
    bool report_as_csv = false;
    report->add_option("dirs", report_dirs, "result directories")->required();
    report->add_flag("--csv", report_as_csv, "emit CSV instead of text");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*synth) return cmd_synth(synth_out, synth_n, synth_n_test, synth_size, synth_seed);
        if (*ingest) return cmd_ingest_check(ingest_root, ingest_stats);
        if (*train) {
            RunConfig cfg = train_ov.resolve();
            RunResult r = run_experiment(cfg, train_resume);
            std::cout << "trained " << r.epochs_done << " epochs; checkpoint at "
                      << r.checkpoint_path << "\n";
            print_aggregate(r.final_metrics);
            return 0;
        }
        if (*eval) {
            RunConfig cfg = eval_ov.resolve();
            std::optional<std::string> mask_dir;
            if (!eval_mask_dir.empty()) mask_dir = eval_mask_dir;
            RunResult r = run_eval(cfg, eval_ckpt, eval_out, mask_dir);
            print_aggregate(r.final_metrics);
            return 0;
        }
        if (*degrade)
            return cmd_degrade(deg_root, deg_split, deg_out, deg_target, deg_seed, deg_band);
        if (*ablate) {
            RunConfig base = ablate_ov.resolve();
            std::vector<std::string> dirs;
            for (EmbedVariant v :
                 {EmbedVariant::Masked, EmbedVariant::Plain, EmbedVariant::MaskedUnitMod}) {
                RunConfig cfg = base;
                cfg.variant = v;
                cfg.out_dir = (fs::path(base.out_dir) / embed_variant_name(v)).string();
                std::cout << "=== variant " << embed_variant_name(v) << " ===\n";
                RunResult r = run_experiment(cfg, false);
                print_aggregate(r.final_metrics);
                dirs.push_back(cfg.out_dir);
            }
            const std::string table = report_table(dirs);
            std::ofstream(fs::path(base.out_dir) / "ablation_table.txt") << table;
            std::cout << table;
            return 0;
        }
        if (*report) return cmd_report(report_dirs, report_as_csv);
    } catch (const TrainAbort& e) {
        std::cerr << "training aborted: " << e.what() << "\n";
        return 2;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const DatasetError& e) {
        std::cerr << "dataset error: " << e.what() << "\n";
        return 1;
    } catch (const ImageError& e) {
        std::cerr << "image error: " << e.what() << "\n";
        return 1;
    } catch (const DegradeError& e) {
        std::cerr << "degrade error: " << e.what() << "\n";
        return 1;
    } catch (const ExperimentError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "runtime error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
