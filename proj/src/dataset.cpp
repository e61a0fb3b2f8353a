#include "umbra/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include <json.hpp>

#include "umbra/image_io.hpp"

namespace fs = std::filesystem;

namespace umbra {
namespace {

std::vector<std::string> list_files(const fs::path& dir) {
    std::vector<std::string> names;
    for (const auto& entry : fs::directory_iterator(dir))
        if (entry.is_regular_file()) names.push_back(entry.path().filename().string());
    std::sort(names.begin(), names.end());
    return names;
}

void ingest_split(const fs::path& root, const std::string& split, std::vector<DatasetTriplet>& out,
                  std::vector<std::string>& warnings) {
    const fs::path a = root / (split + "_A");
    const fs::path b = root / (split + "_B");
    const fs::path c = root / (split + "_C");
    const bool ea = fs::is_directory(a), eb = fs::is_directory(b), ec = fs::is_directory(c);
    if (!ea && !eb && !ec) {
        warnings.push_back("split '" + split + "' not present under " + root.string());
        return;
    }
    if (!(ea && eb && ec))
        throw DatasetError("incomplete split '" + split + "': need " + split + "_A, " + split +
                           "_B and " + split + "_C under " + root.string());

    const auto fa = list_files(a), fb = list_files(b), fc = list_files(c);
    auto require_match = [&](const std::vector<std::string>& names, const fs::path& dir,
                             const char* role) {
        for (const std::string& n : names)
            if (!fs::exists(dir / n))
                throw DatasetError("orphan file '" + n + "' in " + split + "_" + role +
                                   " (no counterpart in " + dir.string() + ")");
    };
    require_match(fa, b, "A");
    require_match(fa, c, "A");
    require_match(fb, a, "B");
    require_match(fc, a, "C");

    if (fa.empty()) warnings.push_back("split '" + split + "' is empty");
    for (const std::string& n : fa) {
        DatasetTriplet t;
        t.id = split + "/" + n;
        t.shadow_path = (a / n).string();
        t.mask_path = (b / n).string();
        t.free_path = (c / n).string();
        out.push_back(std::move(t));
    }
}

}  // namespace

Dataset ingest_dataset(const std::string& root) {
    if (!fs::is_directory(root)) throw DatasetError("dataset root does not exist: " + root);
    Dataset ds;
    ingest_split(root, "train", ds.train, ds.warnings);
    ingest_split(root, "test", ds.test, ds.warnings);
    if (ds.train.empty() && ds.test.empty())
        ds.warnings.push_back("dataset root contains no triplets: " + root);
    return ds;
}

Sample load_triplet(const DatasetTriplet& t) {
    Sample s;
    s.id = t.id;
    s.shadow = load_image(t.shadow_path);
    s.mask = load_mask(t.mask_path);
    s.free = load_image(t.free_path);
    if (s.shadow.channels != 3)
        throw DatasetError("shadow image is not 3-channel: " + t.shadow_path);
    if (s.free.channels != 3)
        throw DatasetError("shadow-free image is not 3-channel: " + t.free_path);
    if (!s.shadow.same_dims(s.free) || s.shadow.height != s.mask.height ||
        s.shadow.width != s.mask.width)
        throw DatasetError("dimension mismatch across triplet '" + t.id + "' (" +
                           t.shadow_path + ", " + t.mask_path + ", " + t.free_path + ")");
    return s;
}

std::vector<Sample> load_samples(const std::vector<DatasetTriplet>& list) {
    std::vector<Sample> out;
    out.reserve(list.size());
    for (const auto& t : list) out.push_back(load_triplet(t));
    return out;
}

SynthTriplet synth_triplet(int index, const SynthConfig& cfg, bool test_split) {
    const int n = cfg.size;
    std::seed_seq seq{cfg.seed, (std::uint64_t)(test_split ? 1 : 0), (std::uint64_t)index};
    std::mt19937_64 rng(seq);

    // Smooth lit field per channel: bilinear upsample of a coarse grid,
    // snapped to multiples of q_den so the shadowed values stay integral.
    const int grid = 6;
    std::uniform_real_distribution<double> level(40.0, 240.0);
    FloatImage lit(n, n, 3, Range::Raw255);
    for (int c = 0; c < 3; ++c) {
        std::vector<double> coarse(grid * grid);
        for (double& v : coarse) v = level(rng);
        for (int y = 0; y < n; ++y) {
            const double gy = (double)y / (n - 1) * (grid - 1);
            const int y0 = std::min((int)gy, grid - 2);
            const double fy = gy - y0;
            for (int x = 0; x < n; ++x) {
                const double gx = (double)x / (n - 1) * (grid - 1);
                const int x0 = std::min((int)gx, grid - 2);
                const double fx = gx - x0;
                const double v00 = coarse[y0 * grid + x0], v01 = coarse[y0 * grid + x0 + 1];
                const double v10 = coarse[(y0 + 1) * grid + x0],
                             v11 = coarse[(y0 + 1) * grid + x0 + 1];
                const double v = (1 - fy) * ((1 - fx) * v00 + fx * v01) +
                                 fy * ((1 - fx) * v10 + fx * v11);
                const double snapped = std::round(v / cfg.q_den) * cfg.q_den;
                lit.at(y, x, c) = std::clamp(snapped, (double)2 * cfg.q_den, 240.0);
            }
        }
    }

    // Random filled ellipse with area fraction in [mask_area_lo, mask_area_hi].
    RawMask mask(n, n, 0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int attempt = 0; attempt < 64; ++attempt) {
        RawMask cand(n, n, 0);
        const double cx = n * (0.3 + 0.4 * unit(rng));
        const double cy = n * (0.3 + 0.4 * unit(rng));
        const double rx = n * (0.15 + 0.25 * unit(rng));
        const double ry = n * (0.15 + 0.25 * unit(rng));
        const double theta = 2.0 * M_PI * unit(rng);
        const double ct = std::cos(theta), st = std::sin(theta);
        std::size_t area = 0;
        for (int y = 0; y < n; ++y)
            for (int x = 0; x < n; ++x) {
                const double dx = x - cx, dy = y - cy;
                const double u = (dx * ct + dy * st) / rx;
                const double v = (-dx * st + dy * ct) / ry;
                if (u * u + v * v <= 1.0) {
                    cand.at(y, x) = 255;
                    ++area;
                }
            }
        const double frac = (double)area / (double)(n * n);
        if (frac >= cfg.mask_area_lo && frac <= cfg.mask_area_hi) {
            mask = std::move(cand);
            break;
        }
        if (attempt == 63)
            throw DatasetError("synthetic mask sampling failed to hit the area range");
    }

    // Per-channel ratio q = a * L_a in {q_lo..q_hi}/q_den.
    std::uniform_int_distribution<int> qdist(cfg.q_lo, cfg.q_hi);
    std::array<int, 3> qnum{qdist(rng), qdist(rng), qdist(rng)};

    SynthTriplet out;
    for (int c = 0; c < 3; ++c) out.q[c] = (double)qnum[c] / cfg.q_den;
    // Physical decomposition with a single attenuation value shared across
    // channels: a = max q (so every L_a = q/a is <= 1), L_d = 1 - L_a.
    out.attenuation = (double)*std::max_element(qnum.begin(), qnum.end()) / cfg.q_den;
    for (int c = 0; c < 3; ++c) {
        out.ambient[c] = out.q[c] / out.attenuation;
        out.direct[c] = 1.0 - out.ambient[c];
    }

    FloatImage shadow = lit;
    for (int y = 0; y < n; ++y)
        for (int x = 0; x < n; ++x) {
            if (mask.at(y, x) != 255) continue;
            for (int c = 0; c < 3; ++c) {
                // lit is a multiple of q_den, so this is an exact integer.
                shadow.at(y, x, c) = lit.at(y, x, c) / cfg.q_den * qnum[c];
            }
        }

    char id[32];
    std::snprintf(id, sizeof id, "%04d.png", index);
    out.sample.id = id;
    out.sample.shadow = std::move(shadow);
    out.sample.mask = std::move(mask);
    out.sample.free = std::move(lit);
    return out;
}

void generate_synthetic(const std::string& root, const SynthConfig& cfg) {
    const fs::path base(root);
    for (const char* d : {"train_A", "train_B", "train_C", "test_A", "test_B", "test_C"})
        fs::create_directories(base / d);

    nlohmann::json manifest;
    manifest["size"] = cfg.size;
    manifest["seed"] = cfg.seed;
    manifest["images"] = nlohmann::json::array();

    auto emit = [&](int count, bool test_split) {
        const std::string prefix = test_split ? "test" : "train";
        for (int i = 0; i < count; ++i) {
            SynthTriplet t = synth_triplet(i, cfg, test_split);
            save_image(t.sample.shadow, (base / (prefix + "_A") / t.sample.id).string());
            save_mask(t.sample.mask, (base / (prefix + "_B") / t.sample.id).string());
            save_image(t.sample.free, (base / (prefix + "_C") / t.sample.id).string());
            nlohmann::json rec;
            rec["id"] = prefix + "/" + t.sample.id;
            rec["q"] = t.q;
            rec["attenuation"] = t.attenuation;
            rec["ambient"] = t.ambient;
            rec["direct"] = t.direct;
            manifest["images"].push_back(std::move(rec));
        }
    };
    emit(cfg.count_train, false);
    emit(cfg.count_test, true);

    std::ofstream mf(base / "manifest.json");
    if (!mf) throw DatasetError("cannot write manifest under " + root);
    mf << manifest.dump(2) << "\n";
}

}  // namespace umbra
