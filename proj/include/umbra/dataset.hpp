#pragma once
#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "umbra/image.hpp"

namespace umbra {

struct DatasetTriplet {
    std::string id;
    std::string shadow_path;
    std::string mask_path;
    std::string free_path;
};

struct Dataset {
    std::vector<DatasetTriplet> train;
    std::vector<DatasetTriplet> test;
    std::vector<std::string> warnings;
};

// ISTD directory convention: root/{train,test}_{A,B,C} with A = shadow
// images, B = masks, C = shadow-free images, matched by filename. A split
// whose three directories are all absent is skipped with a warning; a
// partial split, orphan files, or dimension mismatches are errors.
Dataset ingest_dataset(const std::string& root);

// Fully loaded triplet.
struct Sample {
    std::string id;
    FloatImage shadow;  // Raw255, 3ch
    RawMask mask;
    FloatImage free;  // Raw255, 3ch
};

Sample load_triplet(const DatasetTriplet& t);
std::vector<Sample> load_samples(const std::vector<DatasetTriplet>& list);

struct SynthConfig {
    int count_train = 200;
    int count_test = 50;
    int size = 64;
    std::uint64_t seed = 0;
    // Per-channel shadow/lit ratio q = a * L_a is drawn from {q_lo..q_hi}/q_den;
    // lit values land on multiples of q_den so the stored 8-bit triplets
    // satisfy the linear shadow model exactly.
    int q_den = 20;
    int q_lo = 4;   // 0.2
    int q_hi = 10;  // 0.5
    double mask_area_lo = 0.10;
    double mask_area_hi = 0.35;
};

// Writes a synthetic dataset in the triplet layout plus manifest.json with
// the per-image physical parameters. Deterministic per seed, byte-for-byte.
void generate_synthetic(const std::string& root, const SynthConfig& cfg);

// In-memory generation of one triplet (used by the writer and by tests).
struct SynthTriplet {
    Sample sample;
    std::array<double, 3> q;          // shadow = q * lit inside the mask
    double attenuation = 0.0;         // a, shared across channels
    std::array<double, 3> ambient{};  // L_a = q / a
    std::array<double, 3> direct{};   // L_d = 1 - L_a
};

SynthTriplet synth_triplet(int index, const SynthConfig& cfg, bool test_split);

struct DatasetError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace umbra
