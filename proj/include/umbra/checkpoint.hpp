#pragma once
#include <cstdint>
#include <optional>
#include <string>

#include "umbra/model.hpp"
#include "umbra/optim.hpp"

namespace umbra {

// Versioned binary container: magic + version, a config echo as text,
// named little-endian f64 parameter blobs, optional optimizer state, and
// the training RNG state. Reload reproduces forward outputs bit-exactly.
struct Checkpoint {
    std::string config_echo;
    std::int64_t epochs_done = 0;
    std::int64_t global_step = 0;
    std::string rng_state;  // serialized mt19937_64 ("" when untrained)
    std::vector<std::pair<std::string, std::vector<double>>> params;
    std::optional<AdamW::State> optimizer;
};

void save_checkpoint(const std::string& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::string& path);

// Copies named blobs into the model (throws on any name/size mismatch).
void restore_params(RestorationModel& model, const Checkpoint& ckpt);
Checkpoint snapshot(const RestorationModel& model);

// FNV-1a over the parameter blobs; logged by evaluation-only runs to prove
// the weights were untouched.
std::uint64_t param_hash(const RestorationModel& model);

struct CheckpointError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace umbra
