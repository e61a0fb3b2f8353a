#pragma once
#include <map>
#include <string>

#include "umbra/dataset.hpp"
#include "umbra/embed.hpp"
#include "umbra/model.hpp"
#include "umbra/optim.hpp"

namespace umbra {

// Experiment configuration. On disk this is a sectioned key=value file
// ([dataset]/[model]/[mape]/[train]/[run]); unrecognized keys are errors.
struct RunConfig {
    std::string dataset_root;
    int eval_resolution = 0;  // 0 = native

    ModelConfig model;
    MapeConfig mape;
    TrainConfig train;

    EmbedVariant variant = EmbedVariant::Masked;
    std::string out_dir;
    int eval_every = 1;          // epochs between validation passes
    bool save_predictions = true;

    void validate() const;
};

RunConfig parse_config_text(const std::string& text);
RunConfig load_config(const std::string& path);

// Canonical round-trippable dump (also the checkpoint config echo).
std::string config_echo(const RunConfig& cfg);

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace umbra
