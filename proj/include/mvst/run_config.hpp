#pragma once

#include "mvst/am3d_gcn.hpp"
#include "mvst/ctc.hpp"
#include "mvst/fusion.hpp"
#include "mvst/transformer.hpp"

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

namespace mvst {

/// Everything a train/evaluate/ablate run depends on. The JSON form uses the
/// field names below as keys and is embedded in every checkpoint and report.
struct RunConfig {
    std::string preset = "desk";
    std::string manifest;
    std::string output_dir = "run";
    ViewSelection views = ViewSelection::both;

    std::size_t window = 8;
    std::size_t stride = 4;

    std::size_t scales = 3;
    std::vector<std::size_t> gcn_channels{32, 64};
    bool use_3d = true;
    bool use_multiscale = true;
    bool use_stan = true;

    std::size_t vit_patch = 8;
    std::size_t vit_dim = 64;
    std::size_t vit_heads = 4;
    std::size_t vit_layers = 2;
    std::size_t vit_ff_dim = 256;

    std::size_t rgb_width = 64;
    std::size_t skeleton_width = 64;
    std::size_t model_dim = 128;
    std::size_t encoder_layers = 2;
    std::size_t encoder_heads = 8;
    std::size_t encoder_ff_dim = 512;

    CtcVariant ctc_loss = CtcVariant::nll;
    double lr = 1e-3;
    double weight_decay = 1e-3;
    std::size_t batch_size = 2;
    double dropout = 0.1;

    std::uint64_t seed = 7;
    std::size_t max_steps = 3000;
    std::size_t eval_every = 50;
    std::size_t checkpoint_every = 0;
    /// Stop once the training split decodes with WER 0 and its mean nll is below early_stop_loss.
    bool early_stop = true;
    double early_stop_loss = 0.1;

    /// Throws ConfigError naming the first offending field.
    void validate() const;

    nlohmann::json to_json() const;
    /// Keys absent from `doc` keep the values already in `base`; unknown keys are rejected.
    static RunConfig from_json(const nlohmann::json& doc, RunConfig base);
    static RunConfig from_json(const nlohmann::json& doc);

    Am3dGcnConfig gcn_config() const;
    VitConfig vit_config(std::size_t height, std::size_t width) const;
    EncoderConfig encoder_config() const;
    FusionConfig fusion_config() const;
};

/// "desk" (minutes on one core) or "paper" (batch 32, d = 1024).
RunConfig preset_config(const std::string& name);
std::vector<std::string> preset_names();

RunConfig load_run_config(const std::string& path);

} // namespace mvst
