#pragma once

#include "mvst/am3d_gcn.hpp"
#include "mvst/dataset.hpp"
#include "mvst/fusion.hpp"
#include "mvst/run_config.hpp"
#include "mvst/transformer.hpp"

#include <memory>
#include <optional>

namespace mvst {

/// Network inputs for one sample, built once and reused every step.
struct PreparedSample {
    std::string id;
    std::size_t clips = 0;
    Tensor skeleton_rows; ///< [(U*m*V) x 2], undefined when the skeleton view is off
    Tensor rgb_tubes;     ///< [(U*P) x tube], undefined when the RGB view is off
    GlossSequence target;
    std::vector<std::string> glosses;
    bool feasible = true; ///< target fits in U clips
};

PreparedSample prepare_sample(const Sample& sample, const RunConfig& config);

/// Skeleton and RGB clip extractors, fusion head, sequence encoder and a
/// per-clip classifier over blank + vocabulary.
class Model {
public:
    Model(const RunConfig& config, const JointLayout& layout, std::size_t vocab_size, std::size_t height,
          std::size_t width);

    const RunConfig& config() const { return config_; }
    ParameterStore& parameters() { return store_; }
    const ParameterStore& parameters() const { return store_; }
    std::size_t classes() const { return vocab_size_ + 1; }
    const FusionHead& fusion() const { return *fusion_; }

    /// Fused clip features f_{1:U}: [U x d].
    Tensor features(const PreparedSample& sample, DropoutContext& dropout) const;
    /// Log-probabilities over blank (column 0) and glosses: [U x classes].
    Tensor forward(const PreparedSample& sample, DropoutContext& dropout) const;
    GlossSequence decode(const PreparedSample& sample) const;

private:
    RunConfig config_;
    std::size_t vocab_size_;
    ParameterStore store_;
    std::optional<Am3dGcn> gcn_;
    std::optional<VitExtractor> vit_;
    std::optional<FusionHead> fusion_;
    std::optional<SequenceEncoder> encoder_;
    Tensor classifier_weight_, classifier_bias_;
};

} // namespace mvst
