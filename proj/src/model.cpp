#include "mvst/model.hpp"

#include "mvst/error.hpp"
#include "mvst/ops.hpp"

namespace mvst {

PreparedSample prepare_sample(const Sample& sample, const RunConfig& config)
{
    PreparedSample p;
    p.id = sample.id;
    p.target = sample.target;
    p.glosses = sample.glosses;
    if (uses_skeleton(config.views)) {
        auto clips = sliding_window(sample.skeleton, config.window, config.stride);
        p.clips = clips.size();
        p.skeleton_rows = skeleton_rows(clips);
    }
    if (uses_rgb(config.views)) {
        auto clips = sliding_window(sample.rgb, config.window, config.stride);
        if (p.clips != 0 && p.clips != clips.size()) {
            throw DataError(DataError::Kind::shape_mismatch,
                            sample.id + ": skeleton and RGB views give different clip counts");
        }
        p.clips = clips.size();
        p.rgb_tubes = patch_tubes(clips, config.vit_patch);
    }
    p.feasible = ctc_min_positions(p.target) <= p.clips;
    return p;
}

Model::Model(const RunConfig& config, const JointLayout& layout, std::size_t vocab_size, std::size_t height,
             std::size_t width)
    : config_(config), vocab_size_(vocab_size)
{
    config_.validate();
    if (vocab_size == 0) {
        throw ConfigError("model: empty vocabulary");
    }
    Rng rng(Rng::mix(config_.seed));
    if (uses_skeleton(config_.views)) {
        gcn_.emplace(layout, config_.gcn_config(), store_, rng);
    }
    if (uses_rgb(config_.views)) {
        vit_.emplace(config_.vit_config(height, width), store_, rng);
    }
    fusion_.emplace(config_.fusion_config(), store_, rng);
    encoder_.emplace(config_.encoder_config(), store_, rng);
    classifier_weight_ = store_.add_uniform("classifier.weight", {config_.model_dim, classes()},
                                            config_.model_dim, rng);
    classifier_bias_ = store_.add_uniform("classifier.bias", {classes()}, config_.model_dim, rng);
}

Tensor Model::features(const PreparedSample& sample, DropoutContext& dropout) const
{
    Tensor skel, rgb;
    if (gcn_) {
        skel = gcn_->extract(sample.skeleton_rows, config_.window);
    }
    if (vit_) {
        rgb = vit_->extract(sample.rgb_tubes, dropout);
    }
    return fusion_->fuse_sequence(rgb, skel, sample.clips, dropout);
}

Tensor Model::forward(const PreparedSample& sample, DropoutContext& dropout) const
{
    auto z = encoder_->forward(features(sample, dropout), dropout);
    return log_softmax(linear(z, classifier_weight_, classifier_bias_), 1);
}

GlossSequence Model::decode(const PreparedSample& sample) const
{
    auto ctx = DropoutContext::evaluation();
    return best_path_decode(LogProbLattice::from_tensor(forward(sample, ctx)));
}

} // namespace mvst
