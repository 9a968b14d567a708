#include "mvst/fusion.hpp"

#include "mvst/error.hpp"
#include "mvst/ops.hpp"

namespace mvst {

ViewSelection parse_view_selection(const std::string& text)
{
    if (text == "rgb") {
        return ViewSelection::rgb;
    }
    if (text == "skeleton") {
        return ViewSelection::skeleton;
    }
    if (text == "both") {
        return ViewSelection::both;
    }
    throw ConfigError("unknown view selection '" + text + "' (expected rgb, skeleton or both)");
}

std::string to_string(ViewSelection views)
{
    switch (views) {
    case ViewSelection::rgb:
        return "rgb";
    case ViewSelection::skeleton:
        return "skeleton";
    case ViewSelection::both:
        return "both";
    }
    return "both";
}

void FusionConfig::validate() const
{
    if (rgb_width == 0 || skeleton_width == 0 || output == 0) {
        throw ConfigError("fusion: projection and output widths must be positive");
    }
    if ((uses_rgb(views) && rgb_input == 0) || (uses_skeleton(views) && skeleton_input == 0)) {
        throw ConfigError("fusion: active view has zero input width");
    }
}

FusionHead::FusionHead(const FusionConfig& config, ParameterStore& store, Rng& rng, const std::string& prefix)
    : config_(config)
{
    config_.validate();
    if (uses_rgb(config_.views)) {
        rgb_weight_ = store.add_uniform(prefix + ".rgb.weight", {config_.rgb_input, config_.rgb_width},
                                        config_.rgb_input, rng);
        rgb_bias_ = store.add_uniform(prefix + ".rgb.bias", {config_.rgb_width}, config_.rgb_input, rng);
    } else {
        rgb_placeholder_ = store.add_uniform(prefix + ".rgb.placeholder", {config_.rgb_width}, config_.rgb_width, rng);
    }
    if (uses_skeleton(config_.views)) {
        skeleton_weight_ = store.add_uniform(prefix + ".skeleton.weight",
                                             {config_.skeleton_input, config_.skeleton_width},
                                             config_.skeleton_input, rng);
        skeleton_bias_ = store.add_uniform(prefix + ".skeleton.bias", {config_.skeleton_width},
                                           config_.skeleton_input, rng);
    } else {
        skeleton_placeholder_ = store.add_uniform(prefix + ".skeleton.placeholder", {config_.skeleton_width},
                                                  config_.skeleton_width, rng);
    }
    const std::size_t cat = config_.rgb_width + config_.skeleton_width;
    fuse_weight_ = store.add_uniform(prefix + ".fc.weight", {cat, config_.output}, cat, rng);
    fuse_bias_ = store.add_uniform(prefix + ".fc.bias", {config_.output}, cat, rng);
}

Tensor FusionHead::branch(const Tensor& feat, const Tensor& w, const Tensor& b, const Tensor& placeholder,
                          std::size_t in, std::size_t clips, const char* what) const
{
    if (placeholder.defined()) {
        return broadcast_rows(placeholder, clips);
    }
    if (!feat.defined() || feat.rank() != 2 || feat.dim(1) != in || feat.dim(0) != clips) {
        throw DimensionError(std::string("fusion: ") + what + " features "
                             + (feat.defined() ? shape_string(feat.shape()) : std::string("missing"))
                             + ", expected [" + std::to_string(clips) + " x " + std::to_string(in) + "]");
    }
    return linear(feat, w, b);
}

Tensor FusionHead::fuse_sequence(const Tensor& rgb_feat, const Tensor& skel_feat, std::size_t clips,
                                 DropoutContext& dropout) const
{
    if (rgb_feat.defined() && skel_feat.defined() && rgb_feat.dim(0) != skel_feat.dim(0)) {
        throw DimensionError("fusion: " + std::to_string(rgb_feat.dim(0)) + " RGB clips but "
                             + std::to_string(skel_feat.dim(0)) + " skeleton clips");
    }
    auto r = branch(rgb_feat, rgb_weight_, rgb_bias_, rgb_placeholder_, config_.rgb_input, clips, "rgb");
    auto s = branch(skel_feat, skeleton_weight_, skeleton_bias_, skeleton_placeholder_, config_.skeleton_input,
                    clips, "skeleton");
    return dropout.apply(relu(linear(concat({r, s}, 1), fuse_weight_, fuse_bias_)));
}

Tensor FusionHead::fuse_clip(const Tensor& rgb_feat, const Tensor& skel_feat, DropoutContext& dropout) const
{
    auto as_row = [](const Tensor& t) { return t.defined() ? reshape(t, {1, t.size()}) : t; };
    return reshape(fuse_sequence(as_row(rgb_feat), as_row(skel_feat), 1, dropout), {config_.output});
}

} // namespace mvst
