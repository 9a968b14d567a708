#pragma once

#include "mvst/parameters.hpp"
#include "mvst/rng.hpp"
#include "mvst/tensor.hpp"
#include "mvst/transformer.hpp"

#include <string>

namespace mvst {

enum class ViewSelection { rgb, skeleton, both };

ViewSelection parse_view_selection(const std::string& text);
std::string to_string(ViewSelection views);

inline bool uses_rgb(ViewSelection v) { return v != ViewSelection::skeleton; }
inline bool uses_skeleton(ViewSelection v) { return v != ViewSelection::rgb; }

struct FusionConfig {
    std::size_t rgb_input = 64;      ///< width of the RGB clip feature
    std::size_t skeleton_input = 192; ///< width of the skeleton clip feature
    std::size_t rgb_width = 64;      ///< rgb projection output
    std::size_t skeleton_width = 64; ///< skeleton projection output
    std::size_t output = 128;        ///< d
    ViewSelection views = ViewSelection::both;

    void validate() const;
};

/// Projection per view, concatenation, then a fully connected layer with
/// ReLU. A disabled view contributes a learned constant vector in place of
/// its projection, so the fusion layer keeps its shape in every view mode.
class FusionHead {
public:
    FusionHead(const FusionConfig& config, ParameterStore& store, Rng& rng, const std::string& prefix = "fusion");

    const FusionConfig& config() const { return config_; }
    Tensor rgb_weight() const { return rgb_weight_; }
    Tensor skeleton_weight() const { return skeleton_weight_; }

    /// Row t of the result depends only on row t of each input. Undefined
    /// tensors are accepted for a disabled view; `clips` then gives U.
    Tensor fuse_sequence(const Tensor& rgb_feat, const Tensor& skel_feat, std::size_t clips,
                         DropoutContext& dropout) const;
    /// Single clip: feature vectors in, d-vector out.
    Tensor fuse_clip(const Tensor& rgb_feat, const Tensor& skel_feat, DropoutContext& dropout) const;

private:
    Tensor branch(const Tensor& feat, const Tensor& w, const Tensor& b, const Tensor& placeholder,
                  std::size_t in, std::size_t clips, const char* what) const;

    FusionConfig config_;
    Tensor rgb_weight_, rgb_bias_, rgb_placeholder_;
    Tensor skeleton_weight_, skeleton_bias_, skeleton_placeholder_;
    Tensor fuse_weight_, fuse_bias_;
};

} // namespace mvst
