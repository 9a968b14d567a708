#pragma once

#include "mvst/sequence.hpp"
#include "mvst/skeleton_graph.hpp"

#include <cstdint>
#include <vector>

namespace mvst {

struct RasterOptions {
    std::size_t height = 64;
    std::size_t width = 64;
    double line_half_width = 0.6; ///< pixels
    double joint_radius = 1.1;    ///< pixels
};

/// Renders one skeleton frame (canvas coordinates in [0,1]^2, y down) as a
/// stick figure: anti-aliased bone lines and joint discs, coloured by the
/// joint's group. Off-canvas geometry is clipped.
RgbSequence rasterize_skeleton_to_rgb(const SkeletonSequence& seq, std::size_t frame,
                                      const JointLayout& layout, const RasterOptions& options);

/// All frames of a sequence, in order.
RgbSequence rasterize_sequence(const SkeletonSequence& seq, const JointLayout& layout,
                               const RasterOptions& options);

struct SynthOptions {
    std::size_t vocab_size = 5;
    std::size_t min_length = 2;
    std::size_t max_length = 4;
    std::size_t gloss_frames = 12;
    std::size_t transition_frames = 4;
    double noise = 0.003;
    RasterOptions raster;
};

/// Per-gloss prototype trajectories, derived from a dataset seed.
///
/// Each gloss moves each wrist along a seeded offset plus sinusoid, holds a
/// seeded hand shape (finger curl and hand rotation) and nods the head
/// slightly. The neck never moves.
class GlossBank {
public:
    GlossBank(const JointLayout& layout, std::size_t vocab_size, std::uint64_t seed,
              std::size_t gloss_frames);

    std::size_t vocab_size() const { return prototypes_.size(); }
    std::size_t gloss_frames() const { return gloss_frames_; }
    const SkeletonSequence& prototype(std::size_t gloss) const { return prototypes_.at(gloss); }
    const JointLayout& layout() const { return layout_; }

private:
    JointLayout layout_;
    std::size_t gloss_frames_;
    std::vector<SkeletonSequence> prototypes_;
};

struct SynthSample {
    SkeletonSequence skeleton;
    RgbSequence rgb;
    std::vector<std::size_t> glosses;
};

/// One sentence: glosses drawn uniformly, prototypes joined by linear
/// transitions, seeded noise added. Coordinates are rounded to 32-bit
/// floats so the default skeleton file format stores them exactly.
SynthSample synth_generate(const GlossBank& bank, const SynthOptions& options, std::uint64_t seed);

/// Same, with a fixed gloss sequence.
SynthSample synth_render_sentence(const GlossBank& bank, const SynthOptions& options,
                                  const std::vector<std::size_t>& glosses, std::uint64_t seed);

/// The 52-joint default rest pose in canvas coordinates; requires the
/// shipped layout ordering (two 21-joint hands, 5 face, 5 body joints).
SkeletonSequence rest_pose(const JointLayout& layout);

} // namespace mvst
