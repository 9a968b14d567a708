#pragma once

#include "mvst/parameters.hpp"
#include "mvst/sequence.hpp"
#include "mvst/skeleton_graph.hpp"
#include "mvst/tensor.hpp"

#include <string>
#include <vector>

namespace mvst {

struct Am3dGcnConfig {
    std::size_t scales = 3;
    /// Output channels per scale, one entry per layer.
    std::vector<std::size_t> channels{32, 64};
    std::size_t frames = 8;
    std::size_t input_channels = 2;
    bool use_multiscale = true;
    bool use_stan = true;
    /// false: every frame is its own graph (2D-GCN), i.e. m is treated as 1.
    bool use_3d = true;

    std::size_t active_scales() const { return use_multiscale ? scales : 1; }
    std::size_t output_width() const { return active_scales() * channels.back(); }
    void validate() const;
};

/// Applies the normalized adjacency of one scale to node features laid out
/// as consecutive groups of m*V rows (frame-major: row a*V + i is joint i of
/// frame a).
///
/// In tiled mode this is the m x m block tiling of A_k + I. Every node of
/// joint i has degree m*deg_k(i), so the normalized block matrix equals
/// (1/m) * ones(m, m) kron N_k with N_k = D^-1/2 (A_k + I) D^-1/2; the
/// product is computed in that factored form.
struct GraphPropagation {
    std::size_t scale = 1;
    DenseMatrix normalized; ///< N_k, V x V
    bool tiled = true;
};

/// Frame mean inside each clip: [(G*m*V) x C] -> [(G*V) x C].
Tensor frame_mean(const Tensor& x, std::size_t frames, std::size_t joints);
/// Inverse layout of frame_mean: repeats each V-row block m times.
Tensor frame_broadcast(const Tensor& x, std::size_t frames, std::size_t joints);
/// N applied to each consecutive group of V rows.
Tensor graph_apply(const Tensor& x, const DenseMatrix& normalized);

/// s + s * sigmoid(logits), the attention map broadcast across channels.
Tensor stan_apply(const Tensor& s_cat, const Tensor& logits);

/// Stacks clips into [(U*m*V) x 2] rows, frame-major within each clip.
Tensor skeleton_rows(const std::vector<SkeletonClip>& clips);

/// Attention-enhanced multi-scale 3D graph convolution over skeleton clips.
class Am3dGcn {
public:
    struct LayerParams {
        std::vector<Tensor> weights; ///< one per active scale, [C_in x C_out]
        Tensor stan_weight;          ///< [K*C_out x 1]
        Tensor stan_bias;            ///< [1]
    };

    Am3dGcn(const JointLayout& layout, Am3dGcnConfig config, ParameterStore& store, Rng& rng,
            const std::string& prefix = "gcn");

    const Am3dGcnConfig& config() const { return config_; }
    std::size_t joints() const { return joints_; }
    std::size_t layer_count() const { return layers_.size(); }
    const LayerParams& layer(std::size_t l) const { return layers_.at(l); }
    const std::vector<GraphPropagation>& propagations() const { return propagation_; }

    /// relu(A_hat X W_k) for one scale; x holds whole clips of `frames` frames.
    Tensor gcn3d_forward(const Tensor& x, std::size_t layer, std::size_t scale_index,
                         std::size_t frames) const;
    /// Concatenation over scales in ascending k.
    Tensor ms3d_forward(const Tensor& x, std::size_t layer, std::size_t frames) const;
    /// Identity when STAN is disabled.
    Tensor stan_forward(const Tensor& s_cat, std::size_t layer) const;

    /// All layers, then mean pooling over each clip's m*V node-time rows.
    /// rows: [(U*frames*V) x C_in] -> [U x output_width].
    Tensor extract(const Tensor& rows, std::size_t frames) const;
    Tensor extract(const std::vector<SkeletonClip>& clips) const;

private:
    Am3dGcnConfig config_;
    std::size_t joints_;
    std::vector<GraphPropagation> propagation_;
    std::vector<LayerParams> layers_;
};

} // namespace mvst
