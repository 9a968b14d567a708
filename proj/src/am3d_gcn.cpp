#include "mvst/am3d_gcn.hpp"

#include "mvst/error.hpp"
#include "mvst/ops.hpp"

#include <Eigen/Dense>

namespace mvst {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMap = Eigen::Map<const RowMat>;
using MutMap = Eigen::Map<RowMat>;

void require_rows(const Tensor& x, std::size_t group, const char* op)
{
    if (x.rank() != 2 || group == 0 || x.dim(0) % group != 0) {
        throw DimensionError(std::string(op) + ": " + shape_string(x.shape())
                             + " is not a whole number of " + std::to_string(group) + "-row blocks");
    }
}

} // namespace

void Am3dGcnConfig::validate() const
{
    if (scales < 1) {
        throw ConfigError("am3d-gcn: at least one scale is required");
    }
    if (channels.empty()) {
        throw ConfigError("am3d-gcn: channel plan is empty");
    }
    for (auto c : channels) {
        if (c == 0) {
            throw ConfigError("am3d-gcn: zero-width layer in channel plan");
        }
    }
    if (frames < 1 || input_channels < 1) {
        throw ConfigError("am3d-gcn: frames and input channels must be positive");
    }
}

Tensor frame_mean(const Tensor& x, std::size_t frames, std::size_t joints)
{
    require_rows(x, frames * joints, "frame_mean");
    const std::size_t cols = x.dim(1);
    const std::size_t groups = x.dim(0) / (frames * joints);
    const std::size_t block = joints * cols;
    const double inv = 1.0 / static_cast<double>(frames);
    std::vector<double> out(groups * block, 0.0);
    auto xv = x.values();
    for (std::size_t g = 0; g < groups; ++g) {
        for (std::size_t a = 0; a < frames; ++a) {
            const double* src = xv.data() + (g * frames + a) * block;
            double* dst = out.data() + g * block;
            for (std::size_t i = 0; i < block; ++i) {
                dst[i] += src[i];
            }
        }
    }
    for (auto& v : out) {
        v *= inv;
    }
    return Tensor::from_op({groups * joints, cols}, std::move(out), {x},
                           [x, frames, groups, block, inv](std::span<const double> g) mutable {
                               auto gx = x.grad_buffer();
                               for (std::size_t grp = 0; grp < groups; ++grp) {
                                   const double* src = g.data() + grp * block;
                                   for (std::size_t a = 0; a < frames; ++a) {
                                       double* dst = gx.data() + (grp * frames + a) * block;
                                       for (std::size_t i = 0; i < block; ++i) {
                                           dst[i] += inv * src[i];
                                       }
                                   }
                               }
                           });
}

Tensor frame_broadcast(const Tensor& x, std::size_t frames, std::size_t joints)
{
    require_rows(x, joints, "frame_broadcast");
    const std::size_t cols = x.dim(1);
    const std::size_t groups = x.dim(0) / joints;
    const std::size_t block = joints * cols;
    std::vector<double> out(groups * frames * block);
    auto xv = x.values();
    for (std::size_t g = 0; g < groups; ++g) {
        for (std::size_t a = 0; a < frames; ++a) {
            std::copy_n(xv.data() + g * block, block, out.data() + (g * frames + a) * block);
        }
    }
    return Tensor::from_op({groups * frames * joints, cols}, std::move(out), {x},
                           [x, frames, groups, block](std::span<const double> g) mutable {
                               auto gx = x.grad_buffer();
                               for (std::size_t grp = 0; grp < groups; ++grp) {
                                   double* dst = gx.data() + grp * block;
                                   for (std::size_t a = 0; a < frames; ++a) {
                                       const double* src = g.data() + (grp * frames + a) * block;
                                       for (std::size_t i = 0; i < block; ++i) {
                                           dst[i] += src[i];
                                       }
                                   }
                               }
                           });
}

Tensor graph_apply(const Tensor& x, const DenseMatrix& normalized)
{
    const std::size_t v = normalized.rows;
    require_rows(x, v, "graph_apply");
    const std::size_t cols = x.dim(1);
    const std::size_t groups = x.dim(0) / v;
    ConstMap n(normalized.data.data(), v, v);
    std::vector<double> out(x.size());
    for (std::size_t g = 0; g < groups; ++g) {
        MutMap(out.data() + g * v * cols, v, cols).noalias()
            = n * ConstMap(x.values().data() + g * v * cols, v, cols);
    }
    return Tensor::from_op(x.shape(), std::move(out), {x},
                           [x, normalized, v, cols, groups](std::span<const double> g) mutable {
                               auto gx = x.grad_buffer();
                               ConstMap n(normalized.data.data(), v, v);
                               for (std::size_t grp = 0; grp < groups; ++grp) {
                                   MutMap(gx.data() + grp * v * cols, v, cols).noalias()
                                       += n.transpose() * ConstMap(g.data() + grp * v * cols, v, cols);
                               }
                           });
}

Tensor stan_apply(const Tensor& s_cat, const Tensor& logits)
{
    return add(s_cat, scale_rows(s_cat, sigmoid(logits)));
}

Tensor skeleton_rows(const std::vector<SkeletonClip>& clips)
{
    if (clips.empty()) {
        throw DimensionError("skeleton_rows: no clips");
    }
    const std::size_t frames = clips.front().frames.frames;
    const std::size_t joints = clips.front().frames.joints;
    std::vector<double> values;
    values.reserve(clips.size() * frames * joints * 2);
    for (const auto& c : clips) {
        if (c.frames.frames != frames || c.frames.joints != joints) {
            throw DimensionError("skeleton_rows: clips differ in frame or joint count");
        }
        values.insert(values.end(), c.frames.coords.begin(), c.frames.coords.end());
    }
    return Tensor::constant({clips.size() * frames * joints, 2}, std::move(values));
}

Am3dGcn::Am3dGcn(const JointLayout& layout, Am3dGcnConfig config, ParameterStore& store, Rng& rng,
                 const std::string& prefix)
    : config_(std::move(config)), joints_(layout.joint_count)
{
    config_.validate();
    const auto distances = shortest_path_distances(layout);
    const std::size_t k_count = config_.active_scales();
    for (std::size_t k = 1; k <= k_count; ++k) {
        auto adj = build_scale_adjacency(distances, k);
        propagation_.push_back({k, sym_normalize_matrix(adj.matrix), config_.use_3d});
    }

    std::size_t in = config_.input_channels;
    for (std::size_t l = 0; l < config_.channels.size(); ++l) {
        const std::size_t out = config_.channels[l];
        const std::string base = prefix + ".layer" + std::to_string(l);
        LayerParams lp;
        for (std::size_t k = 1; k <= k_count; ++k) {
            lp.weights.push_back(
                store.add_uniform(base + ".scale" + std::to_string(k) + ".weight", {in, out}, in, rng));
        }
        if (config_.use_stan) {
            const std::size_t width = k_count * out;
            lp.stan_weight = store.add_uniform(base + ".stan.weight", {width, 1}, width, rng);
            lp.stan_bias = store.add_uniform(base + ".stan.bias", {1}, width, rng);
        }
        layers_.push_back(std::move(lp));
        in = k_count * out;
    }
}

Tensor Am3dGcn::gcn3d_forward(const Tensor& x, std::size_t layer, std::size_t scale_index,
                              std::size_t frames) const
{
    const auto& prop = propagation_.at(scale_index);
    const auto& w = layers_.at(layer).weights.at(scale_index);
    if (x.rank() != 2 || x.dim(1) != w.dim(0)) {
        throw DimensionError("gcn3d_forward: features " + shape_string(x.shape())
                             + " do not match weight " + shape_string(w.shape()));
    }
    if (prop.tiled) {
        auto pooled = graph_apply(frame_mean(x, frames, joints_), prop.normalized);
        return frame_broadcast(relu(matmul(pooled, w)), frames, joints_);
    }
    return relu(matmul(graph_apply(x, prop.normalized), w));
}

Tensor Am3dGcn::ms3d_forward(const Tensor& x, std::size_t layer, std::size_t frames) const
{
    std::vector<Tensor> parts;
    for (std::size_t k = 0; k < propagation_.size(); ++k) {
        parts.push_back(gcn3d_forward(x, layer, k, frames));
    }
    return parts.size() == 1 ? parts.front() : concat(parts, 1);
}

Tensor Am3dGcn::stan_forward(const Tensor& s_cat, std::size_t layer) const
{
    if (!config_.use_stan) {
        return s_cat;
    }
    const auto& lp = layers_.at(layer);
    if (s_cat.rank() != 2 || s_cat.dim(1) != lp.stan_weight.dim(0)) {
        throw DimensionError("stan_forward: features " + shape_string(s_cat.shape())
                             + " do not match kernel " + shape_string(lp.stan_weight.shape()));
    }
    return stan_apply(s_cat, linear(s_cat, lp.stan_weight, lp.stan_bias));
}

Tensor Am3dGcn::extract(const Tensor& rows, std::size_t frames) const
{
    if (config_.use_3d && frames != config_.frames) {
        throw DimensionError("am3d-gcn: clip has " + std::to_string(frames)
                             + " frames, configured for " + std::to_string(config_.frames));
    }
    if (rows.rank() != 2 || rows.dim(1) != config_.input_channels
        || rows.dim(0) % (frames * joints_) != 0) {
        throw DimensionError("am3d-gcn: input " + shape_string(rows.shape()) + " is not a stack of "
                             + std::to_string(frames) + "x" + std::to_string(joints_) + " clips");
    }
    Tensor h = rows;
    for (std::size_t l = 0; l < layers_.size(); ++l) {
        h = stan_forward(ms3d_forward(h, l, frames), l);
    }
    return group_mean_rows(h, frames * joints_);
}

Tensor Am3dGcn::extract(const std::vector<SkeletonClip>& clips) const
{
    return extract(skeleton_rows(clips), clips.front().frames.frames);
}

} // namespace mvst
