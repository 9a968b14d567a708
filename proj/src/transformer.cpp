#include "mvst/transformer.hpp"

#include "mvst/error.hpp"
#include "mvst/ops.hpp"

#include <Eigen/Dense>

#include <cmath>

namespace mvst {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMap = Eigen::Map<const RowMat>;
using MutMap = Eigen::Map<RowMat>;

void require_heads(std::size_t dim, std::size_t heads, const char* what)
{
    if (heads == 0 || dim == 0 || dim % heads != 0) {
        throw ConfigError(std::string(what) + ": width " + std::to_string(dim)
                          + " is not divisible into " + std::to_string(heads) + " heads");
    }
}

} // namespace

Tensor DropoutContext::apply(const Tensor& x)
{
    if (!training || rate == 0.0) {
        return x;
    }
    if (rng == nullptr) {
        throw ConfigError("dropout: training pass without a generator");
    }
    return dropout(x, rate, rng->derive_seed(), true);
}

PositionalEncoding::PositionalEncoding(std::size_t max_len, std::size_t dim)
    : max_len_(max_len), dim_(dim), table_(max_len * dim)
{
    if (dim == 0 || dim % 2 != 0) {
        throw ConfigError("positional encoding: width must be even and positive, got " + std::to_string(dim));
    }
    for (std::size_t pos = 0; pos < max_len; ++pos) {
        for (std::size_t i = 0; i < dim / 2; ++i) {
            const double angle = static_cast<double>(pos)
                                 / std::pow(10000.0, static_cast<double>(2 * i) / static_cast<double>(dim));
            table_[pos * dim + 2 * i] = std::sin(angle);
            table_[pos * dim + 2 * i + 1] = std::cos(angle);
        }
    }
}

Tensor PositionalEncoding::rows(std::size_t length) const
{
    return tiled(length, 1);
}

Tensor PositionalEncoding::tiled(std::size_t length, std::size_t groups) const
{
    if (length > max_len_) {
        throw DimensionError("positional encoding: sequence of " + std::to_string(length)
                             + " exceeds the table length " + std::to_string(max_len_));
    }
    std::vector<double> out;
    out.reserve(groups * length * dim_);
    for (std::size_t g = 0; g < groups; ++g) {
        out.insert(out.end(), table_.begin(), table_.begin() + static_cast<std::ptrdiff_t>(length * dim_));
    }
    return Tensor::constant({groups * length, dim_}, std::move(out));
}

Tensor positional_encoding(std::size_t length, std::size_t dim)
{
    return PositionalEncoding(length, dim).rows(length);
}

MhaParams make_mha_params(ParameterStore& store, const std::string& prefix, std::size_t dim,
                          std::size_t heads, Rng& rng)
{
    require_heads(dim, heads, prefix.c_str());
    MhaParams p;
    p.heads = heads;
    p.wq = store.add_uniform(prefix + ".query.weight", {dim, dim}, dim, rng);
    p.bq = store.add_uniform(prefix + ".query.bias", {dim}, dim, rng);
    p.wk = store.add_uniform(prefix + ".key.weight", {dim, dim}, dim, rng);
    p.bk = store.add_uniform(prefix + ".key.bias", {dim}, dim, rng);
    p.wv = store.add_uniform(prefix + ".value.weight", {dim, dim}, dim, rng);
    p.bv = store.add_uniform(prefix + ".value.bias", {dim}, dim, rng);
    p.wo = store.add_uniform(prefix + ".output.weight", {dim, dim}, dim, rng);
    p.bo = store.add_uniform(prefix + ".output.bias", {dim}, dim, rng);
    return p;
}

Tensor scaled_dot_attention(const Tensor& q, const Tensor& k, const Tensor& v, std::size_t group_len,
                            std::size_t heads, AttentionTrace* trace)
{
    if (q.rank() != 2 || k.shape() != q.shape() || v.shape() != q.shape()) {
        throw DimensionError("attention: query " + shape_string(q.shape()) + ", key " + shape_string(k.shape())
                             + ", value " + shape_string(v.shape()) + " must share one [rows x width] shape");
    }
    const std::size_t rows = q.dim(0), dim = q.dim(1);
    require_heads(dim, heads, "attention");
    if (group_len == 0 || rows % group_len != 0) {
        throw DimensionError("attention: " + std::to_string(rows) + " rows are not a whole number of "
                             + std::to_string(group_len) + "-row groups");
    }
    const std::size_t groups = rows / group_len, dh = dim / heads, L = group_len;
    const double inv_sqrt = 1.0 / std::sqrt(static_cast<double>(dh));

    ConstMap qm(q.values().data(), rows, dim), km(k.values().data(), rows, dim), vm(v.values().data(), rows, dim);
    auto probs = std::make_shared<std::vector<double>>(groups * heads * L * L);
    std::vector<double> out(rows * dim);
    MutMap om(out.data(), rows, dim);
    for (std::size_t g = 0; g < groups; ++g) {
        for (std::size_t h = 0; h < heads; ++h) {
            MutMap p(probs->data() + (g * heads + h) * L * L, L, L);
            p.noalias() = inv_sqrt * qm.block(g * L, h * dh, L, dh) * km.block(g * L, h * dh, L, dh).transpose();
            for (std::size_t r = 0; r < L; ++r) {
                const double mx = p.row(r).maxCoeff();
                p.row(r) = (p.row(r).array() - mx).exp();
                p.row(r) /= p.row(r).sum();
            }
            om.block(g * L, h * dh, L, dh).noalias() = p * vm.block(g * L, h * dh, L, dh);
        }
    }
    if (trace != nullptr) {
        *trace = {groups, heads, L, *probs};
    }
    return Tensor::from_op(
        {rows, dim}, std::move(out), {q, k, v},
        [q, k, v, probs, rows, dim, groups, heads, dh, L, inv_sqrt](std::span<const double> grad) mutable {
            ConstMap gm(grad.data(), rows, dim);
            ConstMap qm(q.values().data(), rows, dim), km(k.values().data(), rows, dim),
                vm(v.values().data(), rows, dim);
            RowMat dq = RowMat::Zero(rows, dim), dk = RowMat::Zero(rows, dim), dv = RowMat::Zero(rows, dim);
            RowMat dp(L, L);
            for (std::size_t g = 0; g < groups; ++g) {
                for (std::size_t h = 0; h < heads; ++h) {
                    ConstMap p(probs->data() + (g * heads + h) * L * L, L, L);
                    const auto go = gm.block(g * L, h * dh, L, dh);
                    dv.block(g * L, h * dh, L, dh).noalias() += p.transpose() * go;
                    dp.noalias() = go * vm.block(g * L, h * dh, L, dh).transpose();
                    for (std::size_t r = 0; r < L; ++r) {
                        const double dot = dp.row(r).dot(p.row(r));
                        dp.row(r) = p.row(r).array() * (dp.row(r).array() - dot);
                    }
                    dq.block(g * L, h * dh, L, dh).noalias() += inv_sqrt * dp * km.block(g * L, h * dh, L, dh);
                    dk.block(g * L, h * dh, L, dh).noalias()
                        += inv_sqrt * dp.transpose() * qm.block(g * L, h * dh, L, dh);
                }
            }
            if (q.requires_grad()) {
                MutMap(q.grad_buffer().data(), rows, dim) += dq;
            }
            if (k.requires_grad()) {
                MutMap(k.grad_buffer().data(), rows, dim) += dk;
            }
            if (v.requires_grad()) {
                MutMap(v.grad_buffer().data(), rows, dim) += dv;
            }
        });
}

Tensor mha_forward(const Tensor& x, const MhaParams& params, std::size_t group_len, AttentionTrace* trace)
{
    if (x.rank() != 2 || x.dim(1) != params.dim()) {
        throw DimensionError("mha_forward: input " + shape_string(x.shape()) + " does not match width "
                             + std::to_string(params.dim()));
    }
    auto q = linear(x, params.wq, params.bq);
    auto k = linear(x, params.wk, params.bk);
    auto v = linear(x, params.wv, params.bv);
    return linear(scaled_dot_attention(q, k, v, group_len, params.heads, trace), params.wo, params.bo);
}

EncoderLayerParams make_encoder_layer(ParameterStore& store, const std::string& prefix, std::size_t dim,
                                      std::size_t heads, std::size_t ff_dim, Rng& rng)
{
    EncoderLayerParams p;
    p.attention = make_mha_params(store, prefix + ".attention", dim, heads, rng);
    p.norm1_gain = store.add_filled(prefix + ".norm1.gain", {dim}, 1.0);
    p.norm1_bias = store.add_filled(prefix + ".norm1.bias", {dim}, 0.0);
    p.ff1_weight = store.add_uniform(prefix + ".ff1.weight", {dim, ff_dim}, dim, rng);
    p.ff1_bias = store.add_uniform(prefix + ".ff1.bias", {ff_dim}, dim, rng);
    p.ff2_weight = store.add_uniform(prefix + ".ff2.weight", {ff_dim, dim}, ff_dim, rng);
    p.ff2_bias = store.add_uniform(prefix + ".ff2.bias", {dim}, ff_dim, rng);
    p.norm2_gain = store.add_filled(prefix + ".norm2.gain", {dim}, 1.0);
    p.norm2_bias = store.add_filled(prefix + ".norm2.bias", {dim}, 0.0);
    return p;
}

Tensor feed_forward(const Tensor& x, const EncoderLayerParams& params)
{
    return linear(relu(linear(x, params.ff1_weight, params.ff1_bias)), params.ff2_weight, params.ff2_bias);
}

Tensor encoder_layer_forward(const Tensor& x, const EncoderLayerParams& params, std::size_t group_len,
                             DropoutContext& dropout)
{
    auto attended = mha_forward(layer_norm(x, params.norm1_gain, params.norm1_bias), params.attention, group_len);
    auto y = add(x, dropout.apply(attended));
    auto ff = feed_forward(layer_norm(y, params.norm2_gain, params.norm2_bias), params);
    return add(y, dropout.apply(ff));
}

Tensor cslen_forward(const Tensor& f_hat, const std::vector<EncoderLayerParams>& layers, DropoutContext& dropout)
{
    if (f_hat.rank() != 2 || f_hat.dim(0) == 0) {
        throw DimensionError("cslen_forward: expected a non-empty [clips x width] input, got "
                             + shape_string(f_hat.shape()));
    }
    Tensor h = f_hat;
    for (const auto& layer : layers) {
        h = encoder_layer_forward(h, layer, f_hat.dim(0), dropout);
    }
    return h;
}

void EncoderConfig::validate(const char* what) const
{
    if (layers == 0) {
        throw ConfigError(std::string(what) + ": at least one encoder layer is required");
    }
    require_heads(dim, heads, what);
    if (dim % 2 != 0) {
        throw ConfigError(std::string(what) + ": model width must be even");
    }
    if (ff_dim == 0 || max_len == 0) {
        throw ConfigError(std::string(what) + ": feed-forward width and table length must be positive");
    }
}

SequenceEncoder::SequenceEncoder(const EncoderConfig& config, ParameterStore& store, Rng& rng,
                                 const std::string& prefix)
    : config_(config), encoding_((config.validate(prefix.c_str()), config.max_len), config.dim)
{
    for (std::size_t l = 0; l < config_.layers; ++l) {
        layers_.push_back(make_encoder_layer(store, prefix + ".layer" + std::to_string(l), config_.dim,
                                             config_.heads, config_.ff_dim, rng));
    }
}

Tensor SequenceEncoder::forward(const Tensor& features, DropoutContext& dropout) const
{
    if (features.rank() != 2 || features.dim(1) != config_.dim) {
        throw DimensionError("sequence encoder: input " + shape_string(features.shape())
                             + " does not match width " + std::to_string(config_.dim));
    }
    return cslen_forward(add(features, encoding_.rows(features.dim(0))), layers_, dropout);
}

void VitConfig::validate() const
{
    if (patch == 0 || height % patch != 0 || width % patch != 0) {
        throw ConfigError("vit: " + std::to_string(height) + "x" + std::to_string(width)
                          + " images do not tile into " + std::to_string(patch) + "-pixel patches");
    }
    if (frames == 0 || layers == 0 || ff_dim == 0) {
        throw ConfigError("vit: frames, layers and feed-forward width must be positive");
    }
    require_heads(dim, heads, "vit");
    if (dim % 2 != 0) {
        throw ConfigError("vit: width must be even");
    }
}

Tensor patch_tubes(const std::vector<RgbClip>& clips, std::size_t patch)
{
    if (clips.empty()) {
        throw DimensionError("patch_tubes: no clips");
    }
    const auto& first = clips.front().frames;
    const std::size_t m = first.frames, h = first.height, w = first.width, c = RgbSequence::channels;
    if (patch == 0 || h % patch != 0 || w % patch != 0) {
        throw DimensionError("patch_tubes: " + std::to_string(h) + "x" + std::to_string(w)
                             + " frames do not tile into " + std::to_string(patch) + "-pixel patches");
    }
    const std::size_t ph = h / patch, pw = w / patch, tube = patch * patch * c * m;
    std::vector<double> out;
    out.reserve(clips.size() * ph * pw * tube);
    for (const auto& clip : clips) {
        const auto& s = clip.frames;
        if (s.frames != m || s.height != h || s.width != w) {
            throw DimensionError("patch_tubes: clips differ in frame count or resolution");
        }
        for (std::size_t py = 0; py < ph; ++py) {
            for (std::size_t px = 0; px < pw; ++px) {
                for (std::size_t t = 0; t < m; ++t) {
                    for (std::size_t dy = 0; dy < patch; ++dy) {
                        for (std::size_t dx = 0; dx < patch; ++dx) {
                            for (std::size_t ch = 0; ch < c; ++ch) {
                                out.push_back(s.value(t, py * patch + dy, px * patch + dx, ch));
                            }
                        }
                    }
                }
            }
        }
    }
    return Tensor::constant({clips.size() * ph * pw, tube}, std::move(out));
}

Tensor insert_group_token(const Tensor& x, const Tensor& token, std::size_t group)
{
    if (x.rank() != 2 || group == 0 || x.dim(0) % group != 0 || token.size() != x.dim(1)) {
        throw DimensionError("insert_group_token: input " + shape_string(x.shape()) + ", token "
                             + shape_string(token.shape()) + ", group " + std::to_string(group));
    }
    const std::size_t cols = x.dim(1), groups = x.dim(0) / group, span = group * cols;
    std::vector<double> out;
    out.reserve((x.dim(0) + groups) * cols);
    auto xv = x.values();
    auto tv = token.values();
    for (std::size_t g = 0; g < groups; ++g) {
        out.insert(out.end(), tv.begin(), tv.end());
        out.insert(out.end(), xv.begin() + static_cast<std::ptrdiff_t>(g * span),
                   xv.begin() + static_cast<std::ptrdiff_t>((g + 1) * span));
    }
    return Tensor::from_op({groups * (group + 1), cols}, std::move(out), {x, token},
                           [x, token, cols, groups, span](std::span<const double> grad) mutable {
                               for (std::size_t g = 0; g < groups; ++g) {
                                   const double* src = grad.data() + g * (span + cols);
                                   if (token.requires_grad()) {
                                       auto gt = token.grad_buffer();
                                       for (std::size_t i = 0; i < cols; ++i) {
                                           gt[i] += src[i];
                                       }
                                   }
                                   if (x.requires_grad()) {
                                       auto gx = x.grad_buffer();
                                       for (std::size_t i = 0; i < span; ++i) {
                                           gx[g * span + i] += src[cols + i];
                                       }
                                   }
                               }
                           });
}

Tensor take_group_row(const Tensor& x, std::size_t group, std::size_t offset)
{
    if (x.rank() != 2 || group == 0 || x.dim(0) % group != 0 || offset >= group) {
        throw DimensionError("take_group_row: input " + shape_string(x.shape()) + ", group "
                             + std::to_string(group) + ", offset " + std::to_string(offset));
    }
    const std::size_t cols = x.dim(1), groups = x.dim(0) / group;
    std::vector<double> out(groups * cols);
    auto xv = x.values();
    for (std::size_t g = 0; g < groups; ++g) {
        std::copy_n(xv.data() + (g * group + offset) * cols, cols, out.data() + g * cols);
    }
    return Tensor::from_op({groups, cols}, std::move(out), {x},
                           [x, cols, groups, group, offset](std::span<const double> grad) mutable {
                               auto gx = x.grad_buffer();
                               for (std::size_t g = 0; g < groups; ++g) {
                                   for (std::size_t i = 0; i < cols; ++i) {
                                       gx[(g * group + offset) * cols + i] += grad[g * cols + i];
                                   }
                               }
                           });
}

VitExtractor::VitExtractor(const VitConfig& config, ParameterStore& store, Rng& rng, const std::string& prefix)
    : config_(config), encoding_((config.validate(), config.patch_count() + 1), config.dim)
{
    const std::size_t tube = config_.tube_width();
    embed_weight_ = store.add_uniform(prefix + ".embed.weight", {tube, config_.dim}, tube, rng);
    embed_bias_ = store.add_uniform(prefix + ".embed.bias", {config_.dim}, tube, rng);
    summary_token_ = store.add_uniform(prefix + ".summary_token", {config_.dim}, config_.dim, rng);
    for (std::size_t l = 0; l < config_.layers; ++l) {
        layers_.push_back(make_encoder_layer(store, prefix + ".layer" + std::to_string(l), config_.dim,
                                             config_.heads, config_.ff_dim, rng));
    }
}

Tensor VitExtractor::extract(const Tensor& tubes, DropoutContext& dropout) const
{
    const std::size_t p = config_.patch_count();
    if (tubes.rank() != 2 || tubes.dim(1) != config_.tube_width() || tubes.dim(0) % p != 0 || tubes.dim(0) == 0) {
        throw DimensionError("vit: tube matrix " + shape_string(tubes.shape()) + " is not a stack of "
                             + std::to_string(p) + " tubes of width " + std::to_string(config_.tube_width()));
    }
    const std::size_t clips = tubes.dim(0) / p;
    auto tokens = insert_group_token(linear(tubes, embed_weight_, embed_bias_), summary_token_, p);
    Tensor h = add(tokens, encoding_.tiled(p + 1, clips));
    for (const auto& layer : layers_) {
        h = encoder_layer_forward(h, layer, p + 1, dropout);
    }
    return take_group_row(h, p + 1, 0);
}

Tensor VitExtractor::extract(const std::vector<RgbClip>& clips, DropoutContext& dropout) const
{
    return extract(patch_tubes(clips, config_.patch), dropout);
}

} // namespace mvst
