#pragma once

#include "mvst/parameters.hpp"
#include "mvst/rng.hpp"
#include "mvst/sequence.hpp"
#include "mvst/tensor.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace mvst {

/// Dropout settings for one forward pass. In training mode every dropout
/// site draws a fresh seed from `rng`, in call order.
struct DropoutContext {
    double rate = 0.0;
    bool training = false;
    Rng* rng = nullptr;

    Tensor apply(const Tensor& x);
    static DropoutContext evaluation() { return {}; }
};

/// Sinusoid table: entry(pos, 2i) = sin(pos / 10000^(2i/d)), entry(pos, 2i+1) = cos(...).
class PositionalEncoding {
public:
    PositionalEncoding(std::size_t max_len, std::size_t dim);

    std::size_t max_len() const { return max_len_; }
    std::size_t dim() const { return dim_; }
    double entry(std::size_t pos, std::size_t i) const { return table_[pos * dim_ + i]; }
    /// First `length` rows as a constant [length x dim] tensor.
    Tensor rows(std::size_t length) const;
    /// The first `length` rows repeated `groups` times.
    Tensor tiled(std::size_t length, std::size_t groups) const;

private:
    std::size_t max_len_;
    std::size_t dim_;
    std::vector<double> table_;
};

Tensor positional_encoding(std::size_t length, std::size_t dim);

struct MhaParams {
    std::size_t heads = 1;
    Tensor wq, bq, wk, bk, wv, bv, wo, bo;

    std::size_t dim() const { return wq.dim(0); }
};

MhaParams make_mha_params(ParameterStore& store, const std::string& prefix, std::size_t dim,
                          std::size_t heads, Rng& rng);

/// Attention weights captured by a forward pass: [group][head][query][key].
struct AttentionTrace {
    std::size_t groups = 0;
    std::size_t heads = 0;
    std::size_t length = 0;
    std::vector<double> weights;

    double at(std::size_t g, std::size_t h, std::size_t q, std::size_t k) const
    {
        return weights[((g * heads + h) * length + q) * length + k];
    }
};

/// softmax(Q K^T / sqrt(d_head)) V per head, independently inside each
/// consecutive block of `group_len` rows. No mask.
Tensor scaled_dot_attention(const Tensor& q, const Tensor& k, const Tensor& v, std::size_t group_len,
                            std::size_t heads, AttentionTrace* trace = nullptr);

/// Self-attention over each group of rows, heads concatenated, output projection.
Tensor mha_forward(const Tensor& x, const MhaParams& params, std::size_t group_len,
                   AttentionTrace* trace = nullptr);

struct EncoderLayerParams {
    MhaParams attention;
    Tensor norm1_gain, norm1_bias;
    Tensor ff1_weight, ff1_bias, ff2_weight, ff2_bias;
    Tensor norm2_gain, norm2_bias;
};

EncoderLayerParams make_encoder_layer(ParameterStore& store, const std::string& prefix, std::size_t dim,
                                      std::size_t heads, std::size_t ff_dim, Rng& rng);

Tensor feed_forward(const Tensor& x, const EncoderLayerParams& params);

/// Pre-norm residual block: y = x + MHA(LN(x)); out = y + FFN(LN(y)).
Tensor encoder_layer_forward(const Tensor& x, const EncoderLayerParams& params, std::size_t group_len,
                             DropoutContext& dropout);

/// Encoder stack over inputs that already carry positional encoding.
Tensor cslen_forward(const Tensor& f_hat, const std::vector<EncoderLayerParams>& layers,
                     DropoutContext& dropout);

struct EncoderConfig {
    std::size_t layers = 2;
    std::size_t dim = 128;
    std::size_t heads = 8;
    std::size_t ff_dim = 512;
    std::size_t max_len = 4096;

    void validate(const char* what) const;
};

/// Sequence encoder over per-clip fused features: adds the sinusoid table,
/// then runs the encoder stack. One output row per clip.
class SequenceEncoder {
public:
    SequenceEncoder(const EncoderConfig& config, ParameterStore& store, Rng& rng,
                    const std::string& prefix = "cslen");

    Tensor forward(const Tensor& features, DropoutContext& dropout) const;
    const std::vector<EncoderLayerParams>& layers() const { return layers_; }
    const PositionalEncoding& encoding() const { return encoding_; }

private:
    EncoderConfig config_;
    PositionalEncoding encoding_;
    std::vector<EncoderLayerParams> layers_;
};

struct VitConfig {
    std::size_t patch = 8;
    std::size_t height = 64;
    std::size_t width = 64;
    std::size_t frames = 8;
    std::size_t dim = 64;
    std::size_t heads = 4;
    std::size_t layers = 2;
    std::size_t ff_dim = 256;

    std::size_t patch_count() const { return (height / patch) * (width / patch); }
    std::size_t tube_width() const { return patch * patch * 3 * frames; }
    void validate() const;
};

/// Flattens each clip into (H/p)*(W/p) spatiotemporal tubes of
/// p*p*3*m values ordered [frame][dy][dx][channel]: [(U*P) x tube].
Tensor patch_tubes(const std::vector<RgbClip>& clips, std::size_t patch);

/// Inserts `token` ([dim]) before every group of `group` rows.
Tensor insert_group_token(const Tensor& x, const Tensor& token, std::size_t group);
/// Row `offset` of every group of `group` rows: [(G*group) x c] -> [G x c].
Tensor take_group_row(const Tensor& x, std::size_t group, std::size_t offset);

/// Tiny ViT-style clip extractor: linear tube embedding, summary token,
/// sinusoid position table, encoder stack; the summary row is the feature.
class VitExtractor {
public:
    VitExtractor(const VitConfig& config, ParameterStore& store, Rng& rng, const std::string& prefix = "vit");

    const VitConfig& config() const { return config_; }
    /// tubes: [(U*P) x tube_width] -> [U x dim]
    Tensor extract(const Tensor& tubes, DropoutContext& dropout) const;
    Tensor extract(const std::vector<RgbClip>& clips, DropoutContext& dropout) const;

private:
    VitConfig config_;
    Tensor embed_weight_, embed_bias_, summary_token_;
    PositionalEncoding encoding_;
    std::vector<EncoderLayerParams> layers_;
};

} // namespace mvst
