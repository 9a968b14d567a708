#include "mvst/checkpoint.hpp"

#include "mvst/binary_io.hpp"
#include "mvst/error.hpp"

#include <algorithm>

namespace mvst {

namespace {
constexpr std::string_view checkpoint_magic = "MVSTCKPT";
}

std::vector<char> encode_checkpoint(const std::string& config_json, const ParameterStore& params)
{
    binio::Writer w;
    w.bytes(checkpoint_magic);
    w.u32(checkpoint_version);
    w.str(config_json);
    w.u32(static_cast<std::uint32_t>(params.parameters().size()));
    for (const auto& p : params.parameters()) {
        w.str(p.name);
        w.u32(static_cast<std::uint32_t>(p.tensor.rank()));
        for (auto d : p.tensor.shape()) {
            w.u64(d);
        }
        for (double v : p.tensor.values()) {
            w.f64(v);
        }
    }
    return w.buffer();
}

Checkpoint decode_checkpoint(const std::vector<char>& bytes, const std::string& source)
{
    binio::Reader r(bytes, source);
    if (r.bytes(checkpoint_magic.size()) != checkpoint_magic) {
        throw DataError(DataError::Kind::bad_format, source + ": not a checkpoint file");
    }
    auto version = r.u32();
    if (version != checkpoint_version) {
        throw DataError(DataError::Kind::version_mismatch,
                        source + ": checkpoint version " + std::to_string(version)
                            + ", expected " + std::to_string(checkpoint_version));
    }
    Checkpoint ckpt;
    ckpt.config_json = r.str();
    auto count = r.u32();
    for (std::uint32_t i = 0; i < count; ++i) {
        CheckpointEntry e;
        e.name = r.str();
        auto rank = r.u32();
        for (std::uint32_t k = 0; k < rank; ++k) {
            e.shape.push_back(static_cast<std::size_t>(r.u64()));
        }
        auto n = shape_size(e.shape);
        r.need(n * 8);
        e.values.resize(n);
        for (auto& v : e.values) {
            v = r.f64();
        }
        ckpt.entries.push_back(std::move(e));
    }
    if (!r.at_end()) {
        throw DataError(DataError::Kind::bad_format, source + ": trailing bytes after checkpoint");
    }
    return ckpt;
}

void save_checkpoint(const std::string& path, const std::string& config_json,
                     const ParameterStore& params)
{
    binio::write_file(path, encode_checkpoint(config_json, params));
}

Checkpoint load_checkpoint(const std::string& path)
{
    return decode_checkpoint(binio::read_file(path), path);
}

void restore_parameters(const Checkpoint& ckpt, ParameterStore& params)
{
    auto& list = params.parameters();
    if (ckpt.entries.size() != list.size()) {
        throw DataError(DataError::Kind::shape_mismatch,
                        "checkpoint holds " + std::to_string(ckpt.entries.size())
                            + " parameters, model expects " + std::to_string(list.size()));
    }
    for (const auto& e : ckpt.entries) {
        auto it = std::find_if(list.begin(), list.end(),
                               [&](const Parameter& p) { return p.name == e.name; });
        if (it == list.end()) {
            throw DataError(DataError::Kind::shape_mismatch,
                            "checkpoint parameter '" + e.name + "' not present in model");
        }
        if (it->tensor.shape() != e.shape) {
            throw DataError(DataError::Kind::shape_mismatch,
                            "parameter '" + e.name + "': checkpoint shape " + shape_string(e.shape)
                                + ", model shape " + shape_string(it->tensor.shape()));
        }
        auto dst = it->tensor.mutable_values();
        std::copy(e.values.begin(), e.values.end(), dst.begin());
    }
}

} // namespace mvst
