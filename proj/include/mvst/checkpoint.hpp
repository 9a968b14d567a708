#pragma once

#include "mvst/parameters.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace mvst {

// Checkpoint layout (all integers little-endian):
//   magic "MVSTCKPT", u32 version,
//   u32 length + UTF-8 run-config JSON,
//   u32 parameter count, then per parameter:
//     u32 length + name, u32 rank, u64 extent * rank, f64 value * product(extents)

inline constexpr std::uint32_t checkpoint_version = 1;

struct CheckpointEntry {
    std::string name;
    Shape shape;
    std::vector<double> values;
};

struct Checkpoint {
    std::string config_json;
    std::vector<CheckpointEntry> entries;
};

std::vector<char> encode_checkpoint(const std::string& config_json, const ParameterStore& params);
Checkpoint decode_checkpoint(const std::vector<char>& bytes, const std::string& source);

void save_checkpoint(const std::string& path, const std::string& config_json,
                     const ParameterStore& params);
Checkpoint load_checkpoint(const std::string& path);

/// Copies checkpoint values into an already-built parameter set. Names and
/// shapes must match one-to-one.
void restore_parameters(const Checkpoint& ckpt, ParameterStore& params);

} // namespace mvst
