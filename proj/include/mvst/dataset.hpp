#pragma once

#include "mvst/ctc.hpp"
#include "mvst/sequence.hpp"
#include "mvst/skeleton_graph.hpp"
#include "mvst/synth.hpp"

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

namespace mvst {

inline constexpr int manifest_schema_version = 1;

struct ManifestEntry {
    std::string id;
    std::string skeleton; ///< path relative to the manifest directory
    std::string rgb;
    std::vector<std::string> glosses;
    std::string split = "train";
    std::size_t frames = 0;
};

/// JSON index of a dataset: vocabulary, joint layout file and sample list.
struct Manifest {
    int schema_version = manifest_schema_version;
    std::string layout = "joints.layout";
    std::vector<std::string> vocabulary;
    std::size_t joints = 0;
    std::size_t height = 0;
    std::size_t width = 0;
    std::vector<ManifestEntry> entries;
    /// Directory the relative paths resolve against; not serialized.
    std::string base_dir;

    nlohmann::json to_json() const;
    static Manifest from_json(const nlohmann::json& doc, std::string base_dir);
    std::string resolve(const std::string& relative) const;
    std::size_t gloss_id(const std::string& token) const;
    /// Entries in manifest order with the given split.
    std::vector<const ManifestEntry*> split(const std::string& name) const;
};

Manifest load_manifest(const std::string& path);
void save_manifest(const std::string& path, const Manifest& manifest);

struct Sample {
    std::string id;
    std::string split;
    SkeletonSequence skeleton; ///< normalized
    RgbSequence rgb;
    GlossSequence target; ///< gloss ids, 0-based
    std::vector<std::string> glosses;
};

struct Dataset {
    Manifest manifest;
    JointLayout layout;
    std::vector<Sample> samples;

    std::vector<const Sample*> split(const std::string& name) const;
};

struct LoadOptions {
    bool skeleton = true;
    bool rgb = true;
};

/// Loads and validates every entry: files exist and parse, frame counts and
/// joint counts agree with the manifest, glosses are in the vocabulary.
Dataset load_dataset(const std::string& manifest_path, const LoadOptions& options = {});

struct GenerateOptions {
    std::size_t train_count = 10;
    std::size_t dev_count = 0;
    std::uint64_t seed = 7;
    SynthOptions synth; ///< vocabulary size, sentence lengths, timing, raster size
    std::string layout_path; ///< empty: the bundled 52-joint layout
};

std::string default_layout_path();
std::string gloss_name(std::size_t id);

/// Writes a synthetic dataset (layout copy, per-sample skeleton and RGB
/// files, manifest.json) into `out_dir`; returns the manifest.
Manifest generate_dataset(const GenerateOptions& options, const std::string& out_dir);

} // namespace mvst
