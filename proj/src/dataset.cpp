#include "mvst/dataset.hpp"

#include "mvst/binary_io.hpp"
#include "mvst/error.hpp"
#include "mvst/rng.hpp"

#include <cstdio>
#include <filesystem>

namespace mvst {

namespace fs = std::filesystem;

namespace {

DataError bad_manifest(const std::string& what)
{
    return DataError(DataError::Kind::bad_format, "manifest: " + what);
}

} // namespace

nlohmann::json Manifest::to_json() const
{
    nlohmann::json list = nlohmann::json::array();
    for (const auto& e : entries) {
        list.push_back({{"id", e.id},
                        {"skeleton", e.skeleton},
                        {"rgb", e.rgb},
                        {"glosses", e.glosses},
                        {"split", e.split},
                        {"frames", e.frames}});
    }
    return {{"schema_version", schema_version},
            {"layout", layout},
            {"vocabulary", vocabulary},
            {"joints", joints},
            {"height", height},
            {"width", width},
            {"entries", std::move(list)}};
}

Manifest Manifest::from_json(const nlohmann::json& doc, std::string base_dir)
{
    Manifest m;
    m.base_dir = std::move(base_dir);
    try {
        m.schema_version = doc.at("schema_version").get<int>();
        if (m.schema_version != manifest_schema_version) {
            throw DataError(DataError::Kind::version_mismatch,
                            "manifest: schema version " + std::to_string(m.schema_version) + ", expected "
                                + std::to_string(manifest_schema_version));
        }
        m.layout = doc.at("layout").get<std::string>();
        m.vocabulary = doc.at("vocabulary").get<std::vector<std::string>>();
        m.joints = doc.at("joints").get<std::size_t>();
        m.height = doc.at("height").get<std::size_t>();
        m.width = doc.at("width").get<std::size_t>();
        for (const auto& e : doc.at("entries")) {
            m.entries.push_back({e.at("id").get<std::string>(), e.at("skeleton").get<std::string>(),
                                 e.at("rgb").get<std::string>(), e.at("glosses").get<std::vector<std::string>>(),
                                 e.at("split").get<std::string>(), e.at("frames").get<std::size_t>()});
        }
    } catch (const nlohmann::json::exception& ex) {
        throw bad_manifest(ex.what());
    }
    for (std::size_t i = 0; i < m.vocabulary.size(); ++i) {
        for (std::size_t j = 0; j < i; ++j) {
            if (m.vocabulary[i] == m.vocabulary[j]) {
                throw bad_manifest("duplicate vocabulary entry '" + m.vocabulary[i] + "'");
            }
        }
    }
    return m;
}

std::string Manifest::resolve(const std::string& relative) const
{
    fs::path p(relative);
    if (p.is_absolute() || base_dir.empty()) {
        return p.string();
    }
    return (fs::path(base_dir) / p).string();
}

std::size_t Manifest::gloss_id(const std::string& token) const
{
    for (std::size_t i = 0; i < vocabulary.size(); ++i) {
        if (vocabulary[i] == token) {
            return i;
        }
    }
    throw bad_manifest("gloss '" + token + "' is not in the vocabulary");
}

std::vector<const ManifestEntry*> Manifest::split(const std::string& name) const
{
    std::vector<const ManifestEntry*> out;
    for (const auto& e : entries) {
        if (e.split == name) {
            out.push_back(&e);
        }
    }
    return out;
}

Manifest load_manifest(const std::string& path)
{
    auto bytes = binio::read_file(path);
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(bytes.begin(), bytes.end());
    } catch (const nlohmann::json::exception& ex) {
        throw bad_manifest(path + ": " + ex.what());
    }
    return Manifest::from_json(doc, fs::path(path).parent_path().string());
}

void save_manifest(const std::string& path, const Manifest& manifest)
{
    const std::string text = manifest.to_json().dump(2) + "\n";
    binio::write_file(path, std::vector<char>(text.begin(), text.end()));
}

std::vector<const Sample*> Dataset::split(const std::string& name) const
{
    std::vector<const Sample*> out;
    for (const auto& s : samples) {
        if (s.split == name) {
            out.push_back(&s);
        }
    }
    return out;
}

Dataset load_dataset(const std::string& manifest_path, const LoadOptions& options)
{
    Dataset ds;
    ds.manifest = load_manifest(manifest_path);
    const auto& m = ds.manifest;
    ds.layout = load_joint_layout(m.resolve(m.layout));
    if (ds.layout.joint_count != m.joints) {
        throw DataError(DataError::Kind::shape_mismatch,
                        "manifest declares " + std::to_string(m.joints) + " joints but the layout has "
                            + std::to_string(ds.layout.joint_count));
    }
    for (const auto& e : m.entries) {
        Sample s;
        s.id = e.id;
        s.split = e.split;
        s.glosses = e.glosses;
        if (e.glosses.empty()) {
            throw bad_manifest("entry '" + e.id + "' has an empty gloss annotation");
        }
        for (const auto& g : e.glosses) {
            s.target.push_back(m.gloss_id(g));
        }
        if (options.skeleton) {
            auto raw = load_skeleton(m.resolve(e.skeleton));
            if (raw.frames != e.frames || raw.joints != m.joints) {
                throw DataError(DataError::Kind::shape_mismatch,
                                e.skeleton + ": " + std::to_string(raw.frames) + " frames x "
                                    + std::to_string(raw.joints) + " joints, manifest expects "
                                    + std::to_string(e.frames) + " x " + std::to_string(m.joints));
            }
            s.skeleton = normalize_skeleton(raw, ds.layout);
        }
        if (options.rgb) {
            s.rgb = load_rgb(m.resolve(e.rgb));
            if (s.rgb.frames != e.frames || s.rgb.height != m.height || s.rgb.width != m.width) {
                throw DataError(DataError::Kind::shape_mismatch,
                                e.rgb + ": " + std::to_string(s.rgb.frames) + " frames of "
                                    + std::to_string(s.rgb.height) + "x" + std::to_string(s.rgb.width)
                                    + ", manifest expects " + std::to_string(e.frames) + " of "
                                    + std::to_string(m.height) + "x" + std::to_string(m.width));
            }
        }
        ds.samples.push_back(std::move(s));
    }
    return ds;
}

std::string default_layout_path()
{
    return std::string(MVST_DATA_DIR) + "/joints52.layout";
}

std::string gloss_name(std::size_t id)
{
    char buf[16];
    std::snprintf(buf, sizeof buf, "g%02zu", id);
    return buf;
}

Manifest generate_dataset(const GenerateOptions& options, const std::string& out_dir)
{
    const std::string layout_path = options.layout_path.empty() ? default_layout_path() : options.layout_path;
    const auto layout = load_joint_layout(layout_path);
    Rng root(options.seed);
    const GlossBank bank(layout, options.synth.vocab_size, root.derive_seed(), options.synth.gloss_frames);

    Manifest m;
    m.base_dir = out_dir;
    m.joints = layout.joint_count;
    m.height = options.synth.raster.height;
    m.width = options.synth.raster.width;
    for (std::size_t g = 0; g < options.synth.vocab_size; ++g) {
        m.vocabulary.push_back(gloss_name(g));
    }
    const std::string layout_text = format_joint_layout(layout);
    binio::write_file(m.resolve(m.layout), std::vector<char>(layout_text.begin(), layout_text.end()));

    const std::size_t total = options.train_count + options.dev_count;
    for (std::size_t i = 0; i < total; ++i) {
        const std::uint64_t seed = root.derive_seed();
        auto sample = synth_generate(bank, options.synth, seed);
        char id[32];
        std::snprintf(id, sizeof id, "s%04zu", i);
        ManifestEntry e;
        e.id = id;
        e.skeleton = std::string("skeleton/") + id + ".mvsk";
        e.rgb = std::string("rgb/") + id + ".mvrg";
        e.split = i < options.train_count ? "train" : "dev";
        e.frames = sample.skeleton.frames;
        for (auto g : sample.glosses) {
            e.glosses.push_back(gloss_name(g));
        }
        save_skeleton(m.resolve(e.skeleton), sample.skeleton);
        save_rgb(m.resolve(e.rgb), sample.rgb);
        m.entries.push_back(std::move(e));
    }
    save_manifest(m.resolve("manifest.json"), m);
    return m;
}

} // namespace mvst
