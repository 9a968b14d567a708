#include "mvst/run_config.hpp"

#include "mvst/binary_io.hpp"
#include "mvst/error.hpp"

#include <cmath>

namespace mvst {

namespace {

void require(bool ok, const std::string& field, const std::string& why)
{
    if (!ok) {
        throw ConfigError("config field '" + field + "': " + why);
    }
}

} // namespace

void RunConfig::validate() const
{
    require(window >= 1, "window", "must be at least 1");
    require(stride >= 1 && stride <= window, "stride", "must satisfy 1 <= stride <= window");
    require(scales >= 1, "scales", "must be at least 1");
    require(!gcn_channels.empty(), "gcn_channels", "needs at least one layer");
    for (auto c : gcn_channels) {
        require(c > 0, "gcn_channels", "widths must be positive");
    }
    require(vit_patch > 0, "vit_patch", "must be positive");
    require(vit_dim > 0 && vit_dim % 2 == 0, "vit_dim", "must be even and positive");
    require(vit_heads > 0 && vit_dim % vit_heads == 0, "vit_heads", "must divide vit_dim");
    require(vit_layers > 0, "vit_layers", "must be positive");
    require(vit_ff_dim > 0, "vit_ff_dim", "must be positive");
    require(rgb_width > 0, "rgb_width", "must be positive");
    require(skeleton_width > 0, "skeleton_width", "must be positive");
    require(model_dim > 0 && model_dim % 2 == 0, "model_dim", "must be even and positive");
    require(encoder_layers > 0, "encoder_layers", "must be positive");
    require(encoder_heads > 0 && model_dim % encoder_heads == 0, "encoder_heads", "must divide model_dim");
    require(encoder_ff_dim > 0, "encoder_ff_dim", "must be positive");
    require(std::isfinite(lr) && lr > 0.0, "lr", "must be positive");
    require(std::isfinite(weight_decay) && weight_decay >= 0.0, "weight_decay", "must be non-negative");
    require(batch_size >= 1, "batch_size", "must be at least 1");
    require(dropout >= 0.0 && dropout < 1.0, "dropout", "must lie in [0, 1)");
    require(max_steps >= 1, "max_steps", "must be at least 1");
    require(eval_every >= 1, "eval_every", "must be at least 1");
    require(std::isfinite(early_stop_loss) && early_stop_loss > 0.0, "early_stop_loss", "must be positive");
}

nlohmann::json RunConfig::to_json() const
{
    return {{"preset", preset},
            {"manifest", manifest},
            {"output_dir", output_dir},
            {"views", to_string(views)},
            {"window", window},
            {"stride", stride},
            {"scales", scales},
            {"gcn_channels", gcn_channels},
            {"use_3d", use_3d},
            {"use_multiscale", use_multiscale},
            {"use_stan", use_stan},
            {"vit_patch", vit_patch},
            {"vit_dim", vit_dim},
            {"vit_heads", vit_heads},
            {"vit_layers", vit_layers},
            {"vit_ff_dim", vit_ff_dim},
            {"rgb_width", rgb_width},
            {"skeleton_width", skeleton_width},
            {"model_dim", model_dim},
            {"encoder_layers", encoder_layers},
            {"encoder_heads", encoder_heads},
            {"encoder_ff_dim", encoder_ff_dim},
            {"ctc_loss", to_string(ctc_loss)},
            {"lr", lr},
            {"weight_decay", weight_decay},
            {"batch_size", batch_size},
            {"dropout", dropout},
            {"seed", seed},
            {"max_steps", max_steps},
            {"eval_every", eval_every},
            {"checkpoint_every", checkpoint_every},
            {"early_stop", early_stop},
            {"early_stop_loss", early_stop_loss}};
}

RunConfig RunConfig::from_json(const nlohmann::json& doc, RunConfig c)
{
    if (!doc.is_object()) {
        throw ConfigError("config: expected a JSON object");
    }
    const auto known = c.to_json();
    for (const auto& [key, value] : doc.items()) {
        if (!known.contains(key)) {
            throw ConfigError("config: unknown key '" + key + "'");
        }
    }
    auto take = [&doc](const char* key, auto& field) {
        if (!doc.contains(key)) {
            return;
        }
        try {
            field = doc.at(key).get<std::decay_t<decltype(field)>>();
        } catch (const nlohmann::json::exception&) {
            throw ConfigError(std::string("config field '") + key + "': wrong type (" + doc.at(key).dump() + ")");
        }
    };
    take("preset", c.preset);
    take("manifest", c.manifest);
    take("output_dir", c.output_dir);
    if (doc.contains("views")) {
        std::string v;
        take("views", v);
        c.views = parse_view_selection(v);
    }
    take("window", c.window);
    take("stride", c.stride);
    take("scales", c.scales);
    take("gcn_channels", c.gcn_channels);
    take("use_3d", c.use_3d);
    take("use_multiscale", c.use_multiscale);
    take("use_stan", c.use_stan);
    take("vit_patch", c.vit_patch);
    take("vit_dim", c.vit_dim);
    take("vit_heads", c.vit_heads);
    take("vit_layers", c.vit_layers);
    take("vit_ff_dim", c.vit_ff_dim);
    take("rgb_width", c.rgb_width);
    take("skeleton_width", c.skeleton_width);
    take("model_dim", c.model_dim);
    take("encoder_layers", c.encoder_layers);
    take("encoder_heads", c.encoder_heads);
    take("encoder_ff_dim", c.encoder_ff_dim);
    if (doc.contains("ctc_loss")) {
        std::string v;
        take("ctc_loss", v);
        c.ctc_loss = parse_ctc_variant(v);
    }
    take("lr", c.lr);
    take("weight_decay", c.weight_decay);
    take("batch_size", c.batch_size);
    take("dropout", c.dropout);
    take("seed", c.seed);
    take("max_steps", c.max_steps);
    take("eval_every", c.eval_every);
    take("checkpoint_every", c.checkpoint_every);
    take("early_stop", c.early_stop);
    take("early_stop_loss", c.early_stop_loss);
    c.validate();
    return c;
}

RunConfig RunConfig::from_json(const nlohmann::json& doc)
{
    std::string name = "desk";
    if (doc.is_object() && doc.contains("preset") && doc.at("preset").is_string()) {
        name = doc.at("preset").get<std::string>();
    }
    return from_json(doc, preset_config(name));
}

Am3dGcnConfig RunConfig::gcn_config() const
{
    Am3dGcnConfig g;
    g.scales = scales;
    g.channels = gcn_channels;
    g.frames = window;
    g.use_3d = use_3d;
    g.use_multiscale = use_multiscale;
    g.use_stan = use_stan;
    return g;
}

VitConfig RunConfig::vit_config(std::size_t height, std::size_t width) const
{
    VitConfig v;
    v.patch = vit_patch;
    v.height = height;
    v.width = width;
    v.frames = window;
    v.dim = vit_dim;
    v.heads = vit_heads;
    v.layers = vit_layers;
    v.ff_dim = vit_ff_dim;
    return v;
}

EncoderConfig RunConfig::encoder_config() const
{
    EncoderConfig e;
    e.layers = encoder_layers;
    e.dim = model_dim;
    e.heads = encoder_heads;
    e.ff_dim = encoder_ff_dim;
    return e;
}

FusionConfig RunConfig::fusion_config() const
{
    FusionConfig f;
    f.rgb_input = vit_dim;
    f.skeleton_input = gcn_config().output_width();
    f.rgb_width = rgb_width;
    f.skeleton_width = skeleton_width;
    f.output = model_dim;
    f.views = views;
    return f;
}

RunConfig preset_config(const std::string& name)
{
    RunConfig c;
    if (name == "desk") {
        return c;
    }
    if (name == "paper") {
        c.preset = "paper";
        c.rgb_width = 512;
        c.skeleton_width = 512;
        c.model_dim = 1024;
        c.encoder_layers = 2;
        c.encoder_heads = 8;
        c.encoder_ff_dim = 4096;
        c.vit_patch = 16;
        c.vit_dim = 768;
        c.vit_heads = 12;
        c.vit_layers = 12;
        c.vit_ff_dim = 3072;
        c.gcn_channels = {64, 128, 256};
        c.batch_size = 32;
        c.max_steps = 100000;
        c.eval_every = 1000;
        c.early_stop = false;
        return c;
    }
    throw ConfigError("unknown preset '" + name + "' (expected desk or paper)");
}

std::vector<std::string> preset_names()
{
    return {"desk", "paper"};
}

RunConfig load_run_config(const std::string& path)
{
    auto bytes = binio::read_file(path);
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(bytes.begin(), bytes.end(), nullptr, true, true);
    } catch (const nlohmann::json::exception& ex) {
        throw ConfigError("config " + path + ": " + ex.what());
    }
    return RunConfig::from_json(doc);
}

} // namespace mvst
