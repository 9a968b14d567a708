#include "mvst/checkpoint.hpp"
#include "mvst/dataset.hpp"
#include "mvst/error.hpp"
#include "mvst/log.hpp"
#include "mvst/metrics.hpp"
#include "mvst/run_config.hpp"
#include "mvst/trainer.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <filesystem>
#include <iostream>
#include <map>
#include <sstream>

namespace {

enum ExitCode { ok = 0, failure = 1, config_error = 2, data_error = 3, numeric_error = 4 };

/// One string-valued flag per RunConfig key, `--some-key` for `some_key`.
struct ConfigFlags {
    std::string config_path;
    std::map<std::string, std::string> values;

    void attach(CLI::App& app)
    {
        app.add_option("--config", config_path, "JSON run configuration (same keys as the flags)");
        const auto defaults = mvst::RunConfig{}.to_json();
        for (const auto& [key, value] : defaults.items()) {
            std::string flag = "--" + key;
            for (auto& ch : flag) {
                if (ch == '_') {
                    ch = '-';
                }
            }
            app.add_option(flag, values[key], "overrides '" + key + "' (default " + value.dump() + ")");
        }
    }

    /// Flags override --config, which overrides `base`.
    mvst::RunConfig resolve(const CLI::App& app, nlohmann::json base = nlohmann::json::object()) const
    {
        nlohmann::json doc = std::move(base);
        if (!config_path.empty()) {
            doc = mvst::load_run_config(config_path).to_json();
        }
        const auto defaults = mvst::RunConfig{}.to_json();
        for (const auto& [key, text] : values) {
            std::string flag = "--" + key;
            for (auto& ch : flag) {
                if (ch == '_') {
                    ch = '-';
                }
            }
            if (app.count(flag) == 0) {
                continue;
            }
            const auto& like = defaults.at(key);
            if (like.is_string()) {
                doc[key] = text;
            } else if (like.is_array()) {
                nlohmann::json list = nlohmann::json::array();
                std::stringstream in(text);
                for (std::string item; std::getline(in, item, ',');) {
                    list.push_back(parse_scalar(key, item));
                }
                doc[key] = list;
            } else {
                doc[key] = parse_scalar(key, text);
            }
        }
        return mvst::RunConfig::from_json(doc);
    }

    static nlohmann::json parse_scalar(const std::string& key, const std::string& text)
    {
        auto v = nlohmann::json::parse(text, nullptr, false);
        if (v.is_discarded() || !(v.is_number() || v.is_boolean())) {
            throw mvst::ConfigError("flag for '" + key + "': cannot parse '" + text + "'");
        }
        return v;
    }
};

int run_generate(const std::string& out_dir, const mvst::GenerateOptions& options)
{
    auto manifest = mvst::generate_dataset(options, out_dir);
    std::cout << "wrote " << manifest.entries.size() << " samples to "
              << (std::filesystem::path(out_dir) / "manifest.json").string() << '\n';
    return ok;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Multi-view skeleton + RGB continuous sign recognition toolkit"};
    app.require_subcommand(1);

    mvst::GenerateOptions gen;
    std::string gen_out;
    auto* generate = app.add_subcommand("generate", "write a synthetic dataset and its manifest");
    generate->add_option("--out", gen_out, "output directory")->required();
    generate->add_option("--vocab", gen.synth.vocab_size, "vocabulary size")->capture_default_str();
    generate->add_option("--count", gen.train_count, "training sentences")->capture_default_str();
    generate->add_option("--dev-count", gen.dev_count, "dev sentences")->capture_default_str();
    generate->add_option("--min-length", gen.synth.min_length, "shortest sentence")->capture_default_str();
    generate->add_option("--max-length", gen.synth.max_length, "longest sentence")->capture_default_str();
    generate->add_option("--seed", gen.seed, "dataset seed")->capture_default_str();
    generate->add_option("--gloss-frames", gen.synth.gloss_frames, "frames per gloss")->capture_default_str();
    generate->add_option("--transition-frames", gen.synth.transition_frames, "frames between glosses")
        ->capture_default_str();
    generate->add_option("--noise", gen.synth.noise, "coordinate noise (canvas pixels)")->capture_default_str();
    generate->add_option("--height", gen.synth.raster.height, "render height")->capture_default_str();
    generate->add_option("--width", gen.synth.raster.width, "render width")->capture_default_str();
    generate->add_option("--layout", gen.layout_path, "joint layout file");

    ConfigFlags train_flags;
    auto* train = app.add_subcommand("train", "train a model");
    train_flags.attach(*train);
    train->get_option("--seed")->required();

    ConfigFlags eval_flags;
    std::string checkpoint, split = "train", report_path, hyp_path;
    auto* evaluate = app.add_subcommand("evaluate", "decode a split with a checkpoint and score it");
    eval_flags.attach(*evaluate);
    evaluate->add_option("--checkpoint", checkpoint, "checkpoint file")->required();
    evaluate->add_option("--split", split, "split to score")->capture_default_str();
    evaluate->add_option("--report", report_path, "write the JSON report here");
    evaluate->add_option("--hypotheses", hyp_path, "write decoded gloss lines here");

    ConfigFlags ablate_flags;
    std::vector<std::string> axes{"view", "3d", "multiscale", "stan", "sliding-window"};
    auto* ablate = app.add_subcommand("ablate", "train and score the view and graph ablation rows");
    ablate_flags.attach(*ablate);
    ablate->add_option("--axes", axes, "subset of view,3d,multiscale,stan,sliding-window")->delimiter(',');

    std::string ref_path, score_hyp_path, score_report;
    auto* score = app.add_subcommand("score", "word error rate of hypothesis lines against references");
    score->add_option("--ref", ref_path, "reference file, one sentence per line")->required();
    score->add_option("--hyp", score_hyp_path, "hypothesis file, one sentence per line")->required();
    score->add_option("--report", score_report, "write the JSON report here");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? ok : config_error;
    }

    try {
        if (generate->parsed()) {
            return run_generate(gen_out, gen);
        }
        if (train->parsed()) {
            auto config = train_flags.resolve(*train);
            auto report = mvst::train(config);
            std::cout << "steps " << report.steps << "  train WER " << report.train_wer << "  train nll "
                      << report.train_nll << "  " << report.wall_seconds << " s\n"
                      << "checkpoint " << report.checkpoint_path << '\n';
            return ok;
        }
        if (evaluate->parsed()) {
            // Without --config the run configuration stored in the checkpoint is used.
            auto stored = nlohmann::json::parse(mvst::load_checkpoint(checkpoint).config_json);
            auto config = eval_flags.resolve(*evaluate, std::move(stored));
            auto report = mvst::evaluate(config, checkpoint, split);
            std::cout << report.score.to_text() << "mean nll " << report.mean_nll << '\n';
            if (!report_path.empty()) {
                mvst::write_text_file(report_path, report.to_json().dump(2) + "\n");
            }
            if (!hyp_path.empty()) {
                std::vector<std::vector<std::string>> lines;
                for (const auto& s : report.score.sentences) {
                    lines.push_back(s.hypothesis);
                }
                mvst::write_token_file(hyp_path, lines);
            }
            return ok;
        }
        if (ablate->parsed()) {
            auto config = ablate_flags.resolve(*ablate);
            auto report = mvst::ablate(config, axes);
            std::cout << report.to_text();
            mvst::write_text_file((std::filesystem::path(config.output_dir) / "ablation.json").string(),
                                  report.to_json().dump(2) + "\n");
            return ok;
        }
        if (score->parsed()) {
            auto refs = mvst::read_token_file(ref_path);
            auto hyps = mvst::read_token_file(score_hyp_path);
            if (refs.size() != hyps.size()) {
                throw mvst::DataError(mvst::DataError::Kind::shape_mismatch,
                                      ref_path + " has " + std::to_string(refs.size()) + " lines, " + score_hyp_path
                                          + " has " + std::to_string(hyps.size()));
            }
            std::vector<mvst::TokenPair> pairs;
            for (std::size_t i = 0; i < refs.size(); ++i) {
                pairs.emplace_back(refs[i], hyps[i]);
            }
            auto result = mvst::corpus_wer(pairs);
            std::cout << result.to_text();
            if (!score_report.empty()) {
                mvst::write_text_file(score_report, result.to_json().dump(2) + "\n");
            }
            return ok;
        }
    } catch (const mvst::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return config_error;
    } catch (const mvst::DataError& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return data_error;
    } catch (const mvst::NumericError& e) {
        std::cerr << "numeric error: " << e.what() << '\n';
        return numeric_error;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return failure;
    }
    return failure;
}
