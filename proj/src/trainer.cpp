#include "mvst/trainer.hpp"

#include "mvst/adam.hpp"
#include "mvst/binary_io.hpp"
#include "mvst/checkpoint.hpp"
#include "mvst/error.hpp"
#include "mvst/log.hpp"
#include "mvst/ops.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <iomanip>
#include <numeric>
#include <optional>
#include <sstream>

namespace mvst {

namespace fs = std::filesystem;

namespace {

struct Prepared {
    std::vector<PreparedSample> train;
    std::vector<PreparedSample> dev;
    std::vector<std::string> skipped;
};

LoadOptions load_options_for(const RunConfig& config)
{
    return {uses_skeleton(config.views), uses_rgb(config.views)};
}

std::vector<PreparedSample> prepare_split(const Dataset& ds, const std::string& split, const RunConfig& config,
                                          std::vector<std::string>& skipped)
{
    std::vector<PreparedSample> out;
    for (const Sample* s : ds.split(split)) {
        auto p = prepare_sample(*s, config);
        if (!p.feasible) {
            log_warning("skipping " + s->id + ": " + std::to_string(p.target.size()) + " glosses need "
                        + std::to_string(ctc_min_positions(p.target)) + " clips, sample has "
                        + std::to_string(p.clips));
            skipped.push_back(s->id);
            continue;
        }
        out.push_back(std::move(p));
    }
    return out;
}

nlohmann::json eval_record_json(const EvalRecord& e)
{
    return {{"step", e.step}, {"split", e.split}, {"wer", e.wer}, {"mean_nll", e.mean_nll}};
}

std::vector<std::size_t> epoch_order(std::size_t n, std::uint64_t seed, std::size_t epoch)
{
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(Rng::mix(seed ^ Rng::mix(0x45504f43ULL + epoch)));
    for (std::size_t i = n; i > 1; --i) {
        std::swap(order[i - 1], order[static_cast<std::size_t>(rng.below(i))]);
    }
    return order;
}

} // namespace

nlohmann::json TrainReport::to_json() const
{
    nlohmann::json evals = nlohmann::json::array();
    for (const auto& e : evaluations) {
        evals.push_back(eval_record_json(e));
    }
    return {{"schema_version", 1},
            {"config", config.to_json()},
            {"seed", config.seed},
            {"steps", steps},
            {"stopped_early", stopped_early},
            {"train_wer", train_wer},
            {"train_nll", train_nll},
            {"wall_seconds", wall_seconds},
            {"checkpoint", checkpoint_path},
            {"skipped", skipped},
            {"losses", losses},
            {"evaluations", std::move(evals)}};
}

nlohmann::json EvalReport::to_json() const
{
    return {{"schema_version", 1},
            {"split", split},
            {"checkpoint", checkpoint_path},
            {"mean_nll", mean_nll},
            {"skipped", skipped},
            {"score", score.to_json()}};
}

void write_text_file(const std::string& path, const std::string& text)
{
    binio::write_file(path, std::vector<char>(text.begin(), text.end()));
}

EvalReport score_samples(const Model& model, const std::vector<PreparedSample>& samples, const std::string& split,
                         const std::vector<std::string>& vocabulary)
{
    if (samples.empty()) {
        throw ConfigError("no scorable samples in split '" + split + "'");
    }
    EvalReport report;
    report.split = split;
    std::vector<TokenPair> pairs;
    std::vector<std::string> ids;
    double nll = 0.0;
    for (const auto& s : samples) {
        auto ctx = DropoutContext::evaluation();
        auto lp = model.forward(s, ctx);
        nll += ctc_loss(lp, s.target, CtcVariant::nll).item();
        auto hyp = best_path_decode(LogProbLattice::from_tensor(lp));
        std::vector<std::string> hyp_tokens;
        for (auto g : hyp) {
            hyp_tokens.push_back(g < vocabulary.size() ? vocabulary[g] : gloss_name(g));
        }
        pairs.emplace_back(s.glosses, std::move(hyp_tokens));
        ids.push_back(s.id);
    }
    report.score = corpus_wer(pairs, ids);
    report.mean_nll = nll / static_cast<double>(samples.size());
    return report;
}

TrainReport train(const RunConfig& config, const TrainHooks& hooks, const Dataset* dataset)
{
    config.validate();
    const auto started = std::chrono::steady_clock::now();
    std::optional<Dataset> owned;
    if (dataset == nullptr) {
        if (config.manifest.empty()) {
            throw ConfigError("config field 'manifest': no dataset given");
        }
        owned = load_dataset(config.manifest, load_options_for(config));
        dataset = &*owned;
    }

    TrainReport report;
    report.config = config;
    Prepared data;
    data.train = prepare_split(*dataset, "train", config, report.skipped);
    data.dev = prepare_split(*dataset, "dev", config, report.skipped);
    if (data.train.empty()) {
        throw DataError(DataError::Kind::bad_format, "no feasible training samples in the dataset");
    }

    Model model(config, dataset->layout, dataset->manifest.vocabulary.size(), dataset->manifest.height,
                dataset->manifest.width);
    Adam adam({config.lr, 0.9, 0.999, 1e-8, config.weight_decay});
    Rng dropout_rng(Rng::mix(config.seed + 1));
    const std::string config_text = config.to_json().dump();
    const fs::path out_dir(config.output_dir);

    const auto& vocab = dataset->manifest.vocabulary;
    auto evaluate_now = [&](std::size_t step) {
        auto tr = score_samples(model, data.train, "train", vocab);
        report.evaluations.push_back({step, "train", tr.score.wer, tr.mean_nll});
        report.train_wer = tr.score.wer;
        report.train_nll = tr.mean_nll;
        if (!data.dev.empty()) {
            auto dv = score_samples(model, data.dev, "dev", vocab);
            report.evaluations.push_back({step, "dev", dv.score.wer, dv.mean_nll});
        }
        log_info("step " + std::to_string(step) + ": train WER " + std::to_string(tr.score.wer) + ", nll "
                 + std::to_string(tr.mean_nll));
        return config.early_stop && tr.score.wer == 0.0 && tr.mean_nll < config.early_stop_loss;
    };

    std::size_t epoch = 0, cursor = 0;
    auto order = epoch_order(data.train.size(), config.seed, epoch);
    for (std::size_t step = 1; step <= config.max_steps; ++step) {
        DropoutContext ctx{config.dropout, true, &dropout_rng};
        Tensor total;
        std::size_t count = 0;
        while (count < config.batch_size) {
            if (cursor == order.size()) {
                order = epoch_order(data.train.size(), config.seed, ++epoch);
                cursor = 0;
            }
            const auto& sample = data.train[order[cursor++]];
            auto loss = ctc_loss(model.forward(sample, ctx), sample.target, config.ctc_loss);
            total = total.defined() ? add(total, loss) : loss;
            ++count;
        }
        auto batch_loss = scale(total, 1.0 / static_cast<double>(count));
        const double value = batch_loss.item();
        if (!std::isfinite(value)) {
            throw NumericError("non-finite loss " + std::to_string(value) + " at step " + std::to_string(step));
        }
        backward(batch_loss);
        adam.step(model.parameters());
        report.losses.push_back(value);
        report.steps = step;
        if (hooks.on_step) {
            hooks.on_step(step, value);
        }
        if (hooks.write_files && config.checkpoint_every > 0 && step % config.checkpoint_every == 0) {
            save_checkpoint((out_dir / ("checkpoint_step" + std::to_string(step) + ".bin")).string(), config_text,
                            model.parameters());
        }
        if (step % config.eval_every == 0 || step == config.max_steps) {
            if (evaluate_now(step)) {
                report.stopped_early = step < config.max_steps;
                break;
            }
        }
    }

    report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    if (hooks.write_files) {
        report.checkpoint_path = (out_dir / "checkpoint.bin").string();
        save_checkpoint(report.checkpoint_path, config_text, model.parameters());
        write_text_file((out_dir / "train_report.json").string(), report.to_json().dump(2) + "\n");
    }
    return report;
}

EvalReport evaluate(const RunConfig& config, const std::string& checkpoint_path, const std::string& split,
                    const Dataset* dataset)
{
    config.validate();
    std::optional<Dataset> owned;
    if (dataset == nullptr) {
        if (config.manifest.empty()) {
            throw ConfigError("config field 'manifest': no dataset given");
        }
        owned = load_dataset(config.manifest, load_options_for(config));
        dataset = &*owned;
    }
    Model model(config, dataset->layout, dataset->manifest.vocabulary.size(), dataset->manifest.height,
                dataset->manifest.width);
    restore_parameters(load_checkpoint(checkpoint_path), model.parameters());
    std::vector<std::string> skipped;
    auto samples = prepare_split(*dataset, split, config, skipped);
    auto report = score_samples(model, samples, split, dataset->manifest.vocabulary);
    report.checkpoint_path = checkpoint_path;
    report.skipped = std::move(skipped);
    return report;
}

nlohmann::json AblationReport::to_json() const
{
    nlohmann::json list = nlohmann::json::array();
    for (const auto& r : rows) {
        list.push_back({{"table", r.table},
                        {"name", r.name},
                        {"train_wer", r.train_wer},
                        {"eval_wer", r.eval_wer},
                        {"eval_split", r.eval_split},
                        {"steps", r.steps},
                        {"config", r.config.to_json()}});
    }
    return {{"schema_version", 1}, {"rows", std::move(list)}};
}

std::string AblationReport::to_text() const
{
    std::ostringstream out;
    out << std::fixed << std::setprecision(4);
    std::string table;
    for (const auto& r : rows) {
        if (r.table != table) {
            table = r.table;
            out << (r.table == "views" ? "views" : "skeleton graph") << '\n'
                << "  " << std::left << std::setw(18) << "configuration" << std::setw(12) << "train WER"
                << "eval WER (" << r.eval_split << ")\n";
        }
        out << "  " << std::left << std::setw(18) << r.name << std::setw(12) << r.train_wer << r.eval_wer << '\n';
    }
    return out.str();
}

AblationReport ablate(const RunConfig& config, const std::vector<std::string>& axes)
{
    bool views = false, graph = false;
    for (const auto& a : axes) {
        if (a == "view") {
            views = true;
        } else if (a == "3d" || a == "multiscale" || a == "stan" || a == "sliding-window") {
            graph = true;
        } else {
            throw ConfigError("unknown ablation axis '" + a + "'");
        }
    }
    if (!views && !graph) {
        throw ConfigError("ablate: no axes selected");
    }
    const Dataset ds = load_dataset(config.manifest, {true, true});
    const std::string eval_split = ds.split("dev").empty() ? "train" : "dev";

    std::vector<std::pair<std::string, RunConfig>> runs;
    if (views) {
        for (auto v : {ViewSelection::rgb, ViewSelection::skeleton, ViewSelection::both}) {
            RunConfig c = config;
            c.views = v;
            runs.emplace_back("views/" + to_string(v), c);
        }
    }
    if (graph) {
        RunConfig base = config;
        base.views = ViewSelection::skeleton;
        auto variant = [&](const std::string& name, bool d3, bool ms, bool stan) {
            RunConfig c = base;
            c.use_3d = d3;
            c.use_multiscale = ms;
            c.use_stan = stan;
            if (!d3) {
                c.window = 1;
                c.stride = 1;
            }
            runs.emplace_back("graph/" + name, c);
        };
        variant("2D-GCN", false, false, false);
        variant("3D-GCN", true, false, false);
        variant("3D+MS", true, true, false);
        variant("3D+STAN", true, false, true);
        variant("3D+MS+STAN", true, true, true);
    }

    AblationReport report;
    for (auto& [label, c] : runs) {
        const auto slash = label.find('/');
        c.output_dir = (fs::path(config.output_dir) / "ablate" / label).string();
        log_info("ablation run " + label);
        auto tr = train(c, {}, &ds);
        std::vector<std::string> skipped;
        Model model(c, ds.layout, ds.manifest.vocabulary.size(), ds.manifest.height, ds.manifest.width);
        restore_parameters(load_checkpoint(tr.checkpoint_path), model.parameters());
        auto ev = score_samples(model, prepare_split(ds, eval_split, c, skipped), eval_split,
                                ds.manifest.vocabulary);
        report.rows.push_back({label.substr(0, slash), label.substr(slash + 1), c, tr.train_wer, ev.score.wer,
                               eval_split, tr.steps});
    }
    return report;
}

} // namespace mvst
