#pragma once

#include "mvst/metrics.hpp"
#include "mvst/model.hpp"
#include "mvst/run_config.hpp"

#include <functional>
#include <string>
#include <vector>

#include "json.hpp"

namespace mvst {

struct EvalRecord {
    std::size_t step = 0;
    std::string split;
    double wer = 0.0;
    double mean_nll = 0.0;
};

struct TrainReport {
    RunConfig config;
    std::vector<double> losses; ///< mean batch loss per optimizer step
    std::vector<EvalRecord> evaluations;
    std::vector<std::string> skipped; ///< ids whose target does not fit their clip count
    std::size_t steps = 0;
    bool stopped_early = false;
    double train_wer = 1.0; ///< at the last evaluation
    double train_nll = 0.0;
    double wall_seconds = 0.0;
    std::string checkpoint_path;

    nlohmann::json to_json() const;
};

struct EvalReport {
    std::string split;
    std::string checkpoint_path;
    CorpusScore score;
    double mean_nll = 0.0;
    std::vector<std::string> skipped;

    nlohmann::json to_json() const;
};

struct TrainHooks {
    /// Called after every optimizer step with the step number (1-based) and its loss.
    std::function<void(std::size_t, double)> on_step;
    bool write_files = true;
};

/// Mean nll and corpus WER of `model` on prepared samples, evaluation mode.
EvalReport score_samples(const Model& model, const std::vector<PreparedSample>& samples, const std::string& split,
                         const std::vector<std::string>& vocabulary);

/// Train/evaluate/score in process; `dataset` is loaded from config.manifest when null.
TrainReport train(const RunConfig& config, const TrainHooks& hooks = {}, const Dataset* dataset = nullptr);
EvalReport evaluate(const RunConfig& config, const std::string& checkpoint_path, const std::string& split,
                    const Dataset* dataset = nullptr);

struct AblationRow {
    std::string table; ///< "views" or "graph"
    std::string name;
    RunConfig config;
    double train_wer = 0.0;
    double eval_wer = 0.0;
    std::string eval_split;
    std::size_t steps = 0;
};

struct AblationReport {
    std::vector<AblationRow> rows;
    nlohmann::json to_json() const;
    std::string to_text() const;
};

/// axes is a subset of {view, 3d, multiscale, stan, sliding-window}. "view"
/// yields the rgb / skeleton / both rows; any of the others yields the five
/// skeleton-only graph rows (2D, 3D, +MS, +STAN, +MS+STAN).
AblationReport ablate(const RunConfig& config, const std::vector<std::string>& axes);

/// Writes `text` to `path`, creating parent directories.
void write_text_file(const std::string& path, const std::string& text);

} // namespace mvst
