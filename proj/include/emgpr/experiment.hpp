#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "emgpr/classifiers.hpp"
#include "emgpr/dataset.hpp"
#include "emgpr/evaluation.hpp"
#include "emgpr/features.hpp"
#include "emgpr/pipeline.hpp"
#include "emgpr/windowing.hpp"

namespace emgpr {

struct RunConfig {
    // Exactly one input source: recording files or a synthetic spec.
    std::vector<std::string> inputs;
    std::vector<int> subject_ids; // defaults to 1..n in input order
    std::optional<SyntheticSpec> synthetic;
    int synthetic_subjects = 1;
    std::optional<std::size_t> expected_channels;
    double rate_hz = kDefaultSampleRateHz;

    std::vector<Technique> techniques{Technique::PROPOSED};
    std::vector<std::string> feature_configs{"C1"};
    std::vector<ClassifierKind> classifiers{ClassifierKind::knn};
    FeatureParams feature_params;
    Hyperparams hyperparams;
    SplitSpec split;
    std::uint64_t seed = 0;

    // Window overrides applied on top of the technique regime.
    std::optional<double> window_ms;
    std::optional<double> increment_ms;

    std::string out_dir;
    bool include_rest = false;
    LabelPolicy label_policy = LabelPolicy::majority;
    bool sliding_aggregation = false;
    std::optional<bool> standardize;
    bool trial_vote = false;
    bool write_confusion = false;
    std::size_t group_size = 10;
    unsigned workers = 1;

    void validate() const;
};

/// Loads or generates every subject's recording, in subject order.
std::vector<Recording> load_inputs(const RunConfig& cfg);

FeaturizeOptions resolve_featurize(const RunConfig& cfg, Technique technique,
                                   const std::string& config_name, double rate_hz);

/// Runs one subject through every (technique, config, classifier) combination.
std::vector<EvalReport> evaluate_subject(const Recording& rec, const RunConfig& cfg);

struct ExperimentResult {
    std::vector<EvalReport> reports;
    GroupSummary summary;
    std::vector<std::string> files;
};

/// Full pipeline over all subjects. Writes report.csv and summary.csv (plus
/// confusion CSVs when requested) under out_dir when it is set; on failure
/// removes whatever it wrote and rethrows with the failing stage named.
ExperimentResult run_experiment(const RunConfig& cfg);

struct LatencyStats {
    double extract_ms = 0.0;
    double predict_ms = 0.0;
    double total_ms = 0.0;
    double window_length_ms = 0.0;
    double budget_ms = 0.0;     // the window increment
    double hard_limit_ms = kLatencyLimitMs;
    std::size_t trials = 0;
    std::size_t train_rows = 0;
    bool pass = false;
    std::string verdict;
};

/// Median per-window featurize and predict time over `trials` windows of `rec`.
LatencyStats benchmark_latency(const TrainedPipeline& pipeline, const Recording& rec,
                               std::size_t trials = 200);

/// Trains a pipeline from the first configured subject and benchmarks it.
/// Training rows are subsampled evenly to at most `max_train_rows`.
LatencyStats benchmark_latency(const RunConfig& cfg, std::size_t trials = 200,
                               std::size_t max_train_rows = 20000);

std::string format_latency(const LatencyStats& stats);

/// Techniques, feature presets and classifier defaults, one per line.
std::string list_presets();

} // namespace emgpr
