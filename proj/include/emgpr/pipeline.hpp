#pragma once

#include <cstddef>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "emgpr/classifiers.hpp"
#include "emgpr/dataset.hpp"
#include "emgpr/features.hpp"
#include "emgpr/windowing.hpp"

namespace emgpr {

/// Windowing regime plus feature set applied to a recording.
struct FeaturizeOptions {
    Technique technique = Technique::PROPOSED;
    BaselineSpec regime;
    FeatureConfig features = feature_preset("C1");
    bool include_rest = false;
};

FeaturizeOptions featurize_options(Technique technique, const FeatureConfig& features,
                                   double rate_hz, LabelPolicy policy = LabelPolicy::majority);

/// Segments, optionally aggregates, and featurizes a recording window by window.
///
/// Produces the same matrix as build_matrix(aggregate(segment(rec))) without
/// holding every window in memory. Rest windows (label 0) are dropped unless
/// include_rest is set.
FeatureMatrix featurize(const Recording& rec, const FeaturizeOptions& opts);

/// Standardization on for kNN, NB, SVM; off for the tree.
bool default_standardize(ClassifierKind kind);

/// A deployable chain: windowing, features, scaling, classifier.
struct TrainedPipeline {
    Technique technique = Technique::PROPOSED;
    BaselineSpec regime;
    FeatureConfig features = feature_preset("C1");
    std::size_t num_channels = 0;
    double sample_rate_hz = kDefaultSampleRateHz;
    std::optional<StandardizationParams> standardizer;
    std::shared_ptr<const Classifier> model;
    std::size_t train_rows = 0;

    const std::vector<int>& classes() const { return model->classes(); }

    std::vector<int> predict(const FeatureMatrix& rows) const;
    /// Featurizes and classifies one window.
    int predict_segment(const Segment& segment) const;
};

struct TrainOptions {
    ClassifierKind classifier = ClassifierKind::knn;
    Hyperparams hyperparams;
    std::optional<bool> standardize;
};

TrainedPipeline train_pipeline(const FeatureMatrix& train, const FeaturizeOptions& featurized,
                               std::size_t num_channels, double sample_rate_hz,
                               const TrainOptions& opts);

/// Self-describing text file:
///   emgpr-pipeline 1
///   technique/window/aggregation/features/channels/rate lines
///   standardizer block, then the embedded emgpr-model block
void save_pipeline(std::ostream& out, const TrainedPipeline& p);
void save_pipeline(const std::string& path, const TrainedPipeline& p);
TrainedPipeline load_pipeline(std::istream& in);
TrainedPipeline load_pipeline(const std::string& path);

} // namespace emgpr
