#include "emgpr/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include "emgpr/error.hpp"
#include "emgpr/text.hpp"

namespace emgpr {

namespace fs = std::filesystem;

namespace {

/// Runs fn, prefixing any library error with the pipeline stage that raised it.
template <class Fn>
auto stage(const char* name, Fn&& fn) -> decltype(fn()) {
    try {
        return fn();
    } catch (const Error& e) {
        const std::string what = e.what();
        if (what.rfind("[", 0) == 0) {
            throw;
        }
        const std::string tagged = "[" + std::string(name) + "] " + what;
        switch (e.error_class()) {
        case ErrorClass::validation: throw ValidationError(tagged);
        case ErrorClass::data: throw DataError(tagged);
        case ErrorClass::internal: break;
        }
        throw Error(ErrorClass::internal, tagged);
    }
}

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::vector<int> union_classes(std::span<const int> a, std::span<const int> b) {
    std::vector<int> out(a.begin(), a.end());
    out.insert(out.end(), b.begin(), b.end());
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

} // namespace

void RunConfig::validate() const {
    if (inputs.empty() == !synthetic.has_value()) {
        throw ValidationError("exactly one input source is required: recordings or a synthetic spec");
    }
    if (!subject_ids.empty() && subject_ids.size() != inputs.size()) {
        throw ValidationError("subject id list must match the number of inputs");
    }
    if (synthetic) {
        synthetic->validate();
        if (synthetic_subjects < 1) {
            throw ValidationError("need at least one synthetic subject");
        }
    }
    if (techniques.empty() || feature_configs.empty() || classifiers.empty()) {
        throw ValidationError("technique, feature config and classifier lists must be nonempty");
    }
    for (const auto& c : feature_configs) {
        (void)parse_feature_config(c, feature_params);
    }
    split.validate();
    if (group_size < 1) {
        throw ValidationError("group size must be at least 1");
    }
    if (!(rate_hz > 0.0)) {
        throw ValidationError("sample rate must be positive");
    }
}

std::vector<Recording> load_inputs(const RunConfig& cfg) {
    std::vector<Recording> out;
    if (cfg.synthetic) {
        for (int s = 0; s < cfg.synthetic_subjects; ++s) {
            auto spec = *cfg.synthetic;
            spec.seed += static_cast<std::uint64_t>(s);
            spec.subject_id = s + 1;
            out.push_back(generate_synthetic(spec));
        }
        return out;
    }
    for (std::size_t i = 0; i < cfg.inputs.size(); ++i) {
        RecordingOptions opts;
        opts.expected_channels = cfg.expected_channels;
        opts.subject_id = cfg.subject_ids.empty() ? static_cast<int>(i) + 1 : cfg.subject_ids[i];
        opts.sample_rate_hz = cfg.rate_hz;
        out.push_back(load_recording(cfg.inputs[i], opts));
    }
    return out;
}

FeaturizeOptions resolve_featurize(const RunConfig& cfg, Technique technique,
                                   const std::string& config_name, double rate_hz) {
    FeaturizeOptions opts;
    opts.technique = technique;
    opts.regime = make_baseline_spec(technique, rate_hz);
    if (cfg.window_ms) {
        opts.regime.window.length_ms = *cfg.window_ms;
    }
    if (cfg.increment_ms) {
        opts.regime.window.increment_ms = *cfg.increment_ms;
    }
    opts.regime.window.label_policy = cfg.label_policy;
    if (opts.regime.aggregation) {
        opts.regime.aggregation->sliding = cfg.sliding_aggregation;
    }
    opts.features = parse_feature_config(config_name, cfg.feature_params);
    opts.include_rest = cfg.include_rest;
    return opts;
}

std::vector<EvalReport> evaluate_subject(const Recording& rec, const RunConfig& cfg) {
    std::vector<EvalReport> reports;
    for (auto technique : cfg.techniques) {
        for (const auto& config_name : cfg.feature_configs) {
            const auto fopts = stage("featurize", [&] {
                return resolve_featurize(cfg, technique, config_name, rec.sample_rate_hz());
            });
            const auto matrix = stage("featurize", [&] { return featurize(rec, fopts); });
            const auto parts = stage("split", [&] { return split_by_repetition(matrix, cfg.split); });
            for (auto kind : cfg.classifiers) {
                TrainOptions topts;
                topts.classifier = kind;
                topts.hyperparams = cfg.hyperparams;
                topts.hyperparams.seed = cfg.seed;
                topts.standardize = cfg.standardize;
                const auto pipeline = stage("train", [&] {
                    return train_pipeline(parts.train, fopts, rec.num_channels(),
                                          rec.sample_rate_hz(), topts);
                });
                reports.push_back(stage("evaluate", [&] {
                    auto predicted = pipeline.predict(parts.test);
                    if (cfg.trial_vote) {
                        predicted = vote_per_trial(predicted, parts.test.labels, parts.test.repetitions);
                    }
                    const auto classes = union_classes(pipeline.classes(), parts.test.labels);
                    return make_report(rec.subject_id(), std::string(to_string(technique)),
                                       fopts.features.name(), std::string(to_string(kind)),
                                       predicted, parts.test.labels, classes, parts.train.rows());
                }));
            }
        }
    }
    return reports;
}

ExperimentResult run_experiment(const RunConfig& cfg) {
    stage("config", [&] { cfg.validate(); });
    ExperimentResult result;

    const std::size_t n_subjects =
        cfg.synthetic ? static_cast<std::size_t>(cfg.synthetic_subjects) : cfg.inputs.size();
    std::vector<std::vector<EvalReport>> per_subject(n_subjects);
    std::vector<std::exception_ptr> errors(n_subjects);

    auto run_one = [&](std::size_t s) {
        try {
            Recording rec = stage("ingest", [&] {
                if (cfg.synthetic) {
                    auto spec = *cfg.synthetic;
                    spec.seed += static_cast<std::uint64_t>(s);
                    spec.subject_id = static_cast<int>(s) + 1;
                    return generate_synthetic(spec);
                }
                RecordingOptions opts;
                opts.expected_channels = cfg.expected_channels;
                opts.subject_id =
                    cfg.subject_ids.empty() ? static_cast<int>(s) + 1 : cfg.subject_ids[s];
                opts.sample_rate_hz = cfg.rate_hz;
                return load_recording(cfg.inputs[s], opts);
            });
            per_subject[s] = evaluate_subject(rec, cfg);
        } catch (...) {
            errors[s] = std::current_exception();
        }
    };

    const unsigned workers = std::max(1u, std::min<unsigned>(cfg.workers, static_cast<unsigned>(n_subjects)));
    if (workers == 1) {
        for (std::size_t s = 0; s < n_subjects; ++s) {
            run_one(s);
        }
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                for (std::size_t s = next++; s < n_subjects; s = next++) {
                    run_one(s);
                }
            });
        }
        for (auto& t : pool) {
            t.join();
        }
    }
    for (auto& e : errors) {
        if (e) {
            std::rethrow_exception(e);
        }
    }
    for (auto& reports : per_subject) {
        for (auto& r : reports) {
            result.reports.push_back(std::move(r));
        }
    }
    std::stable_sort(result.reports.begin(), result.reports.end(),
                     [](const EvalReport& a, const EvalReport& b) { return a.subject_id < b.subject_id; });
    result.summary = group_average(result.reports, cfg.group_size);

    if (cfg.out_dir.empty()) {
        return result;
    }

    const fs::path dir(cfg.out_dir);
    const bool created_dir = !fs::exists(dir);
    try {
        stage("report", [&] {
            std::error_code ec;
            fs::create_directories(dir, ec);
            if (ec || !fs::is_directory(dir)) {
                throw ValidationError("output directory '" + cfg.out_dir + "' is not writable");
            }
            auto open = [&](const fs::path& p) {
                result.files.push_back(p.string());
                std::ofstream out(p);
                if (!out) {
                    throw ValidationError("cannot write '" + p.string() + "'");
                }
                return out;
            };
            {
                auto out = open(dir / "report.csv");
                write_report_csv(out, result.reports);
            }
            {
                auto out = open(dir / "summary.csv");
                write_summary_csv(out, result.summary);
            }
            if (cfg.write_confusion) {
                fs::create_directories(dir / "confusion");
                for (const auto& r : result.reports) {
                    auto out = open(dir / "confusion" /
                                    ("subject" + std::to_string(r.subject_id) + "_" + r.technique +
                                     "_" + r.config + "_" + r.classifier + ".csv"));
                    write_confusion_csv(out, r.confusion);
                }
            }
        });
    } catch (...) {
        std::error_code ec;
        for (const auto& f : result.files) {
            fs::remove(f, ec);
        }
        fs::remove(dir / "confusion", ec);
        if (created_dir) {
            fs::remove(dir, ec);
        }
        throw;
    }
    return result;
}

// ---------------------------------------------------------------------------
// Latency
// ---------------------------------------------------------------------------

LatencyStats benchmark_latency(const TrainedPipeline& pipeline, const Recording& rec,
                               std::size_t trials) {
    using Clock = std::chrono::steady_clock;
    if (trials < 1) {
        throw ValidationError("benchmark needs at least one trial");
    }
    auto window = pipeline.regime.window;
    window.latency_limit_ms.reset();
    const auto refs = plan_windows(rec, window);
    const std::size_t w = window.length_samples(rec.sample_rate_hz());
    const std::size_t group = pipeline.regime.aggregation ? pipeline.regime.aggregation->n : 1;
    if (refs.size() < group) {
        throw DataError("recording too short to benchmark");
    }
    const std::size_t positions = refs.size() - group + 1;

    std::vector<double> extract_ms;
    std::vector<double> predict_ms;
    std::vector<double> total_ms;
    std::vector<Segment> members(group);
    volatile int sink = 0;
    for (std::size_t t = 0; t < trials; ++t) {
        const std::size_t first = (t * positions) / trials % positions;
        const auto t0 = Clock::now();
        for (std::size_t i = 0; i < group; ++i) {
            materialize_into(rec, refs[first + i], w, members[i]);
        }
        Segment mean;
        if (group > 1) {
            auto m = aggregate_group(members);
            mean = m ? std::move(*m) : members.back();
        }
        const Segment& seg = group > 1 ? mean : members.front();
        auto row = extract(seg, pipeline.features);
        if (pipeline.standardizer) {
            pipeline.standardizer->apply_inplace(row);
        }
        const auto t1 = Clock::now();
        sink = sink + pipeline.model->predict_one(row);
        const auto t2 = Clock::now();
        const double e = std::chrono::duration<double, std::milli>(t1 - t0).count();
        const double p = std::chrono::duration<double, std::milli>(t2 - t1).count();
        extract_ms.push_back(e);
        predict_ms.push_back(p);
        total_ms.push_back(e + p);
    }

    LatencyStats stats;
    stats.trials = trials;
    stats.extract_ms = median(extract_ms);
    stats.predict_ms = median(predict_ms);
    stats.total_ms = median(total_ms);
    stats.window_length_ms = window.length_ms;
    stats.budget_ms = window.increment_ms;
    stats.hard_limit_ms = pipeline.regime.window.latency_limit_ms.value_or(kLatencyLimitMs);

    std::string violations;
    if (stats.window_length_ms > stats.hard_limit_ms) {
        violations += "window length " + text::format_double(stats.window_length_ms) +
                      "ms exceeds the " + text::format_double(stats.hard_limit_ms) + "ms limit";
    }
    if (!(stats.total_ms < stats.budget_ms)) {
        if (!violations.empty()) {
            violations += "; ";
        }
        violations += "median per-window time " + text::format_double(stats.total_ms) +
                      "ms is not below the " + text::format_double(stats.budget_ms) +
                      "ms increment";
    }
    stats.pass = violations.empty();
    stats.verdict = stats.pass ? "PASS" : "FAIL: " + violations;
    return stats;
}

LatencyStats benchmark_latency(const RunConfig& cfg, std::size_t trials, std::size_t max_train_rows) {
    stage("config", [&] { cfg.validate(); });
    RunConfig single = cfg;
    if (single.synthetic) {
        single.synthetic_subjects = 1;
    } else {
        single.inputs.resize(1);
        if (!single.subject_ids.empty()) {
            single.subject_ids.resize(1);
        }
    }
    const auto recs = stage("ingest", [&] { return load_inputs(single); });
    const auto& rec = recs.front();
    auto fopts = stage("featurize", [&] {
        return resolve_featurize(cfg, cfg.techniques.front(), cfg.feature_configs.front(),
                                 rec.sample_rate_hz());
    });
    // the bound is checked by the verdict, not by rejecting the spec
    const auto limit = fopts.regime.window.latency_limit_ms;
    fopts.regime.window.latency_limit_ms.reset();
    const auto matrix = stage("featurize", [&] { return featurize(rec, fopts); });
    auto parts = stage("split", [&] { return split_by_repetition(matrix, cfg.split); });
    if (max_train_rows > 0 && parts.train.rows() > max_train_rows) {
        const std::size_t n = parts.train.rows();
        std::vector<bool> keep(n, false);
        for (std::size_t i = 0; i < max_train_rows; ++i) {
            keep[i * n / max_train_rows] = true;
        }
        parts.train = parts.train.filter_rows([&](std::size_t i) { return keep[i]; });
    }
    TrainOptions topts;
    topts.classifier = cfg.classifiers.front();
    topts.hyperparams = cfg.hyperparams;
    topts.hyperparams.seed = cfg.seed;
    topts.standardize = cfg.standardize;
    auto pipeline = stage("train", [&] {
        return train_pipeline(parts.train, fopts, rec.num_channels(), rec.sample_rate_hz(), topts);
    });
    pipeline.regime.window.latency_limit_ms = limit.value_or(kLatencyLimitMs);
    auto stats = stage("bench", [&] { return benchmark_latency(pipeline, rec, trials); });
    stats.train_rows = parts.train.rows();
    return stats;
}

std::string format_latency(const LatencyStats& s) {
    std::ostringstream out;
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "extract_ms=%.4f predict_ms=%.4f total_ms=%.4f window_ms=%g budget_ms=%g "
                  "limit_ms=%g trials=%zu train_rows=%zu",
                  s.extract_ms, s.predict_ms, s.total_ms, s.window_length_ms, s.budget_ms,
                  s.hard_limit_ms, s.trials, s.train_rows);
    out << buf << "\nverdict: " << s.verdict << '\n';
    return out.str();
}

std::string list_presets() {
    std::ostringstream out;
    out << "Techniques:\n";
    for (auto t : {Technique::WA, Technique::AG, Technique::PROPOSED}) {
        const auto spec = make_baseline_spec(t, kDefaultSampleRateHz);
        out << "  " << to_string(t) << ": " << spec.window.length_ms << "ms window, "
            << spec.window.increment_ms << "ms increment";
        if (spec.aggregation) {
            out << ", mean of " << spec.aggregation->n << " consecutive windows";
        } else {
            out << ", no aggregation";
        }
        out << '\n';
    }
    out << "Feature configurations:\n";
    for (const auto& name : feature_preset_names()) {
        const auto cfg = feature_preset(name);
        out << "  " << name << ": " << cfg.describe() << "  (" << cfg.per_channel()
            << " per channel)\n";
    }
    const Hyperparams hp;
    out << "Classifiers:\n";
    out << "  knn: k=" << hp.knn_k << ", Euclidean distance, standardized features\n";
    out << "  nb: Gaussian, var_smoothing=" << hp.nb_var_smoothing << ", standardized features\n";
    out << "  dt: CART Gini, max_depth=" << hp.dt_max_depth
        << ", min_samples_leaf=" << hp.dt_min_samples_leaf << ", raw features\n";
    out << "  svm: linear one-vs-rest hinge loss SGD, lambda=" << hp.svm_lambda
        << ", epochs=" << hp.svm_epochs << ", standardized features\n";
    return out.str();
}

} // namespace emgpr
