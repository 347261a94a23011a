// emgpr command line: synthesize, ingest, featurize, train, evaluate, run,
// bench and presets.
//
// Every subcommand accepts --run-config FILE: a flat `key = value` file whose
// keys are long option names (without dashes). '#' starts a comment. Options
// given on the command line override the file. Flags take true/false.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "emgpr/classifiers.hpp"
#include "emgpr/dataset.hpp"
#include "emgpr/error.hpp"
#include "emgpr/evaluation.hpp"
#include "emgpr/experiment.hpp"
#include "emgpr/features.hpp"
#include "emgpr/parallel.hpp"
#include "emgpr/pipeline.hpp"
#include "emgpr/text.hpp"

namespace {

using namespace emgpr;

constexpr int kExitValidation = 1;
constexpr int kExitData = 2;
constexpr int kExitInternal = 3;

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    for (auto tok : text::split(s, ',')) {
        tok = text::trim(tok);
        if (!tok.empty()) {
            out.emplace_back(tok);
        }
    }
    return out;
}

/// Expands --run-config into ordinary arguments placed before the user's own.
std::vector<std::string> expand_run_config(std::vector<std::string> args) {
    auto it = std::find(args.begin(), args.end(), "--run-config");
    if (it == args.end()) {
        return args;
    }
    if (it + 1 == args.end()) {
        throw ValidationError("--run-config needs a file");
    }
    const std::string path = *(it + 1);
    args.erase(it, it + 2);

    std::set<std::string> given;
    for (const auto& a : args) {
        if (a.rfind("--", 0) == 0) {
            given.insert(a.substr(2, a.find('=') == std::string::npos ? std::string::npos
                                                                       : a.find('=') - 2));
        }
    }
    std::ifstream in(path);
    if (!in) {
        throw ValidationError("cannot open run config '" + path + "'");
    }
    std::vector<std::string> extra;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        const auto body = text::trim(std::string_view(line).substr(0, hash));
        if (body.empty()) {
            continue;
        }
        const auto eq = body.find('=');
        if (eq == std::string_view::npos) {
            throw ValidationError(path + ":" + std::to_string(line_no) + ": expected key = value");
        }
        const std::string key(text::trim(body.substr(0, eq)));
        const std::string value(text::trim(body.substr(eq + 1)));
        if (key.empty() || given.count(key) != 0) {
            continue;
        }
        extra.push_back("--" + key + "=" + value);
    }
    // subcommand name stays first
    const std::size_t at = args.size() >= 2 ? 2 : args.size();
    args.insert(args.begin() + static_cast<std::ptrdiff_t>(at), extra.begin(), extra.end());
    return args;
}

struct FeatureFlags {
    std::string technique = "PROPOSED";
    std::string config = "C1";
    std::string label_policy = "majority";
    bool include_rest = false;
    bool sliding_aggregation = false;
    std::optional<double> window_ms;
    std::optional<double> increment_ms;
    FeatureParams params;
};

void add_feature_flags(CLI::App* sub, FeatureFlags& f, bool lists) {
    sub->add_option("--technique", f.technique,
                    lists ? "Techniques, comma separated: WA, AG, PROPOSED" : "WA, AG or PROPOSED")
        ->capture_default_str();
    sub->add_option("--config", f.config,
                    lists ? "Feature configs, comma separated: C1..C7 or kind lists joined by '+'"
                          : "C1..C7 or a kind list such as WL,ZC,RMS")
        ->capture_default_str();
    sub->add_option("--label-policy", f.label_policy, "majority, pure_only or endpoint")
        ->capture_default_str();
    sub->add_flag("--include-rest", f.include_rest, "Keep rest (stimulus 0) windows");
    sub->add_flag("--sliding-aggregation", f.sliding_aggregation,
                  "AG averages every run of 5 windows instead of disjoint groups");
    sub->add_option("--window-ms", f.window_ms, "Override the window length");
    sub->add_option("--increment-ms", f.increment_ms, "Override the window increment");
    sub->add_option("--zc-threshold", f.params.zc_threshold)->capture_default_str();
    sub->add_option("--ssc-threshold", f.params.ssc_threshold)->capture_default_str();
    sub->add_option("--hist-bins", f.params.hist_bins)->capture_default_str();
    sub->add_option("--hist-span", f.params.hist_sigma_span, "Histogram half-range in sigmas")
        ->capture_default_str();
}

void add_hyper_flags(CLI::App* sub, Hyperparams& hp, std::uint64_t& seed) {
    sub->add_option("--k", hp.knn_k, "kNN neighbours")->capture_default_str();
    sub->add_option("--nb-smoothing", hp.nb_var_smoothing)->capture_default_str();
    sub->add_option("--max-depth", hp.dt_max_depth)->capture_default_str();
    sub->add_option("--min-leaf", hp.dt_min_samples_leaf)->capture_default_str();
    sub->add_option("--svm-lambda", hp.svm_lambda)->capture_default_str();
    sub->add_option("--svm-epochs", hp.svm_epochs)->capture_default_str();
    sub->add_option("--seed", seed, "Seed for synthetic data and SVM shuffling")->capture_default_str();
}

void add_synth_flags(CLI::App* sub, SyntheticSpec& s) {
    sub->add_option("--classes", s.num_classes)->capture_default_str();
    sub->add_option("--reps", s.num_repetitions)->capture_default_str();
    sub->add_option("--move-s", s.movement_duration_s)->capture_default_str();
    sub->add_option("--rest-s", s.rest_duration_s)->capture_default_str();
    sub->add_option("--synth-channels", s.num_channels)->capture_default_str();
    sub->add_option("--noise", s.noise_level)->capture_default_str();
}

FeaturizeOptions to_featurize(const FeatureFlags& f, double rate_hz) {
    RunConfig cfg;
    cfg.window_ms = f.window_ms;
    cfg.increment_ms = f.increment_ms;
    cfg.label_policy = label_policy_from_string(f.label_policy);
    cfg.sliding_aggregation = f.sliding_aggregation;
    cfg.include_rest = f.include_rest;
    cfg.feature_params = f.params;
    return resolve_featurize(cfg, technique_from_string(f.technique), f.config, rate_hz);
}

std::size_t channels_of(const FeatureMatrix& fm) {
    std::size_t c = 0;
    for (const auto& m : fm.column_meta) {
        c = std::max(c, m.channel + 1);
    }
    return c;
}

FeatureMatrix filter_reps(const FeatureMatrix& fm, const std::set<int>& reps, const char* what) {
    auto out = fm.filter_rows([&](std::size_t i) { return reps.count(fm.repetitions[i]) != 0; });
    if (out.rows() == 0) {
        throw SplitError(std::string("no ") + what + " rows for the requested repetitions");
    }
    return out;
}

std::string join(const std::set<int>& s) {
    std::string out;
    for (int v : s) {
        out += (out.empty() ? "" : ",") + std::to_string(v);
    }
    return out;
}

int run_cli(int argc, char** argv) {
    CLI::App app{"EMG pattern-recognition pipeline: windowing, time-domain features, classifiers"};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all");

    unsigned threads = 0;
    app.add_option("--threads", threads, "Worker threads for data-parallel stages (0 = all cores)");

    std::string run_config_doc;
    auto add_run_config = [&](CLI::App* sub) {
        sub->add_option("--run-config", run_config_doc, "Flat key = value configuration file");
    };

    double rate_hz = kDefaultSampleRateHz;
    std::optional<std::size_t> channels;
    int subject = 1;
    std::string input;
    std::string out;
    std::uint64_t seed = 0;
    Hyperparams hp;
    FeatureFlags feat;
    SyntheticSpec synth;

    // synth
    auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic recording CSV");
    add_run_config(synth_cmd);
    add_synth_flags(synth_cmd, synth);
    synth_cmd->add_option("--rate-hz", rate_hz)->capture_default_str();
    synth_cmd->add_option("--seed", seed)->capture_default_str();
    synth_cmd->add_option("--subject", subject)->capture_default_str();
    synth_cmd->add_option("--out", out, "Output CSV")->required();

    // ingest
    auto* ingest_cmd = app.add_subcommand("ingest", "Validate a recording CSV and print a summary");
    add_run_config(ingest_cmd);
    ingest_cmd->add_option("--input", input, "Recording CSV")->required();
    ingest_cmd->add_option("--channels", channels, "Expected channel count");
    ingest_cmd->add_option("--rate-hz", rate_hz)->capture_default_str();
    ingest_cmd->add_option("--subject", subject)->capture_default_str();
    ingest_cmd->add_option("--out", out, "Rewrite in canonical form");

    // featurize
    auto* feat_cmd = app.add_subcommand("featurize", "Window and featurize a recording");
    add_run_config(feat_cmd);
    feat_cmd->add_option("--input", input, "Recording CSV")->required();
    feat_cmd->add_option("--channels", channels, "Expected channel count");
    feat_cmd->add_option("--rate-hz", rate_hz)->capture_default_str();
    feat_cmd->add_option("--subject", subject)->capture_default_str();
    feat_cmd->add_option("--out", out, "Feature CSV")->required();
    add_feature_flags(feat_cmd, feat, false);

    // train
    std::string classifier = "knn";
    std::string train_reps = "1,3,4,6";
    std::string test_reps = "2,5";
    std::optional<bool> standardize;
    auto* train_cmd = app.add_subcommand("train", "Train a pipeline from a feature CSV");
    add_run_config(train_cmd);
    train_cmd->add_option("--features", input, "Feature CSV")->required();
    train_cmd->add_option("--classifier", classifier, "knn, nb, dt or svm")->capture_default_str();
    train_cmd->add_option("--train-reps", train_reps)->capture_default_str();
    train_cmd->add_option("--rate-hz", rate_hz)->capture_default_str();
    train_cmd->add_option("--standardize", standardize, "true/false; default depends on classifier");
    train_cmd->add_option("--out", out, "Pipeline file")->required();
    add_feature_flags(train_cmd, feat, false);
    add_hyper_flags(train_cmd, hp, seed);

    // evaluate
    std::string model_path;
    bool trial_vote = false;
    auto* eval_cmd = app.add_subcommand("evaluate", "Evaluate a trained pipeline on a feature CSV");
    add_run_config(eval_cmd);
    eval_cmd->add_option("--model", model_path, "Pipeline file")->required();
    eval_cmd->add_option("--features", input, "Feature CSV")->required();
    eval_cmd->add_option("--test-reps", test_reps)->capture_default_str();
    eval_cmd->add_option("--subject", subject)->capture_default_str();
    eval_cmd->add_flag("--trial-vote", trial_vote, "Majority vote per movement trial");
    eval_cmd->add_option("--out", out, "Output directory for report.csv and summary.csv")->required();

    // run and bench share the experiment flags
    std::vector<std::string> inputs;
    std::vector<int> subjects;
    bool use_synth = false;
    int synth_subjects = 1;
    std::string classifiers = "knn";
    bool confusion = false;
    std::size_t group_size = 10;
    unsigned workers = 1;
    std::size_t trials = 200;
    std::size_t max_train_rows = 20000;
    auto add_experiment_flags = [&](CLI::App* sub) {
        add_run_config(sub);
        sub->add_option("--input", inputs, "Recording CSVs, one per subject");
        sub->add_option("--subjects", subjects, "Subject ids matching --input");
        sub->add_flag("--synthetic", use_synth, "Use generated recordings");
        sub->add_option("--synthetic-subjects", synth_subjects)->capture_default_str();
        add_synth_flags(sub, synth);
        sub->add_option("--channels", channels, "Expected channel count");
        sub->add_option("--rate-hz", rate_hz)->capture_default_str();
        sub->add_option("--classifier", classifiers, "knn, nb, dt, svm (comma separated)")
            ->capture_default_str();
        sub->add_option("--train-reps", train_reps)->capture_default_str();
        sub->add_option("--test-reps", test_reps)->capture_default_str();
        sub->add_option("--standardize", standardize, "true/false; default depends on classifier");
        add_feature_flags(sub, feat, true);
        add_hyper_flags(sub, hp, seed);
    };
    auto* run_cmd = app.add_subcommand("run", "End-to-end experiment with CSV reports");
    add_experiment_flags(run_cmd);
    run_cmd->add_option("--out", out, "Output directory")->required();
    run_cmd->add_flag("--trial-vote", trial_vote, "Majority vote per movement trial");
    run_cmd->add_flag("--confusion", confusion, "Write per-subject confusion matrices");
    run_cmd->add_option("--group-size", group_size)->capture_default_str();
    run_cmd->add_option("--workers", workers, "Subjects processed concurrently")->capture_default_str();

    auto* bench_cmd = app.add_subcommand("bench", "Per-window latency benchmark");
    add_experiment_flags(bench_cmd);
    bench_cmd->add_option("--trials", trials)->capture_default_str();
    bench_cmd->add_option("--max-train-rows", max_train_rows)->capture_default_str();

    auto* presets_cmd = app.add_subcommand("presets", "List techniques, feature configs, classifiers");

    std::vector<std::string> args(argv, argv + argc);
    args = expand_run_config(std::move(args));
    std::vector<const char*> cargs;
    for (const auto& a : args) {
        cargs.push_back(a.c_str());
    }
    try {
        app.parse(static_cast<int>(cargs.size()), const_cast<char**>(cargs.data()));
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitValidation;
    }
    set_thread_count(threads);

    auto experiment_config = [&] {
        RunConfig cfg;
        cfg.inputs = inputs;
        cfg.subject_ids = subjects;
        if (use_synth) {
            synth.sample_rate_hz = rate_hz;
            synth.seed = seed;
            cfg.synthetic = synth;
            cfg.synthetic_subjects = synth_subjects;
        }
        cfg.expected_channels = channels;
        cfg.rate_hz = rate_hz;
        cfg.techniques.clear();
        for (const auto& t : split_list(feat.technique)) {
            cfg.techniques.push_back(technique_from_string(t));
        }
        cfg.feature_configs.clear();
        for (auto c : split_list(feat.config)) {
            std::replace(c.begin(), c.end(), '+', ',');
            cfg.feature_configs.push_back(c);
        }
        cfg.classifiers.clear();
        for (const auto& c : split_list(classifiers)) {
            cfg.classifiers.push_back(classifier_kind_from_string(c));
        }
        cfg.feature_params = feat.params;
        cfg.hyperparams = hp;
        cfg.split.train_repetitions = parse_repetition_set(train_reps);
        cfg.split.test_repetitions = parse_repetition_set(test_reps);
        cfg.seed = seed;
        cfg.window_ms = feat.window_ms;
        cfg.increment_ms = feat.increment_ms;
        cfg.include_rest = feat.include_rest;
        cfg.label_policy = label_policy_from_string(feat.label_policy);
        cfg.sliding_aggregation = feat.sliding_aggregation;
        cfg.standardize = standardize;
        cfg.trial_vote = trial_vote;
        cfg.write_confusion = confusion;
        cfg.group_size = group_size;
        cfg.workers = workers;
        return cfg;
    };

    if (*synth_cmd) {
        synth.sample_rate_hz = rate_hz;
        synth.seed = seed;
        synth.subject_id = subject;
        const auto rec = generate_synthetic(synth);
        write_recording(out, rec);
        std::cout << "wrote " << rec.length() << " samples x " << rec.num_channels()
                  << " channels to " << out << '\n';
    } else if (*ingest_cmd) {
        RecordingOptions opts;
        opts.expected_channels = channels;
        opts.subject_id = subject;
        opts.sample_rate_hz = rate_hz;
        const auto rec = load_recording(input, opts);
        std::set<int> stimuli(rec.stimulus().begin(), rec.stimulus().end());
        std::cout << "samples " << rec.length() << "\nchannels " << rec.num_channels()
                  << "\nduration_s " << static_cast<double>(rec.length()) / rec.sample_rate_hz()
                  << "\nstimuli " << join(stimuli) << "\nrepetitions ";
        const auto reps = rec.observed_repetitions();
        std::cout << join(std::set<int>(reps.begin(), reps.end())) << '\n';
        if (!out.empty()) {
            write_recording(out, rec);
        }
    } else if (*feat_cmd) {
        RecordingOptions opts;
        opts.expected_channels = channels;
        opts.subject_id = subject;
        opts.sample_rate_hz = rate_hz;
        const auto rec = load_recording(input, opts);
        const auto fm = featurize(rec, to_featurize(feat, rate_hz));
        write_feature_matrix(out, fm);
        std::cout << "wrote " << fm.rows() << " x " << fm.cols() << " feature matrix to " << out
                  << '\n';
    } else if (*train_cmd) {
        const auto fm = read_feature_matrix(input);
        const auto fopts = to_featurize(feat, rate_hz);
        const auto nch = channels_of(fm);
        if (fopts.features.column_meta(nch) != fm.column_meta) {
            throw ShapeError("feature CSV columns do not match configuration " +
                             fopts.features.name());
        }
        const auto train_rows = filter_reps(fm, parse_repetition_set(train_reps), "training");
        TrainOptions topts;
        topts.classifier = classifier_kind_from_string(classifier);
        topts.hyperparams = hp;
        topts.hyperparams.seed = seed;
        topts.standardize = standardize;
        const auto pipeline = train_pipeline(train_rows, fopts, nch, rate_hz, topts);
        save_pipeline(out, pipeline);
        std::cout << "trained " << to_string(topts.classifier) << " on " << train_rows.rows()
                  << " rows; saved to " << out << '\n';
    } else if (*eval_cmd) {
        const auto pipeline = load_pipeline(model_path);
        const auto fm = read_feature_matrix(input, subject);
        if (pipeline.features.column_meta(pipeline.num_channels) != fm.column_meta) {
            throw ShapeError("feature CSV columns do not match the pipeline's configuration");
        }
        const auto test = filter_reps(fm, parse_repetition_set(test_reps), "test");
        auto predicted = pipeline.predict(test);
        if (trial_vote) {
            predicted = vote_per_trial(predicted, test.labels, test.repetitions);
        }
        std::vector<int> classes = pipeline.classes();
        classes.insert(classes.end(), test.labels.begin(), test.labels.end());
        std::sort(classes.begin(), classes.end());
        classes.erase(std::unique(classes.begin(), classes.end()), classes.end());
        const std::vector<EvalReport> reports{
            make_report(subject, std::string(to_string(pipeline.technique)), pipeline.features.name(),
                        std::string(to_string(pipeline.model->kind())), predicted, test.labels,
                        classes, pipeline.train_rows)};
        std::filesystem::create_directories(out);
        std::ofstream rep(std::filesystem::path(out) / "report.csv");
        write_report_csv(rep, reports);
        std::ofstream sum(std::filesystem::path(out) / "summary.csv");
        write_summary_csv(sum, group_average(reports));
        std::cout << "accuracy " << format_pct(reports.front().accuracy_pct) << "% on "
                  << test.rows() << " rows\n";
    } else if (*run_cmd) {
        auto cfg = experiment_config();
        cfg.out_dir = out;
        const auto result = run_experiment(cfg);
        write_report_csv(std::cout, result.reports);
    } else if (*bench_cmd) {
        const auto stats = benchmark_latency(experiment_config(), trials, max_train_rows);
        std::cout << format_latency(stats);
        return stats.pass ? 0 : kExitValidation;
    } else if (*presets_cmd) {
        std::cout << list_presets();
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    try {
        return run_cli(argc, argv);
    } catch (const emgpr::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        switch (e.error_class()) {
        case emgpr::ErrorClass::validation: return kExitValidation;
        case emgpr::ErrorClass::data: return kExitData;
        case emgpr::ErrorClass::internal: return kExitInternal;
        }
        return kExitInternal;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return kExitInternal;
    }
}
