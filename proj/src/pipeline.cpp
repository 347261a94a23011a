#include "emgpr/pipeline.hpp"

#include <fstream>
#include <istream>
#include <ostream>

#include "emgpr/error.hpp"
#include "emgpr/parallel.hpp"
#include "emgpr/text.hpp"

namespace emgpr {

FeaturizeOptions featurize_options(Technique technique, const FeatureConfig& features,
                                   double rate_hz, LabelPolicy policy) {
    FeaturizeOptions opts;
    opts.technique = technique;
    opts.regime = make_baseline_spec(technique, rate_hz);
    opts.regime.window.label_policy = policy;
    opts.features = features;
    return opts;
}

FeatureMatrix featurize(const Recording& rec, const FeaturizeOptions& opts) {
    const auto refs = plan_windows(rec, opts.regime.window);
    const std::size_t w = opts.regime.window.length_samples(rec.sample_rate_hz());
    const std::size_t channels = rec.num_channels();

    // Each output row is described by the run of planned windows it averages.
    struct Group {
        std::size_t first;
        std::size_t count;
        int label;
        int repetition;
    };
    std::vector<Group> groups;
    if (!opts.regime.aggregation) {
        groups.reserve(refs.size());
        for (std::size_t i = 0; i < refs.size(); ++i) {
            groups.push_back({i, 1, refs[i].label, refs[i].repetition});
        }
    } else {
        const auto& agg = *opts.regime.aggregation;
        if (agg.n < 1) {
            throw SpecError("aggregation size must be at least 1");
        }
        const std::size_t n = agg.n;
        if (refs.size() >= n) {
            const std::size_t count = agg.sliding ? refs.size() - n + 1 : refs.size() / n;
            for (std::size_t t = 0; t < count; ++t) {
                const std::size_t first = agg.sliding ? t : t * n;
                const auto& last = refs[first + n - 1];
                bool same = true;
                for (std::size_t i = first; i < first + n; ++i) {
                    same = same && refs[i].label == last.label;
                }
                if (same) {
                    groups.push_back({first, n, last.label, last.repetition});
                }
            }
        }
    }
    if (!opts.include_rest) {
        std::erase_if(groups, [](const Group& g) { return g.label == 0; });
    }
    if (groups.empty()) {
        throw DataError("recording yields no labelled windows");
    }

    FeatureMatrix fm;
    fm.subject_id = rec.subject_id();
    fm.column_meta = opts.features.column_meta(channels);
    fm.values = Matrix(groups.size(), fm.column_meta.size());
    fm.labels.resize(groups.size());
    fm.repetitions.resize(groups.size());
    parallel_for(groups.size(), [&](std::size_t begin, std::size_t end) {
        std::vector<Segment> members;
        for (std::size_t g = begin; g < end; ++g) {
            const auto& group = groups[g];
            members.resize(group.count);
            for (std::size_t i = 0; i < group.count; ++i) {
                materialize_into(rec, refs[group.first + i], w, members[i]);
            }
            if (group.count == 1) {
                extract_into(members.front(), opts.features, fm.values.row(g));
            } else {
                const auto mean = aggregate_group(members);
                extract_into(*mean, opts.features, fm.values.row(g));
            }
            fm.labels[g] = group.label;
            fm.repetitions[g] = group.repetition;
        }
    });
    return fm;
}

bool default_standardize(ClassifierKind kind) { return kind != ClassifierKind::dt; }

std::vector<int> TrainedPipeline::predict(const FeatureMatrix& rows) const {
    if (!standardizer) {
        return model->predict(rows.values);
    }
    return model->predict(apply_standardizer(*standardizer, rows.values));
}

int TrainedPipeline::predict_segment(const Segment& segment) const {
    auto row = extract(segment, features);
    if (standardizer) {
        standardizer->apply_inplace(row);
    }
    return model->predict_one(row);
}

TrainedPipeline train_pipeline(const FeatureMatrix& train, const FeaturizeOptions& featurized,
                               std::size_t num_channels, double sample_rate_hz,
                               const TrainOptions& opts) {
    train.check_consistent();
    if (train.cols() != featurized.features.row_length(num_channels)) {
        throw ShapeError("feature matrix has " + std::to_string(train.cols()) +
                         " columns but configuration " + featurized.features.name() + " on " +
                         std::to_string(num_channels) + " channels needs " +
                         std::to_string(featurized.features.row_length(num_channels)));
    }
    TrainedPipeline p;
    p.technique = featurized.technique;
    p.regime = featurized.regime;
    p.features = featurized.features;
    p.num_channels = num_channels;
    p.sample_rate_hz = sample_rate_hz;
    p.train_rows = train.rows();
    if (opts.standardize.value_or(default_standardize(opts.classifier))) {
        p.standardizer = fit_standardizer(train.values);
        p.model = emgpr::train(opts.classifier, apply_standardizer(*p.standardizer, train.values),
                        train.labels, opts.hyperparams);
    } else {
        p.model = emgpr::train(opts.classifier, train.values, train.labels, opts.hyperparams);
    }
    return p;
}

// ---------------------------------------------------------------------------
// Persistence
// ---------------------------------------------------------------------------

void save_pipeline(std::ostream& out, const TrainedPipeline& p) {
    text::TokenWriter w(out);
    w.word("emgpr-pipeline").integer(1).endl();
    w.word("technique").word(to_string(p.technique)).endl();
    const auto& win = p.regime.window;
    w.word("window").number(win.length_ms).number(win.increment_ms).word(to_string(win.mode))
        .word(to_string(win.label_policy));
    if (win.latency_limit_ms) {
        w.number(*win.latency_limit_ms);
    } else {
        w.word("none");
    }
    w.endl();
    if (p.regime.aggregation) {
        w.word("aggregation").count(p.regime.aggregation->n)
            .word(p.regime.aggregation->sliding ? "sliding" : "disjoint").endl();
    } else {
        w.word("aggregation").word("none").endl();
    }
    const auto& fp = p.features.params();
    w.word("features").word(p.features.name()).count(p.features.kinds().size());
    for (auto k : p.features.kinds()) {
        w.word(to_string(k));
    }
    w.number(fp.zc_threshold).number(fp.ssc_threshold).count(fp.hist_bins).number(fp.hist_sigma_span)
        .endl();
    w.word("channels").count(p.num_channels).endl();
    w.word("rate").number(p.sample_rate_hz).endl();
    w.word("train_rows").count(p.train_rows).endl();
    if (p.standardizer) {
        w.word("standardizer").number(p.standardizer->epsilon).count(p.standardizer->size()).endl();
        for (double v : p.standardizer->mean) {
            w.number(v);
        }
        w.endl();
        for (double v : p.standardizer->stddev) {
            w.number(v);
        }
        w.endl();
    } else {
        w.word("standardizer").word("none").endl();
    }
    save_classifier(out, *p.model);
    w.word("end-pipeline").endl();
}

void save_pipeline(const std::string& path, const TrainedPipeline& p) {
    std::ofstream out(path);
    if (!out) {
        throw DataError("cannot write pipeline '" + path + "'");
    }
    save_pipeline(out, p);
    if (!out) {
        throw DataError("write failed for '" + path + "'");
    }
}

TrainedPipeline load_pipeline(std::istream& in) {
    text::TokenReader r(in);
    r.expect("emgpr-pipeline");
    if (r.integer() != 1) {
        throw FormatError("unsupported pipeline format version");
    }
    TrainedPipeline p;
    try {
        r.expect("technique");
        p.technique = technique_from_string(r.word());
        r.expect("window");
        auto& win = p.regime.window;
        win.length_ms = r.number();
        win.increment_ms = r.number();
        win.mode = window_mode_from_string(r.word());
        win.label_policy = label_policy_from_string(r.word());
        const auto limit = r.word();
        win.latency_limit_ms = limit == "none" ? std::nullopt
                                               : std::optional(text::parse_double(limit, "pipeline"));
        r.expect("aggregation");
        const auto agg = r.word();
        if (agg != "none") {
            AggregationSpec spec;
            spec.n = static_cast<std::size_t>(text::parse_int(agg, "pipeline aggregation"));
            spec.sliding = r.word() == "sliding";
            p.regime.aggregation = spec;
        }
        r.expect("features");
        const auto name = r.word();
        std::vector<FeatureKind> kinds(r.count());
        for (auto& k : kinds) {
            k = feature_kind_from_string(r.word());
        }
        FeatureParams fp;
        fp.zc_threshold = r.number();
        fp.ssc_threshold = r.number();
        fp.hist_bins = r.count();
        fp.hist_sigma_span = r.number();
        p.features = FeatureConfig(name, std::move(kinds), fp);
    } catch (const ValidationError& e) {
        throw FormatError(std::string("bad pipeline header: ") + e.what());
    }
    r.expect("channels");
    p.num_channels = r.count();
    r.expect("rate");
    p.sample_rate_hz = r.number();
    r.expect("train_rows");
    p.train_rows = r.count();
    r.expect("standardizer");
    const auto st = r.word();
    if (st != "none") {
        StandardizationParams params;
        params.epsilon = text::parse_double(st, "pipeline standardizer");
        const auto n = r.count();
        params.mean.resize(n);
        params.stddev.resize(n);
        for (auto& v : params.mean) {
            v = r.number();
        }
        for (auto& v : params.stddev) {
            v = r.number();
        }
        p.standardizer = std::move(params);
    }
    p.model = load_classifier(in);
    r.expect("end-pipeline");
    if (p.model->num_features() != p.features.row_length(p.num_channels)) {
        throw FormatError("pipeline model width does not match its feature configuration");
    }
    return p;
}

TrainedPipeline load_pipeline(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw DataError("cannot open pipeline '" + path + "'");
    }
    return load_pipeline(in);
}

} // namespace emgpr
