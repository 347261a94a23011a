#include "emgpr/features.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "emgpr/error.hpp"
#include "emgpr/text.hpp"

namespace emgpr {

namespace {

void check_window(std::span<const double> x) {
    if (x.size() < 2) {
        throw InputTooShortError("feature window needs at least 2 samples, got " +
                                 std::to_string(x.size()));
    }
    for (double v : x) {
        if (!std::isfinite(v)) {
            throw DataError("non-finite sample in feature window");
        }
    }
}

double mean_abs(std::span<const double> x) {
    double sum = 0.0;
    for (double v : x) {
        sum += std::abs(v);
    }
    return sum / static_cast<double>(x.size());
}

} // namespace

void FeatureParams::validate() const {
    if (hist_bins < 1) {
        throw ValidationError("histogram needs at least one bin");
    }
    if (!(zc_threshold >= 0.0) || !(ssc_threshold >= 0.0)) {
        throw ValidationError("ZC/SSC thresholds must be nonnegative");
    }
    if (!(hist_sigma_span > 0.0) || !std::isfinite(hist_sigma_span)) {
        throw ValidationError("histogram sigma span must be positive");
    }
}

double mav(std::span<const double> x) {
    check_window(x);
    return mean_abs(x);
}

double mavs(std::span<const double> x) {
    check_window(x);
    const std::size_t half = x.size() / 2;
    return mean_abs(x.subspan(half)) - mean_abs(x.first(half));
}

double wl(std::span<const double> x) {
    check_window(x);
    double sum = 0.0;
    for (std::size_t i = 1; i < x.size(); ++i) {
        sum += std::abs(x[i] - x[i - 1]);
    }
    return sum;
}

std::size_t zc(std::span<const double> x, double threshold) {
    check_window(x);
    std::size_t count = 0;
    for (std::size_t i = 1; i < x.size(); ++i) {
        if (x[i - 1] * x[i] < 0.0 && std::abs(x[i - 1] - x[i]) >= threshold) {
            ++count;
        }
    }
    return count;
}

std::size_t ssc(std::span<const double> x, double threshold) {
    check_window(x);
    std::size_t count = 0;
    for (std::size_t i = 1; i + 1 < x.size(); ++i) {
        const double product = (x[i] - x[i - 1]) * (x[i] - x[i + 1]);
        if (product > 0.0 && product >= threshold) {
            ++count;
        }
    }
    return count;
}

double rms(std::span<const double> x) {
    check_window(x);
    double sum = 0.0;
    for (double v : x) {
        sum += v * v;
    }
    return std::sqrt(sum / static_cast<double>(x.size()));
}

void hist_into(std::span<const double> x, std::size_t bins, double sigma_span,
               std::span<double> out) {
    check_window(x);
    if (bins < 1 || out.size() != bins) {
        throw ValidationError("histogram output must have hist_bins entries");
    }
    std::fill(out.begin(), out.end(), 0.0);
    const double m = static_cast<double>(x.size());
    long double mean = 0.0L;
    for (double v : x) {
        mean += v;
    }
    mean /= x.size();
    long double ss = 0.0L;
    for (double v : x) {
        ss += (v - mean) * (v - mean);
    }
    const bool constant = std::all_of(x.begin(), x.end(), [&](double v) { return v == x[0]; });
    const auto sigma = static_cast<double>(std::sqrt(ss / x.size()));
    if (constant || sigma == 0.0) {
        out[bins / 2] = m;
        return;
    }
    const double lo = -sigma_span * sigma;
    const double scale = static_cast<double>(bins) / (2.0 * sigma_span * sigma);
    const auto last = static_cast<double>(bins - 1);
    for (double v : x) {
        const double pos = std::floor((v - lo) * scale);
        const double idx = std::clamp(pos, 0.0, last);
        out[static_cast<std::size_t>(idx)] += 1.0;
    }
}

std::vector<double> hist(std::span<const double> x, std::size_t bins, double sigma_span) {
    if (bins < 1) {
        throw ValidationError("histogram needs at least one bin");
    }
    std::vector<double> out(bins);
    hist_into(x, bins, sigma_span, out);
    return out;
}

// ---------------------------------------------------------------------------
// Configurations
// ---------------------------------------------------------------------------

FeatureConfig::FeatureConfig(std::string name, std::vector<FeatureKind> kinds, FeatureParams params)
    : name_(std::move(name)), params_(params) {
    params_.validate();
    for (auto k : kAllFeatureKinds) {
        if (std::find(kinds.begin(), kinds.end(), k) != kinds.end()) {
            kinds_.push_back(k);
        }
    }
    if (kinds_.empty()) {
        throw ValidationError("feature configuration '" + name_ + "' selects no features");
    }
}

std::size_t FeatureConfig::dimension(FeatureKind kind) const {
    return kind == FeatureKind::HIST ? params_.hist_bins : 1;
}

std::size_t FeatureConfig::per_channel() const {
    std::size_t n = 0;
    for (auto k : kinds_) {
        n += dimension(k);
    }
    return n;
}

std::vector<ColumnMeta> FeatureConfig::column_meta(std::size_t channels) const {
    std::vector<ColumnMeta> meta;
    meta.reserve(row_length(channels));
    for (std::size_t c = 0; c < channels; ++c) {
        for (auto k : kinds_) {
            if (k == FeatureKind::HIST) {
                for (std::size_t b = 0; b < params_.hist_bins; ++b) {
                    meta.push_back({c, k, b});
                }
            } else {
                meta.push_back({c, k, std::nullopt});
            }
        }
    }
    return meta;
}

std::string FeatureConfig::describe() const {
    std::string s;
    for (auto k : kinds_) {
        if (!s.empty()) {
            s += ' ';
        }
        s += to_string(k);
    }
    return s;
}

FeatureConfig feature_preset(std::string_view name, FeatureParams params) {
    using K = FeatureKind;
    std::vector<FeatureKind> kinds;
    if (name == "C1") {
        kinds = {K::MAV, K::MAVS, K::WL, K::SSC, K::ZC, K::HIST, K::RMS};
    } else if (name == "C2") {
        kinds = {K::RMS};
    } else if (name == "C3") {
        kinds = {K::WL};
    } else if (name == "C4") {
        kinds = {K::WL, K::RMS};
    } else if (name == "C5") {
        kinds = {K::WL, K::ZC, K::RMS};
    } else if (name == "C6") {
        kinds = {K::WL, K::SSC};
    } else if (name == "C7") {
        kinds = {K::MAV, K::MAVS, K::WL, K::SSC, K::ZC, K::RMS};
    } else {
        throw ValidationError("unknown feature preset '" + std::string(name) + "' (C1..C7)");
    }
    return FeatureConfig(std::string(name), std::move(kinds), params);
}

std::vector<std::string> feature_preset_names() {
    return {"C1", "C2", "C3", "C4", "C5", "C6", "C7"};
}

FeatureConfig parse_feature_config(std::string_view text, FeatureParams params) {
    const auto trimmed = text::trim(text);
    const auto names = feature_preset_names();
    if (std::find(names.begin(), names.end(), trimmed) != names.end()) {
        return feature_preset(trimmed, params);
    }
    std::vector<FeatureKind> kinds;
    std::string normalized(trimmed);
    std::replace(normalized.begin(), normalized.end(), ',', ' ');
    std::istringstream in(normalized);
    std::string tok;
    std::string name;
    while (in >> tok) {
        try {
            kinds.push_back(feature_kind_from_string(tok));
        } catch (const ValidationError&) {
            throw ValidationError("unknown feature config '" + std::string(trimmed) +
                                  "' (a preset C1..C7 or a list of MAV, MAVS, WL, SSC, ZC, HIST, RMS)");
        }
        name += name.empty() ? tok : "+" + tok;
    }
    return FeatureConfig(name, std::move(kinds), params);
}

void extract_into(const Segment& segment, const FeatureConfig& config, std::span<double> out) {
    const std::size_t channels = segment.num_channels;
    if (out.size() != config.row_length(channels)) {
        throw ShapeError("feature row buffer has the wrong width");
    }
    if (segment.samples.size() != channels * segment.length) {
        throw ShapeError("segment sample buffer does not match its C x W shape");
    }
    const auto& p = config.params();
    std::size_t col = 0;
    for (std::size_t c = 0; c < channels; ++c) {
        const auto x = segment.channel(c);
        for (auto kind : config.kinds()) {
            try {
                switch (kind) {
                case FeatureKind::MAV: out[col++] = mav(x); break;
                case FeatureKind::MAVS: out[col++] = mavs(x); break;
                case FeatureKind::WL: out[col++] = wl(x); break;
                case FeatureKind::SSC:
                    out[col++] = static_cast<double>(ssc(x, p.ssc_threshold));
                    break;
                case FeatureKind::ZC: out[col++] = static_cast<double>(zc(x, p.zc_threshold)); break;
                case FeatureKind::HIST:
                    hist_into(x, p.hist_bins, p.hist_sigma_span, out.subspan(col, p.hist_bins));
                    col += p.hist_bins;
                    break;
                case FeatureKind::RMS: out[col++] = rms(x); break;
                }
            } catch (const InputTooShortError& e) {
                throw InputTooShortError("channel " + std::to_string(c + 1) + ", " +
                                         std::string(to_string(kind)) + ": " + e.what());
            } catch (const DataError& e) {
                throw DataError("channel " + std::to_string(c + 1) + ", " +
                                std::string(to_string(kind)) + ": " + e.what());
            }
        }
    }
}

std::vector<double> extract(const Segment& segment, const FeatureConfig& config) {
    std::vector<double> row(config.row_length(segment.num_channels));
    extract_into(segment, config, row);
    return row;
}

FeatureMatrix build_matrix(std::span<const Segment> segments, const FeatureConfig& config,
                           int subject_id) {
    if (segments.empty()) {
        throw DataError("cannot build a feature matrix from zero segments");
    }
    const std::size_t channels = segments.front().num_channels;
    FeatureMatrix fm;
    fm.subject_id = subject_id;
    fm.column_meta = config.column_meta(channels);
    fm.values = Matrix(segments.size(), fm.column_meta.size());
    fm.labels.reserve(segments.size());
    fm.repetitions.reserve(segments.size());
    for (std::size_t t = 0; t < segments.size(); ++t) {
        if (segments[t].num_channels != channels) {
            throw ShapeError("segments differ in channel count");
        }
        extract_into(segments[t], config, fm.values.row(t));
        fm.labels.push_back(segments[t].label);
        fm.repetitions.push_back(segments[t].repetition);
    }
    return fm;
}

} // namespace emgpr
