#include "emgpr/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "emgpr/error.hpp"
#include "emgpr/rng.hpp"
#include "emgpr/text.hpp"

namespace emgpr {

Recording::Recording(int subject_id, std::string source_tag, double sample_rate_hz,
                     Matrix channels, std::vector<int> stimulus, std::vector<int> repetition)
    : subject_id_(subject_id),
      source_tag_(std::move(source_tag)),
      sample_rate_hz_(sample_rate_hz),
      channels_(std::move(channels)),
      stimulus_(std::move(stimulus)),
      repetition_(std::move(repetition)) {
    if (!(sample_rate_hz_ > 0.0) || !std::isfinite(sample_rate_hz_)) {
        throw ValidationError("sample rate must be positive");
    }
    if (channels_.rows() == 0) {
        throw DataError("recording has no samples");
    }
    if (channels_.cols() == 0) {
        throw ChannelCountError("recording has no channels");
    }
    if (stimulus_.size() != channels_.rows() || repetition_.size() != channels_.rows()) {
        throw ShapeError("stimulus/repetition length differs from sample count");
    }
    for (std::size_t i = 0; i < stimulus_.size(); ++i) {
        if (stimulus_[i] < 0 || repetition_[i] < 0) {
            throw DataError("negative label at sample " + std::to_string(i));
        }
    }
}

std::vector<int> Recording::observed_repetitions() const {
    std::vector<int> reps;
    for (int r : repetition_) {
        if (r > 0 && std::find(reps.begin(), reps.end(), r) == reps.end()) {
            reps.push_back(r);
        }
    }
    std::sort(reps.begin(), reps.end());
    return reps;
}

// ---------------------------------------------------------------------------
// CSV
// ---------------------------------------------------------------------------

Recording load_recording(std::istream& in, const RecordingOptions& opts) {
    std::string line;
    if (!std::getline(in, line)) {
        throw FormatError("recording CSV is empty (header required)");
    }
    const auto header = text::split(text::trim(line), ',');
    if (header.size() < 4 || text::trim(header.front()) != "sample_index" ||
        text::trim(header[header.size() - 2]) != "stimulus" ||
        text::trim(header.back()) != "repetition") {
        throw FormatError(
            "header must be sample_index,ch1,...,chC,stimulus,repetition (line 1)");
    }
    const std::size_t channels = header.size() - 3;
    for (std::size_t c = 0; c < channels; ++c) {
        if (text::trim(header[c + 1]) != "ch" + std::to_string(c + 1)) {
            throw FormatError("header column " + std::to_string(c + 2) + " should be ch" +
                              std::to_string(c + 1) + " (line 1)");
        }
    }
    if (opts.expected_channels && *opts.expected_channels != channels) {
        throw ChannelCountError("expected " + std::to_string(*opts.expected_channels) +
                                " channels but file has " + std::to_string(channels));
    }

    Matrix samples(0, channels);
    std::vector<int> stimulus;
    std::vector<int> repetition;
    std::vector<double> row(channels);
    std::size_t line_no = 1;
    long long expected_index = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto trimmed = text::trim(line);
        if (trimmed.empty()) {
            continue;
        }
        const auto fields = text::split(trimmed, ',');
        const std::string where = "line " + std::to_string(line_no);
        if (fields.size() != channels + 3) {
            throw FormatError(where + ": expected " + std::to_string(channels + 3) +
                              " columns, found " + std::to_string(fields.size()));
        }
        const auto index = text::parse_int(fields.front(), where);
        if (index != expected_index) {
            throw FormatError(where + ": sample_index " + std::to_string(index) +
                              " breaks the 0-based consecutive sequence");
        }
        ++expected_index;
        for (std::size_t c = 0; c < channels; ++c) {
            row[c] = text::parse_double(fields[c + 1], where);
        }
        const auto stim = text::parse_int(fields[channels + 1], where);
        const auto rep = text::parse_int(fields[channels + 2], where);
        if (stim < 0 || rep < 0) {
            throw ParseError(where + ": stimulus and repetition must be nonnegative");
        }
        samples.append_row(row);
        stimulus.push_back(static_cast<int>(stim));
        repetition.push_back(static_cast<int>(rep));
    }
    if (samples.rows() == 0) {
        throw FormatError("recording CSV has a header but no data rows");
    }
    return Recording(opts.subject_id, opts.source_tag, opts.sample_rate_hz, std::move(samples),
                     std::move(stimulus), std::move(repetition));
}

Recording load_recording(const std::string& path, const RecordingOptions& opts) {
    std::ifstream in(path);
    if (!in) {
        throw DataError("cannot open recording '" + path + "'");
    }
    return load_recording(in, opts);
}

void write_recording(std::ostream& out, const Recording& rec) {
    const std::size_t channels = rec.num_channels();
    std::string line = "sample_index";
    for (std::size_t c = 0; c < channels; ++c) {
        line += ",ch" + std::to_string(c + 1);
    }
    line += ",stimulus,repetition\n";
    out << line;
    for (std::size_t i = 0; i < rec.length(); ++i) {
        line = std::to_string(i);
        for (double v : rec.channels().row(i)) {
            line += ',';
            line += text::format_double(v);
        }
        line += ',';
        line += std::to_string(rec.stimulus()[i]);
        line += ',';
        line += std::to_string(rec.repetition()[i]);
        line += '\n';
        out << line;
    }
}

void write_recording(const std::string& path, const Recording& rec) {
    std::ofstream out(path);
    if (!out) {
        throw DataError("cannot write recording '" + path + "'");
    }
    write_recording(out, rec);
    if (!out) {
        throw DataError("write failed for '" + path + "'");
    }
}

// ---------------------------------------------------------------------------
// Synthetic data
// ---------------------------------------------------------------------------

namespace {

std::size_t duration_samples(double seconds, double rate_hz) {
    return static_cast<std::size_t>(std::llround(seconds * rate_hz));
}

} // namespace

void SyntheticSpec::validate() const {
    if (num_classes < 2) {
        throw ValidationError("synthetic spec needs at least 2 classes");
    }
    if (num_repetitions < 1) {
        throw ValidationError("synthetic spec needs at least 1 repetition");
    }
    if (num_channels < 1) {
        throw ValidationError("synthetic spec needs at least 1 channel");
    }
    if (!(movement_duration_s > 0.0) || !(rest_duration_s > 0.0)) {
        throw ValidationError("synthetic durations must be positive");
    }
    if (!(sample_rate_hz > 0.0) || !std::isfinite(sample_rate_hz)) {
        throw ValidationError("synthetic sample rate must be positive");
    }
    if (!(noise_level >= 0.0) || !std::isfinite(noise_level)) {
        throw ValidationError("synthetic noise level must be nonnegative");
    }
    if (duration_samples(movement_duration_s, sample_rate_hz) == 0 ||
        duration_samples(rest_duration_s, sample_rate_hz) == 0) {
        throw ValidationError("synthetic durations round to zero samples");
    }
}

std::vector<std::vector<double>> synthetic_amplitude_profiles(const SyntheticSpec& spec) {
    spec.validate();
    // Profiles come from their own stream so they do not shift with signal length.
    Rng rng(spec.seed ^ 0x9e3779b97f4a7c15ULL);
    const auto classes = static_cast<std::size_t>(spec.num_classes);
    const auto channels = static_cast<std::size_t>(spec.num_channels);
    std::vector<std::vector<double>> profiles;
    while (profiles.size() < classes) {
        std::vector<double> p(channels);
        for (auto& a : p) {
            a = rng.uniform(0.2, 2.0);
        }
        const bool distinct = std::none_of(profiles.begin(), profiles.end(),
                                           [&](const auto& q) { return q == p; });
        if (distinct) {
            profiles.push_back(std::move(p));
        }
    }
    return profiles;
}

Recording generate_synthetic(const SyntheticSpec& spec) {
    spec.validate();
    const auto profiles = synthetic_amplitude_profiles(spec);
    const auto channels = static_cast<std::size_t>(spec.num_channels);
    const std::size_t move = duration_samples(spec.movement_duration_s, spec.sample_rate_hz);
    const std::size_t rest = duration_samples(spec.rest_duration_s, spec.sample_rate_hz);
    const std::size_t total = static_cast<std::size_t>(spec.num_repetitions) *
                              static_cast<std::size_t>(spec.num_classes) * (move + rest);

    Matrix samples(total, channels);
    std::vector<int> stimulus(total, 0);
    std::vector<int> repetition(total, 0);
    Rng rng(spec.seed);
    std::size_t i = 0;
    for (int r = 1; r <= spec.num_repetitions; ++r) {
        for (int k = 1; k <= spec.num_classes; ++k) {
            const auto& profile = profiles[static_cast<std::size_t>(k - 1)];
            for (std::size_t s = 0; s < move; ++s, ++i) {
                auto row = samples.row(i);
                for (std::size_t c = 0; c < channels; ++c) {
                    row[c] = profile[c] * rng.normal() + spec.noise_level * rng.normal();
                }
                stimulus[i] = k;
                repetition[i] = r;
            }
            for (std::size_t s = 0; s < rest; ++s, ++i) {
                auto row = samples.row(i);
                for (std::size_t c = 0; c < channels; ++c) {
                    row[c] = spec.noise_level * rng.normal();
                }
            }
        }
    }
    return Recording(spec.subject_id, "synthetic", spec.sample_rate_hz, std::move(samples),
                     std::move(stimulus), std::move(repetition));
}

// ---------------------------------------------------------------------------
// Splits
// ---------------------------------------------------------------------------

void SplitSpec::validate() const {
    if (train_repetitions.empty() || test_repetitions.empty()) {
        throw SplitError("train and test repetition sets must both be nonempty");
    }
    for (int r : train_repetitions) {
        if (test_repetitions.count(r) != 0) {
            throw SplitError("repetition " + std::to_string(r) + " is in both train and test");
        }
    }
}

SplitResult split_by_repetition(const FeatureMatrix& rows, const SplitSpec& split) {
    split.validate();
    std::set<int> observed(rows.repetitions.begin(), rows.repetitions.end());
    for (const auto* set : {&split.train_repetitions, &split.test_repetitions}) {
        for (int r : *set) {
            if (observed.count(r) == 0) {
                throw SplitError("repetition " + std::to_string(r) + " does not occur in the data");
            }
        }
    }
    SplitResult out;
    out.train = rows.filter_rows(
        [&](std::size_t i) { return split.train_repetitions.count(rows.repetitions[i]) != 0; });
    out.test = rows.filter_rows(
        [&](std::size_t i) { return split.test_repetitions.count(rows.repetitions[i]) != 0; });
    if (out.train.rows() == 0 || out.test.rows() == 0) {
        throw SplitError("split leaves an empty train or test set");
    }
    return out;
}

std::set<int> parse_repetition_set(const std::string& text) {
    std::set<int> out;
    for (auto tok : text::split(text, ',')) {
        tok = text::trim(tok);
        if (tok.empty()) {
            continue;
        }
        const auto v = text::parse_int(tok, "repetition list");
        if (v < 1) {
            throw ValidationError("repetition indices start at 1");
        }
        out.insert(static_cast<int>(v));
    }
    return out;
}

} // namespace emgpr
