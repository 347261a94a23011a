#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "emgpr/feature_matrix.hpp"
#include "emgpr/matrix.hpp"

namespace emgpr {

inline constexpr double kDefaultSampleRateHz = 2000.0;

/// A multi-channel sEMG recording with per-sample stimulus and repetition labels.
///
/// Samples are stored row-major (L x C). Immutable once built; construct
/// through the checked constructor or the loader/generator.
class Recording {
public:
    Recording() = default;
    Recording(int subject_id, std::string source_tag, double sample_rate_hz,
              Matrix channels, std::vector<int> stimulus, std::vector<int> repetition);

    int subject_id() const noexcept { return subject_id_; }
    const std::string& source_tag() const noexcept { return source_tag_; }
    double sample_rate_hz() const noexcept { return sample_rate_hz_; }
    std::size_t length() const noexcept { return channels_.rows(); }
    std::size_t num_channels() const noexcept { return channels_.cols(); }

    const Matrix& channels() const noexcept { return channels_; }
    const std::vector<int>& stimulus() const noexcept { return stimulus_; }
    const std::vector<int>& repetition() const noexcept { return repetition_; }

    /// Distinct nonzero repetition indices, ascending.
    std::vector<int> observed_repetitions() const;

    friend bool operator==(const Recording&, const Recording&) = default;

private:
    int subject_id_ = 0;
    std::string source_tag_;
    double sample_rate_hz_ = kDefaultSampleRateHz;
    Matrix channels_;
    std::vector<int> stimulus_;
    std::vector<int> repetition_;
};

struct RecordingOptions {
    std::optional<std::size_t> expected_channels;
    int subject_id = 1;
    double sample_rate_hz = kDefaultSampleRateHz;
    std::string source_tag = "csv";
};

/// Reads the canonical `sample_index,ch1..chC,stimulus,repetition` CSV.
Recording load_recording(std::istream& in, const RecordingOptions& opts = {});
Recording load_recording(const std::string& path, const RecordingOptions& opts = {});

void write_recording(std::ostream& out, const Recording& rec);
void write_recording(const std::string& path, const Recording& rec);

struct SyntheticSpec {
    int num_classes = 17;
    int num_repetitions = 6;
    double movement_duration_s = 5.0;
    double rest_duration_s = 3.0;
    int num_channels = 12;
    double sample_rate_hz = kDefaultSampleRateHz;
    double noise_level = 0.05;
    std::uint64_t seed = 0;
    int subject_id = 1;

    void validate() const;
};

/// Per-class, per-channel standard deviation used by the generator.
std::vector<std::vector<double>> synthetic_amplitude_profiles(const SyntheticSpec& spec);

/// Protocol-shaped recording: for each repetition, each class moves then rests.
Recording generate_synthetic(const SyntheticSpec& spec);

struct SplitSpec {
    std::set<int> train_repetitions{1, 3, 4, 6};
    std::set<int> test_repetitions{2, 5};

    void validate() const;
};

struct SplitResult {
    FeatureMatrix train;
    FeatureMatrix test;
};

/// Partitions rows by repetition; rows in neither set are dropped.
SplitResult split_by_repetition(const FeatureMatrix& rows, const SplitSpec& split);

/// Parses "1,3,4,6" into a set.
std::set<int> parse_repetition_set(const std::string& text);

} // namespace emgpr
