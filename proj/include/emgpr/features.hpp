#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "emgpr/feature_matrix.hpp"
#include "emgpr/windowing.hpp"

namespace emgpr {

struct FeatureParams {
    double zc_threshold = 0.0;
    double ssc_threshold = 0.0;
    std::size_t hist_bins = 20;
    double hist_sigma_span = 3.0;

    void validate() const;

    friend bool operator==(const FeatureParams&, const FeatureParams&) = default;
};

// Per-channel features. Each throws InputTooShortError for fewer than two
// samples and DataError for non-finite input.

/// Mean absolute value.
double mav(std::span<const double> x);
/// MAV of the second half minus MAV of the first half (first half = floor(M/2) samples).
double mavs(std::span<const double> x);
/// Waveform length: total absolute first difference.
double wl(std::span<const double> x);
/// Sign changes between consecutive samples whose step is at least `threshold`.
std::size_t zc(std::span<const double> x, double threshold = 0.0);
/// Strict local extrema whose slope product is at least `threshold`.
std::size_t ssc(std::span<const double> x, double threshold = 0.0);
double rms(std::span<const double> x);

/// Amplitude histogram over [-span*sigma, +span*sigma] in `bins` equal bins.
///
/// Bins are half-open except the last; out-of-range samples clamp to the end
/// bins. A zero-variance window puts every sample in bin floor(bins/2).
std::vector<double> hist(std::span<const double> x, std::size_t bins = 20, double sigma_span = 3.0);
void hist_into(std::span<const double> x, std::size_t bins, double sigma_span, std::span<double> out);

/// An ordered selection of feature kinds plus their parameters.
class FeatureConfig {
public:
    FeatureConfig(std::string name, std::vector<FeatureKind> kinds, FeatureParams params = {});

    const std::string& name() const noexcept { return name_; }
    /// Kinds in canonical order (MAV, MAVS, WL, SSC, ZC, HIST, RMS).
    const std::vector<FeatureKind>& kinds() const noexcept { return kinds_; }
    const FeatureParams& params() const noexcept { return params_; }

    std::size_t dimension(FeatureKind kind) const;
    /// Features per channel.
    std::size_t per_channel() const;
    std::size_t row_length(std::size_t channels) const { return per_channel() * channels; }
    std::vector<ColumnMeta> column_meta(std::size_t channels) const;

    /// Space-separated kind list, e.g. "WL ZC RMS".
    std::string describe() const;

    friend bool operator==(const FeatureConfig&, const FeatureConfig&) = default;

private:
    std::string name_;
    std::vector<FeatureKind> kinds_;
    FeatureParams params_;
};

/// Named presets C1..C7.
FeatureConfig feature_preset(std::string_view name, FeatureParams params = {});
std::vector<std::string> feature_preset_names();

/// Parses either a preset name or a comma/space separated kind list.
FeatureConfig parse_feature_config(std::string_view text, FeatureParams params = {});

std::vector<double> extract(const Segment& segment, const FeatureConfig& config);
void extract_into(const Segment& segment, const FeatureConfig& config, std::span<double> out);

FeatureMatrix build_matrix(std::span<const Segment> segments, const FeatureConfig& config,
                           int subject_id = 0);

} // namespace emgpr
