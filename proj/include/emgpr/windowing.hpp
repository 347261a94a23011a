#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "emgpr/dataset.hpp"

namespace emgpr {

enum class WindowMode { overlapped, adjacent };
enum class LabelPolicy { majority, pure_only, endpoint };

std::string_view to_string(WindowMode mode);
std::string_view to_string(LabelPolicy policy);
WindowMode window_mode_from_string(std::string_view s);
LabelPolicy label_policy_from_string(std::string_view s);

inline constexpr double kLatencyLimitMs = 300.0;

struct WindowSpec {
    double length_ms = 256.0;
    double increment_ms = 10.0;
    WindowMode mode = WindowMode::overlapped;
    LabelPolicy label_policy = LabelPolicy::majority;
    std::optional<double> latency_limit_ms = kLatencyLimitMs;

    /// Window length in samples, floor(length_ms * rate / 1000).
    std::size_t length_samples(double rate_hz) const;
    /// Stride in samples; equals the window length in adjacent mode.
    std::size_t stride_samples(double rate_hz) const;

    /// Throws SpecError when the spec is unusable at `rate_hz`.
    void validate(double rate_hz) const;

    friend bool operator==(const WindowSpec&, const WindowSpec&) = default;
};

/// One analysis window: C channels x W samples, channel-major.
struct Segment {
    std::size_t window_index = 0;
    std::size_t start_sample = 0;
    std::size_t num_channels = 0;
    std::size_t length = 0;
    std::vector<double> samples;
    int label = 0;
    int repetition = 0;

    std::span<const double> channel(std::size_t c) const {
        return {samples.data() + c * length, length};
    }
    std::span<double> channel(std::size_t c) { return {samples.data() + c * length, length}; }

    friend bool operator==(const Segment&, const Segment&) = default;
};

/// Window position and resolved labels, without the sample payload.
struct WindowRef {
    std::size_t window_index = 0;
    std::size_t start_sample = 0;
    int label = 0;
    int repetition = 0;

    friend bool operator==(const WindowRef&, const WindowRef&) = default;
};

/// Window placements for `rec` under `spec`, labels resolved by the policy.
/// pure_only drops windows spanning more than one stimulus value.
std::vector<WindowRef> plan_windows(const Recording& rec, const WindowSpec& spec);

/// Copies the samples of one planned window out of the recording.
Segment materialize(const Recording& rec, const WindowRef& ref, std::size_t window_length);
void materialize_into(const Recording& rec, const WindowRef& ref, std::size_t window_length,
                      Segment& out);

std::vector<Segment> segment(const Recording& rec, const WindowSpec& spec);

struct AggregationSpec {
    std::size_t n = 5;
    /// Mean over every run of n consecutive segments instead of disjoint groups.
    bool sliding = false;

    friend bool operator==(const AggregationSpec&, const AggregationSpec&) = default;
};

/// Averages disjoint consecutive groups of n segments:
///   WG_t = (1/n) * sum_{k=1..n} S_{nt-k}
/// The trailing partial group is dropped, as is any group with mixed labels.
/// With `sliding` set, output t averages segments t..t+n-1.
std::vector<Segment> aggregate(std::span<const Segment> segments, const AggregationSpec& agg);

/// Mean of one group; nullopt when the group's labels disagree. Index, start,
/// label and repetition come from the group's last segment.
std::optional<Segment> aggregate_group(std::span<const Segment> group);

enum class Technique { WA, AG, PROPOSED };

std::string_view to_string(Technique t);
Technique technique_from_string(std::string_view s);

struct BaselineSpec {
    WindowSpec window;
    std::optional<AggregationSpec> aggregation;
};

/// Window regime for a technique. WA: 200ms/10ms, AG: 256ms/10ms averaged in
/// fives, PROPOSED: 256ms/10ms.
BaselineSpec make_baseline_spec(Technique technique, double rate_hz);

} // namespace emgpr
