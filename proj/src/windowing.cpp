#include "emgpr/windowing.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <string>

#include "emgpr/error.hpp"

namespace emgpr {

namespace {

std::string upper(std::string_view s) {
    std::string out(s);
    for (auto& c : out) {
        c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    }
    return out;
}

std::size_t ms_to_samples(double ms, double rate_hz) {
    // Small epsilon so values like 256ms * 2kHz land on 512 despite rounding.
    return static_cast<std::size_t>(std::floor(ms * rate_hz / 1000.0 + 1e-9));
}

/// Most frequent value among `values[i]` for i in [begin, end) where keep(i);
/// ties resolve to the smaller value.
template <class Keep>
int majority(const std::vector<int>& values, std::size_t begin, std::size_t end,
             std::vector<std::size_t>& counts, Keep keep) {
    int best = 0;
    std::size_t best_count = 0;
    for (std::size_t i = begin; i < end; ++i) {
        if (!keep(i)) {
            continue;
        }
        const auto v = static_cast<std::size_t>(values[i]);
        if (v >= counts.size()) {
            counts.resize(v + 1, 0);
        }
        ++counts[v];
    }
    for (std::size_t v = 0; v < counts.size(); ++v) {
        if (counts[v] > best_count) {
            best_count = counts[v];
            best = static_cast<int>(v);
        }
        counts[v] = 0;
    }
    return best;
}

} // namespace

std::string_view to_string(WindowMode mode) {
    return mode == WindowMode::overlapped ? "overlapped" : "adjacent";
}

std::string_view to_string(LabelPolicy policy) {
    switch (policy) {
    case LabelPolicy::majority: return "majority";
    case LabelPolicy::pure_only: return "pure_only";
    case LabelPolicy::endpoint: return "endpoint";
    }
    return "?";
}

WindowMode window_mode_from_string(std::string_view s) {
    if (s == "overlapped") return WindowMode::overlapped;
    if (s == "adjacent") return WindowMode::adjacent;
    throw ValidationError("unknown window mode '" + std::string(s) + "'");
}

LabelPolicy label_policy_from_string(std::string_view s) {
    if (s == "majority") return LabelPolicy::majority;
    if (s == "pure_only" || s == "pure") return LabelPolicy::pure_only;
    if (s == "endpoint") return LabelPolicy::endpoint;
    throw ValidationError("unknown label policy '" + std::string(s) + "'");
}

std::size_t WindowSpec::length_samples(double rate_hz) const {
    return ms_to_samples(length_ms, rate_hz);
}

std::size_t WindowSpec::stride_samples(double rate_hz) const {
    return mode == WindowMode::adjacent ? length_samples(rate_hz)
                                        : ms_to_samples(increment_ms, rate_hz);
}

void WindowSpec::validate(double rate_hz) const {
    if (!(rate_hz > 0.0)) {
        throw SpecError("sample rate must be positive");
    }
    if (!(length_ms > 0.0) || !std::isfinite(length_ms)) {
        throw SpecError("window length must be positive");
    }
    if (latency_limit_ms && length_ms > *latency_limit_ms) {
        throw SpecError("window length " + std::to_string(length_ms) +
                        "ms exceeds the latency limit of " + std::to_string(*latency_limit_ms) +
                        "ms");
    }
    const auto w = length_samples(rate_hz);
    if (w < 2) {
        throw SpecError("window must span at least 2 samples");
    }
    if (mode == WindowMode::overlapped) {
        if (!(increment_ms > 0.0) || !std::isfinite(increment_ms)) {
            throw SpecError("window increment must be positive");
        }
        const auto inc = stride_samples(rate_hz);
        if (inc < 1) {
            throw SpecError("window increment must span at least 1 sample");
        }
        if (inc > w) {
            throw SpecError("overlapped windows need increment <= length");
        }
    }
}

std::vector<WindowRef> plan_windows(const Recording& rec, const WindowSpec& spec) {
    const double rate = rec.sample_rate_hz();
    spec.validate(rate);
    const std::size_t w = spec.length_samples(rate);
    const std::size_t stride = spec.stride_samples(rate);
    const std::size_t len = rec.length();
    if (w > len) {
        throw InputTooShortError("window of " + std::to_string(w) +
                                 " samples is longer than the recording (" +
                                 std::to_string(len) + ")");
    }
    const std::size_t count = spec.mode == WindowMode::adjacent ? len / w : (len - w) / stride + 1;

    const auto& stim = rec.stimulus();
    const auto& rep = rec.repetition();
    std::vector<std::size_t> counts;
    std::vector<WindowRef> out;
    out.reserve(count);
    for (std::size_t n = 0; n < count; ++n) {
        const std::size_t start = n * stride;
        const std::size_t end = start + w;
        WindowRef ref{n, start, 0, 0};
        switch (spec.label_policy) {
        case LabelPolicy::endpoint:
            ref.label = stim[end - 1];
            ref.repetition = rep[end - 1];
            break;
        case LabelPolicy::pure_only:
            if (!std::all_of(stim.begin() + static_cast<std::ptrdiff_t>(start),
                             stim.begin() + static_cast<std::ptrdiff_t>(end),
                             [&](int s) { return s == stim[start]; })) {
                continue;
            }
            [[fallthrough]];
        case LabelPolicy::majority:
            ref.label = majority(stim, start, end, counts, [](std::size_t) { return true; });
            ref.repetition =
                majority(rep, start, end, counts, [&](std::size_t i) { return stim[i] == ref.label; });
            break;
        }
        out.push_back(ref);
    }
    return out;
}

void materialize_into(const Recording& rec, const WindowRef& ref, std::size_t window_length,
                      Segment& out) {
    const std::size_t channels = rec.num_channels();
    if (ref.start_sample + window_length > rec.length()) {
        throw InputTooShortError("window extends past the end of the recording");
    }
    out.window_index = ref.window_index;
    out.start_sample = ref.start_sample;
    out.num_channels = channels;
    out.length = window_length;
    out.label = ref.label;
    out.repetition = ref.repetition;
    out.samples.resize(channels * window_length);
    const auto& data = rec.channels().data();
    for (std::size_t s = 0; s < window_length; ++s) {
        const double* src = data.data() + (ref.start_sample + s) * channels;
        for (std::size_t c = 0; c < channels; ++c) {
            out.samples[c * window_length + s] = src[c];
        }
    }
}

Segment materialize(const Recording& rec, const WindowRef& ref, std::size_t window_length) {
    Segment s;
    materialize_into(rec, ref, window_length, s);
    return s;
}

std::vector<Segment> segment(const Recording& rec, const WindowSpec& spec) {
    const auto refs = plan_windows(rec, spec);
    const auto w = spec.length_samples(rec.sample_rate_hz());
    std::vector<Segment> out;
    out.reserve(refs.size());
    for (const auto& r : refs) {
        out.push_back(materialize(rec, r, w));
    }
    return out;
}

std::optional<Segment> aggregate_group(std::span<const Segment> group) {
    if (group.empty()) {
        throw SpecError("aggregation group is empty");
    }
    const Segment& last = group.back();
    for (const auto& s : group) {
        if (s.num_channels != last.num_channels || s.length != last.length ||
            s.samples.size() != last.samples.size()) {
            throw ShapeError("aggregated segments differ in shape");
        }
    }
    for (const auto& s : group) {
        if (s.label != last.label) {
            return std::nullopt;
        }
    }
    Segment out;
    out.window_index = last.window_index;
    out.start_sample = last.start_sample;
    out.num_channels = last.num_channels;
    out.length = last.length;
    out.label = last.label;
    out.repetition = last.repetition;
    out.samples.resize(last.samples.size());
    const auto n = static_cast<long double>(group.size());
    for (std::size_t i = 0; i < out.samples.size(); ++i) {
        // extended precision keeps the mean of identical values exact
        long double sum = 0.0L;
        for (const auto& s : group) {
            sum += s.samples[i];
        }
        out.samples[i] = static_cast<double>(sum / n);
    }
    return out;
}

std::vector<Segment> aggregate(std::span<const Segment> segments, const AggregationSpec& agg) {
    if (agg.n < 1) {
        throw SpecError("aggregation size must be at least 1");
    }
    std::vector<Segment> out;
    const std::size_t n = agg.n;
    if (segments.size() < n) {
        return out;
    }
    const std::size_t groups = agg.sliding ? segments.size() - n + 1 : segments.size() / n;
    for (std::size_t t = 0; t < groups; ++t) {
        const std::size_t first = agg.sliding ? t : t * n;
        if (auto mean = aggregate_group(segments.subspan(first, n))) {
            out.push_back(std::move(*mean));
        }
    }
    return out;
}

std::string_view to_string(Technique t) {
    switch (t) {
    case Technique::WA: return "WA";
    case Technique::AG: return "AG";
    case Technique::PROPOSED: return "PROPOSED";
    }
    return "?";
}

Technique technique_from_string(std::string_view s) {
    const auto u = upper(s);
    if (u == "WA") return Technique::WA;
    if (u == "AG") return Technique::AG;
    if (u == "PROPOSED") return Technique::PROPOSED;
    throw ValidationError("unknown technique '" + std::string(s) + "' (WA, AG, PROPOSED)");
}

BaselineSpec make_baseline_spec(Technique technique, double rate_hz) {
    BaselineSpec out;
    out.window.increment_ms = 10.0;
    out.window.mode = WindowMode::overlapped;
    switch (technique) {
    case Technique::WA:
        out.window.length_ms = 200.0;
        break;
    case Technique::AG:
        out.window.length_ms = 256.0;
        out.aggregation = AggregationSpec{5, false};
        break;
    case Technique::PROPOSED:
        out.window.length_ms = 256.0;
        break;
    }
    out.window.validate(rate_hz);
    return out;
}

} // namespace emgpr
