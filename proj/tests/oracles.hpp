#pragma once

// Brute-force references used to check the library. They follow the textbook
// definitions literally and share no code with src/.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <span>
#include <utility>
#include <vector>

#include "emgpr/matrix.hpp"
#include "emgpr/rng.hpp"

namespace oracle {

inline double mav(std::span<const double> x) {
    long double s = 0;
    for (std::size_t i = 0; i < x.size(); ++i) s += std::fabs(static_cast<long double>(x[i]));
    return static_cast<double>(s / x.size());
}

inline double mavs(std::span<const double> x) {
    const std::size_t half = x.size() / 2;
    long double a = 0, b = 0;
    for (std::size_t i = 0; i < half; ++i) a += std::fabs(static_cast<long double>(x[i]));
    for (std::size_t i = half; i < x.size(); ++i) b += std::fabs(static_cast<long double>(x[i]));
    return static_cast<double>(b / (x.size() - half) - a / half);
}

inline double wl(std::span<const double> x) {
    long double s = 0;
    for (std::size_t i = 0; i + 1 < x.size(); ++i) {
        s += std::fabs(static_cast<long double>(x[i + 1]) - x[i]);
    }
    return static_cast<double>(s);
}

inline std::size_t zc(std::span<const double> x, double thr) {
    std::size_t n = 0;
    for (std::size_t i = 1; i < x.size(); ++i) {
        const bool crosses = (x[i - 1] > 0 && x[i] < 0) || (x[i - 1] < 0 && x[i] > 0);
        if (crosses && std::fabs(x[i - 1] - x[i]) >= thr) ++n;
    }
    return n;
}

inline std::size_t ssc(std::span<const double> x, double thr) {
    std::size_t n = 0;
    for (std::size_t i = 1; i + 1 < x.size(); ++i) {
        const bool peak = x[i] > x[i - 1] && x[i] > x[i + 1];
        const bool trough = x[i] < x[i - 1] && x[i] < x[i + 1];
        if ((peak || trough) && (x[i] - x[i - 1]) * (x[i] - x[i + 1]) >= thr) ++n;
    }
    return n;
}

inline double rms(std::span<const double> x) {
    long double s = 0;
    for (double v : x) s += static_cast<long double>(v) * v;
    return static_cast<double>(std::sqrt(s / x.size()));
}

/// Explicit edge list; bins are [e_b, e_{b+1}) except the last, which is closed.
inline std::vector<double> hist(std::span<const double> x, std::size_t bins, double span) {
    long double mean = 0;
    for (double v : x) mean += v;
    mean /= x.size();
    long double var = 0;
    for (double v : x) var += (v - mean) * (v - mean);
    const double sigma = static_cast<double>(std::sqrt(var / x.size()));
    std::vector<double> counts(bins, 0.0);
    if (sigma == 0.0) {
        counts[bins / 2] = static_cast<double>(x.size());
        return counts;
    }
    std::vector<double> edges(bins + 1);
    const double lo = -span * sigma;
    const double width = 2.0 * span * sigma / static_cast<double>(bins);
    for (std::size_t b = 0; b <= bins; ++b) edges[b] = lo + width * static_cast<double>(b);
    for (double v : x) {
        std::size_t idx = 0;
        if (v >= edges[bins]) {
            idx = bins - 1;
        } else {
            for (std::size_t b = 0; b < bins; ++b) {
                if (v >= edges[b]) idx = b;
            }
        }
        counts[idx] += 1.0;
    }
    return counts;
}

/// Exact kNN: full sort by (squared distance, index), vote, nearest-neighbour tie-break.
inline int knn(const emgpr::Matrix& train, const std::vector<int>& labels, std::size_t k,
               std::span<const double> q) {
    std::vector<std::pair<double, std::size_t>> d;
    for (std::size_t i = 0; i < train.rows(); ++i) {
        double s = 0;
        for (std::size_t j = 0; j < q.size(); ++j) s += (train(i, j) - q[j]) * (train(i, j) - q[j]);
        d.emplace_back(s, i);
    }
    std::sort(d.begin(), d.end());
    std::map<int, std::size_t> votes;
    for (std::size_t i = 0; i < k; ++i) ++votes[labels[d[i].second]];
    std::size_t best = 0;
    for (const auto& [_, v] : votes) best = std::max(best, v);
    for (std::size_t i = 0; i < k; ++i) {
        if (votes[labels[d[i].second]] == best) return labels[d[i].second];
    }
    return -1;
}

inline std::vector<double> random_window(emgpr::Rng& rng, std::size_t m) {
    std::vector<double> x(m);
    const double scale = std::pow(10.0, rng.uniform(-3.0, 2.0));
    for (auto& v : x) v = scale * rng.normal();
    return x;
}

inline double rel_err(double got, double want, double scale) {
    return std::fabs(got - want) / std::max({std::fabs(want), scale, 1e-300});
}

/// Two Gaussian blobs in one dimension, labels 0 (mean -mu) and 1 (mean +mu).
inline std::pair<emgpr::Matrix, std::vector<int>> blobs(std::uint64_t seed, std::size_t per_class,
                                                         double mu = 10.0) {
    emgpr::Rng rng(seed);
    emgpr::Matrix x(0, 1);
    std::vector<int> y;
    for (std::size_t i = 0; i < per_class; ++i) {
        for (int c = 0; c < 2; ++c) {
            const double v = (c == 0 ? -mu : mu) + rng.normal();
            x.append_row(std::span<const double>(&v, 1));
            y.push_back(c);
        }
    }
    return {x, y};
}

} // namespace oracle
