#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "emgpr/matrix.hpp"

namespace emgpr {

/// Time-domain feature kinds, declared in canonical column order.
enum class FeatureKind { MAV, MAVS, WL, SSC, ZC, HIST, RMS };

inline constexpr std::array<FeatureKind, 7> kAllFeatureKinds = {
    FeatureKind::MAV, FeatureKind::MAVS, FeatureKind::WL, FeatureKind::SSC,
    FeatureKind::ZC,  FeatureKind::HIST, FeatureKind::RMS};

std::string_view to_string(FeatureKind kind);
FeatureKind feature_kind_from_string(std::string_view name);

struct ColumnMeta {
    std::size_t channel = 0; // 0-based
    FeatureKind kind = FeatureKind::MAV;
    std::optional<std::size_t> bin;

    /// Column header, e.g. "ch1_MAV" or "ch3_HIST_7".
    std::string name() const;
    static ColumnMeta parse(std::string_view name);

    friend bool operator==(const ColumnMeta&, const ColumnMeta&) = default;
};

/// N windows x P features, with per-row label and repetition.
struct FeatureMatrix {
    Matrix values;
    std::vector<ColumnMeta> column_meta;
    std::vector<int> labels;
    std::vector<int> repetitions;
    int subject_id = 0;

    std::size_t rows() const noexcept { return values.rows(); }
    std::size_t cols() const noexcept { return values.cols(); }

    /// Rows for which keep(i) is true, in original order.
    template <class Pred>
    FeatureMatrix filter_rows(Pred keep) const {
        FeatureMatrix out;
        out.column_meta = column_meta;
        out.subject_id = subject_id;
        out.values = Matrix(0, cols());
        for (std::size_t i = 0; i < rows(); ++i) {
            if (keep(i)) {
                out.values.append_row(values.row(i));
                out.labels.push_back(labels[i]);
                out.repetitions.push_back(repetitions[i]);
            }
        }
        return out;
    }

    /// Throws ShapeError when the column/label bookkeeping disagrees.
    void check_consistent() const;

    friend bool operator==(const FeatureMatrix&, const FeatureMatrix&) = default;
};

/// CSV: header `label,repetition,<column names>`, one row per window.
void write_feature_matrix(std::ostream& out, const FeatureMatrix& fm);
void write_feature_matrix(const std::string& path, const FeatureMatrix& fm);
FeatureMatrix read_feature_matrix(std::istream& in, int subject_id = 0);
FeatureMatrix read_feature_matrix(const std::string& path, int subject_id = 0);

} // namespace emgpr
