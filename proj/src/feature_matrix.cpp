#include "emgpr/feature_matrix.hpp"

#include <fstream>
#include <istream>
#include <ostream>

#include "emgpr/error.hpp"
#include "emgpr/text.hpp"

namespace emgpr {

std::string_view to_string(FeatureKind kind) {
    switch (kind) {
    case FeatureKind::MAV: return "MAV";
    case FeatureKind::MAVS: return "MAVS";
    case FeatureKind::WL: return "WL";
    case FeatureKind::SSC: return "SSC";
    case FeatureKind::ZC: return "ZC";
    case FeatureKind::HIST: return "HIST";
    case FeatureKind::RMS: return "RMS";
    }
    return "?";
}

FeatureKind feature_kind_from_string(std::string_view name) {
    for (auto k : kAllFeatureKinds) {
        if (to_string(k) == name) {
            return k;
        }
    }
    throw ValidationError("unknown feature kind '" + std::string(name) + "'");
}

std::string ColumnMeta::name() const {
    std::string s = "ch" + std::to_string(channel + 1) + "_" + std::string(to_string(kind));
    if (bin) {
        s += "_" + std::to_string(*bin);
    }
    return s;
}

ColumnMeta ColumnMeta::parse(std::string_view name) {
    const auto parts = text::split(name, '_');
    if (parts.size() < 2 || parts.size() > 3 || parts[0].size() < 3 || parts[0].substr(0, 2) != "ch") {
        throw FormatError("bad feature column name '" + std::string(name) + "'");
    }
    ColumnMeta meta;
    const auto ch = text::parse_int(parts[0].substr(2), "feature column channel");
    if (ch < 1) {
        throw FormatError("bad channel in feature column '" + std::string(name) + "'");
    }
    meta.channel = static_cast<std::size_t>(ch - 1);
    try {
        meta.kind = feature_kind_from_string(parts[1]);
    } catch (const ValidationError&) {
        throw FormatError("bad feature kind in column '" + std::string(name) + "'");
    }
    if (parts.size() == 3) {
        const auto bin = text::parse_int(parts[2], "feature column bin");
        if (bin < 0 || meta.kind != FeatureKind::HIST) {
            throw FormatError("bad bin in feature column '" + std::string(name) + "'");
        }
        meta.bin = static_cast<std::size_t>(bin);
    } else if (meta.kind == FeatureKind::HIST) {
        throw FormatError("histogram column '" + std::string(name) + "' lacks a bin index");
    }
    return meta;
}

void FeatureMatrix::check_consistent() const {
    if (column_meta.size() != values.cols()) {
        throw ShapeError("column metadata does not match feature width");
    }
    if (labels.size() != values.rows() || repetitions.size() != values.rows()) {
        throw ShapeError("labels/repetitions do not match feature row count");
    }
}

void write_feature_matrix(std::ostream& out, const FeatureMatrix& fm) {
    fm.check_consistent();
    std::string line = "label,repetition";
    for (const auto& m : fm.column_meta) {
        line += ',';
        line += m.name();
    }
    line += '\n';
    out << line;
    for (std::size_t i = 0; i < fm.rows(); ++i) {
        line = std::to_string(fm.labels[i]);
        line += ',';
        line += std::to_string(fm.repetitions[i]);
        for (double v : fm.values.row(i)) {
            line += ',';
            line += text::format_double(v);
        }
        line += '\n';
        out << line;
    }
}

void write_feature_matrix(const std::string& path, const FeatureMatrix& fm) {
    std::ofstream out(path);
    if (!out) {
        throw DataError("cannot write feature matrix '" + path + "'");
    }
    write_feature_matrix(out, fm);
    if (!out) {
        throw DataError("write failed for '" + path + "'");
    }
}

FeatureMatrix read_feature_matrix(std::istream& in, int subject_id) {
    std::string line;
    if (!std::getline(in, line)) {
        throw FormatError("feature CSV is empty (header required)");
    }
    const auto header = text::split(text::trim(line), ',');
    if (header.size() < 3 || text::trim(header[0]) != "label" ||
        text::trim(header[1]) != "repetition") {
        throw FormatError("feature CSV header must start with label,repetition");
    }
    FeatureMatrix fm;
    fm.subject_id = subject_id;
    for (std::size_t i = 2; i < header.size(); ++i) {
        fm.column_meta.push_back(ColumnMeta::parse(text::trim(header[i])));
    }
    const std::size_t width = fm.column_meta.size();
    fm.values = Matrix(0, width);
    std::vector<double> row(width);
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        const auto trimmed = text::trim(line);
        if (trimmed.empty()) {
            continue;
        }
        const auto fields = text::split(trimmed, ',');
        const std::string where = "line " + std::to_string(line_no);
        if (fields.size() != width + 2) {
            throw FormatError(where + ": expected " + std::to_string(width + 2) +
                              " columns, found " + std::to_string(fields.size()));
        }
        fm.labels.push_back(static_cast<int>(text::parse_int(fields[0], where)));
        fm.repetitions.push_back(static_cast<int>(text::parse_int(fields[1], where)));
        for (std::size_t c = 0; c < width; ++c) {
            row[c] = text::parse_double(fields[c + 2], where);
        }
        fm.values.append_row(row);
    }
    return fm;
}

FeatureMatrix read_feature_matrix(const std::string& path, int subject_id) {
    std::ifstream in(path);
    if (!in) {
        throw DataError("cannot open feature matrix '" + path + "'");
    }
    return read_feature_matrix(in, subject_id);
}

} // namespace emgpr
