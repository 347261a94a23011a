#include "emgpr/classifiers.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <numbers>
#include <numeric>
#include <ostream>

#include <Eigen/Core>

#include "emgpr/error.hpp"
#include "emgpr/parallel.hpp"
#include "emgpr/rng.hpp"
#include "emgpr/text.hpp"

namespace emgpr {

namespace {

using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMap = Eigen::Map<const RowMajor>;

std::vector<int> unique_sorted(std::span<const int> y) {
    std::vector<int> classes(y.begin(), y.end());
    std::sort(classes.begin(), classes.end());
    classes.erase(std::unique(classes.begin(), classes.end()), classes.end());
    return classes;
}

std::size_t class_index(const std::vector<int>& classes, int label) {
    const auto it = std::lower_bound(classes.begin(), classes.end(), label);
    if (it == classes.end() || *it != label) {
        throw LabelError("label " + std::to_string(label) + " is not a training class");
    }
    return static_cast<std::size_t>(it - classes.begin());
}

void check_training_set(const Matrix& x, std::span<const int> y) {
    if (x.rows() == 0) {
        throw DegenerateDataError("training set is empty");
    }
    if (x.rows() != y.size()) {
        throw ShapeError("training labels do not match row count");
    }
    for (double v : x.data()) {
        if (!std::isfinite(v)) {
            throw DataError("training rows contain non-finite values");
        }
    }
    if (unique_sorted(y).size() < 2) {
        throw DegenerateDataError("training set contains a single class");
    }
}

double squared_distance(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

void write_ints(text::TokenWriter& out, std::string_view key, std::span<const int> v) {
    out.word(key).count(v.size());
    for (int x : v) {
        out.integer(x);
    }
    out.endl();
}

std::vector<int> read_ints(text::TokenReader& in, std::string_view key) {
    in.expect(key);
    std::vector<int> v(in.count());
    for (auto& x : v) {
        x = static_cast<int>(in.integer());
    }
    return v;
}

void write_doubles(text::TokenWriter& out, std::string_view key, std::span<const double> v) {
    out.word(key).count(v.size());
    for (double x : v) {
        out.number(x);
    }
    out.endl();
}

std::vector<double> read_doubles(text::TokenReader& in, std::string_view key) {
    in.expect(key);
    std::vector<double> v(in.count());
    for (auto& x : v) {
        x = in.number();
    }
    return v;
}

void write_matrix(text::TokenWriter& out, std::string_view key, const Matrix& m) {
    out.word(key).count(m.rows()).count(m.cols()).endl();
    for (std::size_t r = 0; r < m.rows(); ++r) {
        for (double v : m.row(r)) {
            out.number(v);
        }
        out.endl();
    }
}

Matrix read_matrix(text::TokenReader& in, std::string_view key) {
    in.expect(key);
    const auto rows = in.count();
    const auto cols = in.count();
    Matrix m(rows, cols);
    for (auto& v : m.data()) {
        v = in.number();
    }
    return m;
}

} // namespace

// ---------------------------------------------------------------------------
// Standardization
// ---------------------------------------------------------------------------

void StandardizationParams::apply_inplace(std::span<double> row) const {
    if (row.size() != mean.size()) {
        throw ShapeError("standardizer expects " + std::to_string(mean.size()) +
                         " columns, got " + std::to_string(row.size()));
    }
    for (std::size_t j = 0; j < row.size(); ++j) {
        row[j] = (row[j] - mean[j]) / stddev[j];
    }
}

StandardizationParams fit_standardizer(const Matrix& train, double epsilon) {
    if (train.rows() == 0) {
        throw DataError("cannot fit a standardizer on zero rows");
    }
    const std::size_t p = train.cols();
    const auto n = static_cast<double>(train.rows());
    StandardizationParams params;
    params.epsilon = epsilon;
    params.mean.assign(p, 0.0);
    params.stddev.assign(p, 0.0);
    for (std::size_t i = 0; i < train.rows(); ++i) {
        const auto row = train.row(i);
        for (std::size_t j = 0; j < p; ++j) {
            params.mean[j] += row[j];
        }
    }
    for (auto& m : params.mean) {
        m /= n;
    }
    for (std::size_t i = 0; i < train.rows(); ++i) {
        const auto row = train.row(i);
        for (std::size_t j = 0; j < p; ++j) {
            const double d = row[j] - params.mean[j];
            params.stddev[j] += d * d;
        }
    }
    for (auto& s : params.stddev) {
        s = std::max(std::sqrt(s / n), epsilon);
    }
    return params;
}

Matrix apply_standardizer(const StandardizationParams& params, const Matrix& rows) {
    Matrix out = rows;
    for (std::size_t i = 0; i < out.rows(); ++i) {
        params.apply_inplace(out.row(i));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Common
// ---------------------------------------------------------------------------

std::string_view to_string(ClassifierKind kind) {
    switch (kind) {
    case ClassifierKind::knn: return "knn";
    case ClassifierKind::nb: return "nb";
    case ClassifierKind::dt: return "dt";
    case ClassifierKind::svm: return "svm";
    }
    return "?";
}

ClassifierKind classifier_kind_from_string(std::string_view s) {
    if (s == "knn" || s == "kNN") return ClassifierKind::knn;
    if (s == "nb" || s == "NB") return ClassifierKind::nb;
    if (s == "dt" || s == "DT") return ClassifierKind::dt;
    if (s == "svm" || s == "SVM") return ClassifierKind::svm;
    throw ValidationError("unknown classifier '" + std::string(s) + "' (knn, nb, dt, svm)");
}

void Classifier::check_width(std::size_t cols) const {
    if (cols != num_features()) {
        throw ShapeError("model expects " + std::to_string(num_features()) +
                         " features, got " + std::to_string(cols));
    }
}

std::vector<int> Classifier::predict(const Matrix& rows) const {
    check_width(rows.cols());
    std::vector<int> out(rows.rows());
    parallel_for(rows.rows(), [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            out[i] = predict_one(rows.row(i));
        }
    });
    return out;
}

// ---------------------------------------------------------------------------
// kNN
// ---------------------------------------------------------------------------

KnnModel::KnnModel(std::size_t k, Matrix train, std::vector<int> labels)
    : Classifier(unique_sorted(labels)), k_(k), train_(std::move(train)), labels_(std::move(labels)) {
    if (k_ < 1) {
        throw HyperparameterError("k must be at least 1");
    }
    if (labels_.size() != train_.rows()) {
        throw ShapeError("kNN labels do not match row count");
    }
    if (k_ > train_.rows()) {
        throw HyperparameterError("k = " + std::to_string(k_) + " exceeds the " +
                                  std::to_string(train_.rows()) + " training rows");
    }
    sq_norms_.resize(train_.rows());
    for (std::size_t i = 0; i < train_.rows(); ++i) {
        const auto r = train_.row(i);
        sq_norms_[i] = std::inner_product(r.begin(), r.end(), r.begin(), 0.0);
    }
}

int KnnModel::vote(std::span<const std::size_t> neighbours) const {
    std::vector<std::size_t> votes(classes_.size(), 0);
    for (auto j : neighbours) {
        ++votes[class_index(classes_, labels_[j])];
    }
    const auto best = *std::max_element(votes.begin(), votes.end());
    // first neighbour (nearest) whose class reaches the top vote count
    for (auto j : neighbours) {
        if (votes[class_index(classes_, labels_[j])] == best) {
            return labels_[j];
        }
    }
    return labels_[neighbours.front()];
}

int KnnModel::predict_one(std::span<const double> row) const {
    Matrix one(0, row.size());
    one.append_row(row);
    return predict(one).front();
}

std::vector<int> KnnModel::predict(const Matrix& rows) const {
    check_width(rows.cols());
    const std::size_t n = train_.rows();
    const std::size_t p = train_.cols();
    std::vector<int> out(rows.rows());
    if (rows.rows() == 0) {
        return out;
    }
    const ConstMap train(train_.data().data(), static_cast<Eigen::Index>(n),
                         static_cast<Eigen::Index>(p));
    const double max_norm = *std::max_element(sq_norms_.begin(), sq_norms_.end());
    const double eps = std::numeric_limits<double>::epsilon();
    constexpr std::size_t kBlock = 128;
    const std::size_t blocks = (rows.rows() + kBlock - 1) / kBlock;

    // Candidates are screened with a GEMM (|q|^2 + |t|^2 - 2 q.t) and re-ranked
    // with exact distances, so the result equals a brute-force scan.
    parallel_for(blocks, [&](std::size_t b0, std::size_t b1) {
        RowMajor gram;
        std::vector<double> approx(n);
        std::vector<double> scratch(n);
        std::vector<std::pair<double, std::size_t>> cand;
        std::vector<std::size_t> nearest;
        for (std::size_t b = b0; b < b1; ++b) {
            const std::size_t first = b * kBlock;
            const std::size_t count = std::min(kBlock, rows.rows() - first);
            const ConstMap queries(rows.data().data() + first * p, static_cast<Eigen::Index>(count),
                                   static_cast<Eigen::Index>(p));
            gram.noalias() = queries * train.transpose();
            for (std::size_t q = 0; q < count; ++q) {
                const auto query = rows.row(first + q);
                const double qn = std::inner_product(query.begin(), query.end(), query.begin(), 0.0);
                for (std::size_t j = 0; j < n; ++j) {
                    approx[j] = qn + sq_norms_[j] - 2.0 * gram(static_cast<Eigen::Index>(q),
                                                                static_cast<Eigen::Index>(j));
                }
                const double tol = 4.0 * static_cast<double>(p + 2) * eps * (qn + max_norm) +
                                   std::numeric_limits<double>::min();
                scratch = approx;
                std::nth_element(scratch.begin(), scratch.begin() + static_cast<std::ptrdiff_t>(k_ - 1),
                                 scratch.end());
                const double cutoff = scratch[k_ - 1] + 2.0 * tol;
                cand.clear();
                for (std::size_t j = 0; j < n; ++j) {
                    if (approx[j] <= cutoff) {
                        cand.emplace_back(squared_distance(query, train_.row(j)), j);
                    }
                }
                std::partial_sort(cand.begin(), cand.begin() + static_cast<std::ptrdiff_t>(k_),
                                  cand.end());
                nearest.clear();
                for (std::size_t i = 0; i < k_; ++i) {
                    nearest.push_back(cand[i].second);
                }
                out[first + q] = vote(nearest);
            }
        }
    });
    return out;
}

void KnnModel::save_body(text::TokenWriter& out) const {
    out.word("k").count(k_).endl();
    write_ints(out, "labels", labels_);
    write_matrix(out, "rows", train_);
}

std::unique_ptr<KnnModel> KnnModel::load_body(text::TokenReader& in) {
    in.expect("k");
    const auto k = in.count();
    auto labels = read_ints(in, "labels");
    auto rows = read_matrix(in, "rows");
    return std::make_unique<KnnModel>(k, std::move(rows), std::move(labels));
}

std::unique_ptr<KnnModel> train_knn(const Matrix& x, std::span<const int> y, const Hyperparams& hp) {
    check_training_set(x, y);
    return std::make_unique<KnnModel>(hp.knn_k, x, std::vector<int>(y.begin(), y.end()));
}

// ---------------------------------------------------------------------------
// Gaussian naive Bayes
// ---------------------------------------------------------------------------

GaussianNbModel::GaussianNbModel(std::vector<int> classes, std::vector<double> priors, Matrix means,
                                 Matrix variances)
    : Classifier(std::move(classes)),
      priors_(std::move(priors)),
      means_(std::move(means)),
      variances_(std::move(variances)) {
    const std::size_t k = classes_.size();
    if (priors_.size() != k || means_.rows() != k || variances_.rows() != k ||
        means_.cols() != variances_.cols()) {
        throw ShapeError("naive Bayes parameters have inconsistent shapes");
    }
    log_priors_.resize(k);
    log_norm_.assign(k, 0.0);
    for (std::size_t c = 0; c < k; ++c) {
        if (!(priors_[c] > 0.0)) {
            throw DataError("naive Bayes prior must be positive");
        }
        log_priors_[c] = std::log(priors_[c]);
        for (double v : variances_.row(c)) {
            if (!(v > 0.0)) {
                throw DataError("naive Bayes variance must be positive");
            }
            log_norm_[c] -= 0.5 * std::log(2.0 * std::numbers::pi * v);
        }
    }
}

std::vector<double> GaussianNbModel::log_scores(std::span<const double> row) const {
    check_width(row.size());
    std::vector<double> scores(classes_.size());
    for (std::size_t c = 0; c < classes_.size(); ++c) {
        const auto mu = means_.row(c);
        const auto var = variances_.row(c);
        double quad = 0.0;
        for (std::size_t j = 0; j < row.size(); ++j) {
            const double d = row[j] - mu[j];
            quad += d * d / var[j];
        }
        scores[c] = log_priors_[c] + log_norm_[c] - 0.5 * quad;
    }
    return scores;
}

int GaussianNbModel::predict_one(std::span<const double> row) const {
    const auto scores = log_scores(row);
    std::size_t best = 0;
    for (std::size_t c = 1; c < scores.size(); ++c) {
        if (scores[c] > scores[best]) {
            best = c;
        }
    }
    return classes_[best];
}

void GaussianNbModel::save_body(text::TokenWriter& out) const {
    write_ints(out, "classes", classes_);
    write_doubles(out, "priors", priors_);
    write_matrix(out, "means", means_);
    write_matrix(out, "variances", variances_);
}

std::unique_ptr<GaussianNbModel> GaussianNbModel::load_body(text::TokenReader& in) {
    auto classes = read_ints(in, "classes");
    auto priors = read_doubles(in, "priors");
    auto means = read_matrix(in, "means");
    auto vars = read_matrix(in, "variances");
    return std::make_unique<GaussianNbModel>(std::move(classes), std::move(priors), std::move(means),
                                             std::move(vars));
}

std::unique_ptr<GaussianNbModel> train_nb(const Matrix& x, std::span<const int> y,
                                          const Hyperparams& hp) {
    check_training_set(x, y);
    if (!(hp.nb_var_smoothing >= 0.0)) {
        throw HyperparameterError("variance smoothing must be nonnegative");
    }
    auto classes = unique_sorted(y);
    const std::size_t k = classes.size();
    const std::size_t p = x.cols();
    Matrix means(k, p);
    Matrix vars(k, p);
    std::vector<double> counts(k, 0.0);
    for (std::size_t i = 0; i < x.rows(); ++i) {
        const auto c = class_index(classes, y[i]);
        counts[c] += 1.0;
        auto m = means.row(c);
        const auto r = x.row(i);
        for (std::size_t j = 0; j < p; ++j) {
            m[j] += r[j];
        }
    }
    for (std::size_t c = 0; c < k; ++c) {
        for (auto& v : means.row(c)) {
            v /= counts[c];
        }
    }
    for (std::size_t i = 0; i < x.rows(); ++i) {
        const auto c = class_index(classes, y[i]);
        auto v = vars.row(c);
        const auto m = means.row(c);
        const auto r = x.row(i);
        for (std::size_t j = 0; j < p; ++j) {
            const double d = r[j] - m[j];
            v[j] += d * d;
        }
    }
    for (std::size_t c = 0; c < k; ++c) {
        for (auto& v : vars.row(c)) {
            v /= counts[c];
        }
    }
    // smoothing: fraction of the largest overall feature variance
    const auto overall = fit_standardizer(x, 0.0);
    double max_var = 0.0;
    for (double s : overall.stddev) {
        max_var = std::max(max_var, s * s);
    }
    double smoothing = hp.nb_var_smoothing * max_var;
    if (!(smoothing > 0.0)) {
        smoothing = hp.nb_var_smoothing > 0.0 ? hp.nb_var_smoothing
                                              : std::numeric_limits<double>::min();
    }
    for (auto& v : vars.data()) {
        v += smoothing;
    }
    std::vector<double> priors(k);
    for (std::size_t c = 0; c < k; ++c) {
        priors[c] = counts[c] / static_cast<double>(x.rows());
    }
    return std::make_unique<GaussianNbModel>(std::move(classes), std::move(priors), std::move(means),
                                             std::move(vars));
}

// ---------------------------------------------------------------------------
// Decision tree
// ---------------------------------------------------------------------------

DecisionTreeModel::DecisionTreeModel(std::vector<int> classes, std::size_t num_features,
                                     std::vector<Node> nodes)
    : Classifier(std::move(classes)), num_features_(num_features), nodes_(std::move(nodes)) {
    if (nodes_.empty()) {
        throw DataError("decision tree has no nodes");
    }
    for (const auto& node : nodes_) {
        if (node.is_leaf()) {
            if (!std::binary_search(classes_.begin(), classes_.end(), node.label)) {
                throw DataError("decision tree leaf carries an unknown label");
            }
        } else if (static_cast<std::size_t>(node.feature) >= num_features_ ||
                   node.left >= nodes_.size() || node.right >= nodes_.size()) {
            throw DataError("decision tree node is malformed");
        }
    }
}

int DecisionTreeModel::predict_one(std::span<const double> row) const {
    check_width(row.size());
    std::size_t i = 0;
    while (!nodes_[i].is_leaf()) {
        const auto& node = nodes_[i];
        i = row[static_cast<std::size_t>(node.feature)] <= node.threshold ? node.left : node.right;
    }
    return nodes_[i].label;
}

std::size_t DecisionTreeModel::depth() const {
    std::size_t best = 0;
    std::vector<std::pair<std::size_t, std::size_t>> stack{{0, 0}};
    while (!stack.empty()) {
        const auto [i, d] = stack.back();
        stack.pop_back();
        best = std::max(best, d);
        if (!nodes_[i].is_leaf()) {
            stack.emplace_back(nodes_[i].left, d + 1);
            stack.emplace_back(nodes_[i].right, d + 1);
        }
    }
    return best;
}

std::size_t DecisionTreeModel::leaf_count() const {
    return static_cast<std::size_t>(
        std::count_if(nodes_.begin(), nodes_.end(), [](const Node& n) { return n.is_leaf(); }));
}

void DecisionTreeModel::save_body(text::TokenWriter& out) const {
    write_ints(out, "classes", classes_);
    out.word("features").count(num_features_).endl();
    out.word("nodes").count(nodes_.size()).endl();
    for (const auto& n : nodes_) {
        out.integer(n.feature).number(n.threshold).count(n.left).count(n.right).integer(n.label).endl();
    }
}

std::unique_ptr<DecisionTreeModel> DecisionTreeModel::load_body(text::TokenReader& in) {
    auto classes = read_ints(in, "classes");
    in.expect("features");
    const auto features = in.count();
    in.expect("nodes");
    std::vector<Node> nodes(in.count());
    for (auto& n : nodes) {
        n.feature = static_cast<int>(in.integer());
        n.threshold = in.number();
        n.left = in.count();
        n.right = in.count();
        n.label = static_cast<int>(in.integer());
    }
    return std::make_unique<DecisionTreeModel>(std::move(classes), features, std::move(nodes));
}

namespace {

__extension__ using Int128 = __int128;

/// Gini split quality as the exact fraction (sum_l/n_l + sum_r/n_r), where
/// sum_* is the sum of squared class counts. Larger is purer.
struct SplitScore {
    Int128 num = 0;
    Int128 den = 1;

    bool better_than(const SplitScore& o) const { return num * o.den > o.num * den; }
};

class TreeBuilder {
public:
    TreeBuilder(const Matrix& x, std::vector<std::size_t> y, const std::vector<int>& classes,
                const Hyperparams& hp)
        : x_(x), y_(std::move(y)), classes_(classes), k_(classes.size()), hp_(hp) {}

    std::vector<DecisionTreeModel::Node> build() {
        std::vector<std::size_t> rows(x_.rows());
        std::iota(rows.begin(), rows.end(), 0);
        grow(rows, 0);
        return std::move(nodes_);
    }

private:
    std::size_t majority(const std::vector<std::size_t>& counts) const {
        return static_cast<std::size_t>(std::max_element(counts.begin(), counts.end()) -
                                        counts.begin());
    }

    std::size_t grow(const std::vector<std::size_t>& rows, std::size_t depth) {
        const std::size_t id = nodes_.size();
        nodes_.emplace_back();
        std::vector<std::size_t> counts(k_, 0);
        for (auto r : rows) {
            ++counts[y_[r]];
        }
        const auto label = classes_[majority(counts)];
        const auto nonzero = std::count_if(counts.begin(), counts.end(), [](auto c) { return c > 0; });
        const std::size_t min_leaf = std::max<std::size_t>(1, hp_.dt_min_samples_leaf);
        if (nonzero <= 1 || depth >= hp_.dt_max_depth || rows.size() < 2 * min_leaf) {
            nodes_[id].label = label;
            return id;
        }

        Int128 parent_sum = 0;
        for (auto c : counts) {
            parent_sum += static_cast<Int128>(c) * c;
        }
        SplitScore best{parent_sum, static_cast<Int128>(rows.size())};
        int best_feature = -1;
        double best_threshold = 0.0;

        std::vector<std::pair<double, std::size_t>> column(rows.size());
        std::vector<std::size_t> left(k_);
        for (std::size_t f = 0; f < x_.cols(); ++f) {
            for (std::size_t i = 0; i < rows.size(); ++i) {
                column[i] = {x_(rows[i], f), y_[rows[i]]};
            }
            std::sort(column.begin(), column.end());
            std::fill(left.begin(), left.end(), 0);
            Int128 left_sum = 0;
            Int128 right_sum = parent_sum;
            std::vector<std::size_t> right = counts;
            for (std::size_t i = 0; i + 1 < column.size(); ++i) {
                const auto c = column[i].second;
                left_sum += 2 * static_cast<Int128>(left[c]) + 1;
                right_sum -= 2 * static_cast<Int128>(right[c]) - 1;
                ++left[c];
                --right[c];
                const double lo = column[i].first;
                const double hi = column[i + 1].first;
                const std::size_t n_left = i + 1;
                const std::size_t n_right = column.size() - n_left;
                if (lo == hi || n_left < min_leaf || n_right < min_leaf) {
                    continue;
                }
                const SplitScore score{left_sum * static_cast<Int128>(n_right) +
                                           right_sum * static_cast<Int128>(n_left),
                                       static_cast<Int128>(n_left) * static_cast<Int128>(n_right)};
                if (score.better_than(best)) {
                    best = score;
                    best_feature = static_cast<int>(f);
                    double mid = lo + (hi - lo) / 2.0;
                    if (!(mid < hi)) {
                        mid = lo;
                    }
                    best_threshold = mid;
                }
            }
        }
        if (best_feature < 0) {
            nodes_[id].label = label;
            return id;
        }

        std::vector<std::size_t> left_rows;
        std::vector<std::size_t> right_rows;
        for (auto r : rows) {
            (x_(r, static_cast<std::size_t>(best_feature)) <= best_threshold ? left_rows : right_rows)
                .push_back(r);
        }
        const auto l = grow(left_rows, depth + 1);
        const auto r = grow(right_rows, depth + 1);
        auto& node = nodes_[id];
        node.feature = best_feature;
        node.threshold = best_threshold;
        node.left = l;
        node.right = r;
        node.label = label;
        return id;
    }

    const Matrix& x_;
    std::vector<std::size_t> y_;
    const std::vector<int>& classes_;
    std::size_t k_;
    Hyperparams hp_;
    std::vector<DecisionTreeModel::Node> nodes_;
};

} // namespace

std::unique_ptr<DecisionTreeModel> train_dt(const Matrix& x, std::span<const int> y,
                                            const Hyperparams& hp) {
    check_training_set(x, y);
    auto classes = unique_sorted(y);
    std::vector<std::size_t> idx(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) {
        idx[i] = class_index(classes, y[i]);
    }
    auto nodes = TreeBuilder(x, std::move(idx), classes, hp).build();
    return std::make_unique<DecisionTreeModel>(std::move(classes), x.cols(), std::move(nodes));
}

// ---------------------------------------------------------------------------
// Linear SVM
// ---------------------------------------------------------------------------

LinearSvmModel::LinearSvmModel(std::vector<int> classes, Matrix weights, std::vector<double> biases)
    : Classifier(std::move(classes)), weights_(std::move(weights)), biases_(std::move(biases)) {
    if (weights_.rows() != classes_.size() || biases_.size() != classes_.size()) {
        throw ShapeError("SVM needs one weight vector and bias per class");
    }
}

std::vector<double> LinearSvmModel::decision_values(std::span<const double> row) const {
    check_width(row.size());
    std::vector<double> out(classes_.size());
    for (std::size_t c = 0; c < classes_.size(); ++c) {
        const auto w = weights_.row(c);
        out[c] = std::inner_product(w.begin(), w.end(), row.begin(), biases_[c]);
    }
    return out;
}

int LinearSvmModel::predict_one(std::span<const double> row) const {
    const auto values = decision_values(row);
    std::size_t best = 0;
    for (std::size_t c = 1; c < values.size(); ++c) {
        if (values[c] > values[best]) {
            best = c;
        }
    }
    return classes_[best];
}

void LinearSvmModel::save_body(text::TokenWriter& out) const {
    write_ints(out, "classes", classes_);
    write_doubles(out, "biases", biases_);
    write_matrix(out, "weights", weights_);
}

std::unique_ptr<LinearSvmModel> LinearSvmModel::load_body(text::TokenReader& in) {
    auto classes = read_ints(in, "classes");
    auto biases = read_doubles(in, "biases");
    auto weights = read_matrix(in, "weights");
    return std::make_unique<LinearSvmModel>(std::move(classes), std::move(weights), std::move(biases));
}

std::unique_ptr<LinearSvmModel> train_svm(const Matrix& x, std::span<const int> y,
                                          const Hyperparams& hp) {
    check_training_set(x, y);
    if (!(hp.svm_lambda > 0.0)) {
        throw HyperparameterError("SVM regularization must be positive");
    }
    if (hp.svm_epochs < 1) {
        throw HyperparameterError("SVM needs at least one epoch");
    }
    auto classes = unique_sorted(y);
    const std::size_t n = x.rows();
    const std::size_t p = x.cols();

    double mean_sq_norm = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const auto r = x.row(i);
        mean_sq_norm += std::inner_product(r.begin(), r.end(), r.begin(), 0.0);
    }
    mean_sq_norm /= static_cast<double>(n);
    // step size eta_t = 1 / (lambda (t0 + t)), starting near 1 / E|x|^2
    const double eta0 = 1.0 / std::max(1.0, mean_sq_norm);
    const double t0 = 1.0 / (hp.svm_lambda * eta0);

    std::vector<std::vector<std::size_t>> orders(hp.svm_epochs, std::vector<std::size_t>(n));
    Rng rng(hp.seed);
    for (auto& order : orders) {
        std::iota(order.begin(), order.end(), 0);
        rng.shuffle(order.begin(), order.end());
    }

    Matrix weights(classes.size(), p);
    std::vector<double> biases(classes.size(), 0.0);
    parallel_for(classes.size(), [&](std::size_t c0, std::size_t c1) {
        for (std::size_t c = c0; c < c1; ++c) {
            auto w = weights.row(c);
            double b = 0.0;
            // w is stored as scale * v so the shrink step stays O(1)
            std::vector<double> v(p, 0.0);
            double scale = 1.0;
            double t = 0.0;
            for (const auto& order : orders) {
                for (auto i : order) {
                    const auto r = x.row(i);
                    const double target = y[i] == classes[c] ? 1.0 : -1.0;
                    const double eta = 1.0 / (hp.svm_lambda * (t0 + t));
                    const double margin =
                        target * (scale * std::inner_product(v.begin(), v.end(), r.begin(), 0.0) + b);
                    scale *= 1.0 - eta * hp.svm_lambda;
                    if (margin < 1.0) {
                        const double step = eta * target / scale;
                        for (std::size_t j = 0; j < p; ++j) {
                            v[j] += step * r[j];
                        }
                        b += eta * target;
                    }
                    if (scale < 1e-9) {
                        for (auto& vj : v) {
                            vj *= scale;
                        }
                        scale = 1.0;
                    }
                    t += 1.0;
                }
            }
            for (std::size_t j = 0; j < p; ++j) {
                w[j] = scale * v[j];
            }
            biases[c] = b;
        }
    });
    return std::make_unique<LinearSvmModel>(std::move(classes), std::move(weights), std::move(biases));
}

// ---------------------------------------------------------------------------
// Dispatch and persistence
// ---------------------------------------------------------------------------

std::unique_ptr<Classifier> train(ClassifierKind kind, const Matrix& x, std::span<const int> y,
                                  const Hyperparams& hp) {
    switch (kind) {
    case ClassifierKind::knn: return train_knn(x, y, hp);
    case ClassifierKind::nb: return train_nb(x, y, hp);
    case ClassifierKind::dt: return train_dt(x, y, hp);
    case ClassifierKind::svm: return train_svm(x, y, hp);
    }
    throw ValidationError("unknown classifier kind");
}

std::unique_ptr<Classifier> train(ClassifierKind kind, const FeatureMatrix& rows,
                                  const Hyperparams& hp) {
    rows.check_consistent();
    return train(kind, rows.values, rows.labels, hp);
}

void save_classifier(std::ostream& out, const Classifier& model) {
    text::TokenWriter w(out);
    w.word("emgpr-model").integer(1).endl();
    w.word("kind").word(to_string(model.kind())).endl();
    model.save_body(w);
    w.word("end-model").endl();
}

std::unique_ptr<Classifier> load_classifier(std::istream& in) {
    text::TokenReader r(in);
    r.expect("emgpr-model");
    if (r.integer() != 1) {
        throw FormatError("unsupported model format version");
    }
    r.expect("kind");
    const auto kind_name = r.word();
    ClassifierKind kind;
    try {
        kind = classifier_kind_from_string(kind_name);
    } catch (const ValidationError&) {
        throw FormatError("unknown model kind '" + kind_name + "'");
    }
    std::unique_ptr<Classifier> model;
    switch (kind) {
    case ClassifierKind::knn: model = KnnModel::load_body(r); break;
    case ClassifierKind::nb: model = GaussianNbModel::load_body(r); break;
    case ClassifierKind::dt: model = DecisionTreeModel::load_body(r); break;
    case ClassifierKind::svm: model = LinearSvmModel::load_body(r); break;
    }
    r.expect("end-model");
    return model;
}

} // namespace emgpr
