#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <span>
#include <string_view>
#include <vector>

#include "emgpr/feature_matrix.hpp"
#include "emgpr/matrix.hpp"

namespace emgpr {

namespace text {
class TokenWriter;
class TokenReader;
} // namespace text

// ---------------------------------------------------------------------------
// Standardization
// ---------------------------------------------------------------------------

struct StandardizationParams {
    std::vector<double> mean;
    std::vector<double> stddev; // floored at epsilon
    double epsilon = 1e-12;

    std::size_t size() const noexcept { return mean.size(); }
    void apply_inplace(std::span<double> row) const;

    friend bool operator==(const StandardizationParams&, const StandardizationParams&) = default;
};

/// Per-column mean and population standard deviation of the training rows.
StandardizationParams fit_standardizer(const Matrix& train, double epsilon = 1e-12);
Matrix apply_standardizer(const StandardizationParams& params, const Matrix& rows);

// ---------------------------------------------------------------------------
// Classifiers
// ---------------------------------------------------------------------------

enum class ClassifierKind { knn, nb, dt, svm };

std::string_view to_string(ClassifierKind kind);
ClassifierKind classifier_kind_from_string(std::string_view s);

struct Hyperparams {
    std::size_t knn_k = 5;
    double nb_var_smoothing = 1e-9;
    std::size_t dt_max_depth = 20;
    std::size_t dt_min_samples_leaf = 1;
    double svm_lambda = 1e-4;
    std::size_t svm_epochs = 10;
    std::uint64_t seed = 0;
};

class Classifier {
public:
    virtual ~Classifier() = default;

    virtual ClassifierKind kind() const = 0;
    virtual std::size_t num_features() const = 0;

    /// Training classes, ascending.
    const std::vector<int>& classes() const noexcept { return classes_; }

    virtual int predict_one(std::span<const double> row) const = 0;
    /// Throws ShapeError when the row width differs from num_features().
    virtual std::vector<int> predict(const Matrix& rows) const;

    virtual void save_body(text::TokenWriter& out) const = 0;

protected:
    Classifier() = default;
    explicit Classifier(std::vector<int> classes) : classes_(std::move(classes)) {}

    void check_width(std::size_t cols) const;

    std::vector<int> classes_;
};

/// Euclidean k-nearest neighbours.
///
/// Ties in votes go to the tied class holding the nearest neighbour; equal
/// distances order by training-row index.
class KnnModel final : public Classifier {
public:
    KnnModel(std::size_t k, Matrix train, std::vector<int> labels);

    ClassifierKind kind() const override { return ClassifierKind::knn; }
    std::size_t num_features() const override { return train_.cols(); }
    std::size_t k() const noexcept { return k_; }
    const Matrix& train_rows() const noexcept { return train_; }
    const std::vector<int>& train_labels() const noexcept { return labels_; }

    int predict_one(std::span<const double> row) const override;
    std::vector<int> predict(const Matrix& rows) const override;
    void save_body(text::TokenWriter& out) const override;
    static std::unique_ptr<KnnModel> load_body(text::TokenReader& in);

    /// Vote among neighbour indices sorted by (distance, index).
    int vote(std::span<const std::size_t> neighbours) const;

private:
    std::size_t k_;
    Matrix train_;
    std::vector<int> labels_;
    std::vector<double> sq_norms_;
};

/// Gaussian naive Bayes scored with summed log densities.
class GaussianNbModel final : public Classifier {
public:
    GaussianNbModel(std::vector<int> classes, std::vector<double> priors, Matrix means,
                    Matrix variances);

    ClassifierKind kind() const override { return ClassifierKind::nb; }
    std::size_t num_features() const override { return means_.cols(); }
    const std::vector<double>& priors() const noexcept { return priors_; }
    const Matrix& means() const noexcept { return means_; }
    const Matrix& variances() const noexcept { return variances_; }

    /// Unnormalized log posterior per class.
    std::vector<double> log_scores(std::span<const double> row) const;

    int predict_one(std::span<const double> row) const override;
    void save_body(text::TokenWriter& out) const override;
    static std::unique_ptr<GaussianNbModel> load_body(text::TokenReader& in);

private:
    std::vector<double> priors_;
    std::vector<double> log_priors_;
    Matrix means_;
    Matrix variances_;
    std::vector<double> log_norm_; // per class: -0.5 * sum log(2 pi var)
};

/// CART classification tree with Gini impurity. Rows with x <= threshold go left.
class DecisionTreeModel final : public Classifier {
public:
    struct Node {
        int feature = -1; // -1 marks a leaf
        double threshold = 0.0;
        std::size_t left = 0;
        std::size_t right = 0;
        int label = 0;

        bool is_leaf() const noexcept { return feature < 0; }
        friend bool operator==(const Node&, const Node&) = default;
    };

    DecisionTreeModel(std::vector<int> classes, std::size_t num_features, std::vector<Node> nodes);

    ClassifierKind kind() const override { return ClassifierKind::dt; }
    std::size_t num_features() const override { return num_features_; }
    const std::vector<Node>& nodes() const noexcept { return nodes_; }
    std::size_t depth() const;
    std::size_t leaf_count() const;

    int predict_one(std::span<const double> row) const override;
    void save_body(text::TokenWriter& out) const override;
    static std::unique_ptr<DecisionTreeModel> load_body(text::TokenReader& in);

private:
    std::size_t num_features_;
    std::vector<Node> nodes_; // nodes_[0] is the root
};

/// One-vs-rest linear SVM; predicts the class with the largest decision value.
class LinearSvmModel final : public Classifier {
public:
    LinearSvmModel(std::vector<int> classes, Matrix weights, std::vector<double> biases);

    ClassifierKind kind() const override { return ClassifierKind::svm; }
    std::size_t num_features() const override { return weights_.cols(); }
    const Matrix& weights() const noexcept { return weights_; }
    const std::vector<double>& biases() const noexcept { return biases_; }

    std::vector<double> decision_values(std::span<const double> row) const;

    int predict_one(std::span<const double> row) const override;
    void save_body(text::TokenWriter& out) const override;
    static std::unique_ptr<LinearSvmModel> load_body(text::TokenReader& in);

private:
    Matrix weights_; // one row per class
    std::vector<double> biases_;
};

std::unique_ptr<KnnModel> train_knn(const Matrix& x, std::span<const int> y, const Hyperparams& hp);
std::unique_ptr<GaussianNbModel> train_nb(const Matrix& x, std::span<const int> y,
                                          const Hyperparams& hp);
std::unique_ptr<DecisionTreeModel> train_dt(const Matrix& x, std::span<const int> y,
                                            const Hyperparams& hp);
std::unique_ptr<LinearSvmModel> train_svm(const Matrix& x, std::span<const int> y,
                                          const Hyperparams& hp);

/// Dispatches on `kind`. Throws DegenerateDataError for fewer than two classes.
std::unique_ptr<Classifier> train(ClassifierKind kind, const Matrix& x, std::span<const int> y,
                                  const Hyperparams& hp = {});
std::unique_ptr<Classifier> train(ClassifierKind kind, const FeatureMatrix& rows,
                                  const Hyperparams& hp = {});

/// Versioned single-file text layout:
///   emgpr-model 1
///   kind <knn|nb|dt|svm>
///   <kind-specific body>
void save_classifier(std::ostream& out, const Classifier& model);
std::unique_ptr<Classifier> load_classifier(std::istream& in);

} // namespace emgpr
