#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace emgpr {

/// Top-1 accuracy in percent. Throws on empty or mismatched input.
double accuracy(std::span<const int> predicted, std::span<const int> truth);

/// Rows are true classes, columns predicted classes.
struct ConfusionMatrix {
    std::vector<int> classes;
    std::vector<std::size_t> counts; // row-major K x K

    std::size_t size() const noexcept { return classes.size(); }
    std::size_t at(std::size_t truth, std::size_t predicted) const {
        return counts[truth * classes.size() + predicted];
    }
    std::size_t total() const;
    std::size_t trace() const;
    double accuracy_pct() const;
    /// Recall per true class in percent; 0 for classes absent from the truth.
    std::vector<double> per_class_accuracy() const;

    friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;
};

/// Throws LabelError for labels outside `classes`.
ConfusionMatrix confusion(std::span<const int> predicted, std::span<const int> truth,
                          std::span<const int> classes);

/// Replaces each prediction with the majority vote over its trial, a trial being
/// the rows sharing (true label, repetition). Vote ties go to the lower label.
std::vector<int> vote_per_trial(std::span<const int> predicted, std::span<const int> truth,
                                std::span<const int> repetitions);

struct EvalReport {
    int subject_id = 0;
    std::string technique;
    std::string config;
    std::string classifier;
    double accuracy_pct = 0.0;
    std::vector<double> per_class_accuracy;
    ConfusionMatrix confusion;
    std::size_t n_train = 0;
    std::size_t n_test = 0;
};

EvalReport make_report(int subject_id, std::string technique, std::string config,
                       std::string classifier, std::span<const int> predicted,
                       std::span<const int> truth, std::span<const int> classes,
                       std::size_t n_train);

struct GroupSummary {
    struct Group {
        int first_subject = 0;
        int last_subject = 0;
        std::vector<int> subjects;
    };
    struct Entry {
        std::size_t group = 0;
        std::string technique;
        std::string config;
        std::string classifier;
        double mean_accuracy_pct = 0.0;
        std::size_t n_subjects = 0;
    };

    std::vector<Group> groups;
    std::vector<Entry> entries;
};

/// Averages overall accuracy per (technique, config, classifier) over
/// consecutive groups of `group_size` subjects ordered by id.
GroupSummary group_average(std::span<const EvalReport> reports, std::size_t group_size = 10);

/// `subject,technique,config,classifier,accuracy_pct,n_train,n_test`
void write_report_csv(std::ostream& out, std::span<const EvalReport> reports);
/// `group,first_subject,last_subject,technique,config,classifier,mean_accuracy_pct,n_subjects`
void write_summary_csv(std::ostream& out, const GroupSummary& summary);
/// Header `truth\predicted,<classes...>`, one row per true class.
void write_confusion_csv(std::ostream& out, const ConfusionMatrix& cm);

/// Fixed four-decimal rendering used for percentages in reports.
std::string format_pct(double pct);

} // namespace emgpr
