#include "emgpr/evaluation.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <ostream>
#include <tuple>

#include "emgpr/error.hpp"

namespace emgpr {

double accuracy(std::span<const int> predicted, std::span<const int> truth) {
    if (predicted.size() != truth.size()) {
        throw ShapeError("prediction and truth lengths differ");
    }
    if (truth.empty()) {
        throw DataError("accuracy of an empty evaluation set");
    }
    std::size_t hits = 0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        hits += predicted[i] == truth[i] ? 1 : 0;
    }
    return 100.0 * static_cast<double>(hits) / static_cast<double>(truth.size());
}

std::size_t ConfusionMatrix::total() const {
    std::size_t t = 0;
    for (auto c : counts) {
        t += c;
    }
    return t;
}

std::size_t ConfusionMatrix::trace() const {
    std::size_t t = 0;
    for (std::size_t i = 0; i < size(); ++i) {
        t += at(i, i);
    }
    return t;
}

double ConfusionMatrix::accuracy_pct() const {
    const auto t = total();
    return t == 0 ? 0.0 : 100.0 * static_cast<double>(trace()) / static_cast<double>(t);
}

std::vector<double> ConfusionMatrix::per_class_accuracy() const {
    std::vector<double> out(size(), 0.0);
    for (std::size_t i = 0; i < size(); ++i) {
        std::size_t row = 0;
        for (std::size_t j = 0; j < size(); ++j) {
            row += at(i, j);
        }
        if (row > 0) {
            out[i] = 100.0 * static_cast<double>(at(i, i)) / static_cast<double>(row);
        }
    }
    return out;
}

ConfusionMatrix confusion(std::span<const int> predicted, std::span<const int> truth,
                          std::span<const int> classes) {
    if (predicted.size() != truth.size()) {
        throw ShapeError("prediction and truth lengths differ");
    }
    ConfusionMatrix cm;
    cm.classes.assign(classes.begin(), classes.end());
    std::map<int, std::size_t> index;
    for (std::size_t i = 0; i < cm.classes.size(); ++i) {
        if (!index.emplace(cm.classes[i], i).second) {
            throw LabelError("duplicate class " + std::to_string(cm.classes[i]));
        }
    }
    const std::size_t k = cm.classes.size();
    cm.counts.assign(k * k, 0);
    auto lookup = [&](int label) {
        const auto it = index.find(label);
        if (it == index.end()) {
            throw LabelError("label " + std::to_string(label) + " is not in the class list");
        }
        return it->second;
    };
    for (std::size_t i = 0; i < truth.size(); ++i) {
        ++cm.counts[lookup(truth[i]) * k + lookup(predicted[i])];
    }
    return cm;
}

std::vector<int> vote_per_trial(std::span<const int> predicted, std::span<const int> truth,
                                std::span<const int> repetitions) {
    if (predicted.size() != truth.size() || repetitions.size() != truth.size()) {
        throw ShapeError("trial vote inputs differ in length");
    }
    std::map<std::pair<int, int>, std::map<int, std::size_t>> tallies;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        ++tallies[{truth[i], repetitions[i]}][predicted[i]];
    }
    std::map<std::pair<int, int>, int> winner;
    for (const auto& [trial, votes] : tallies) {
        int best = votes.begin()->first;
        std::size_t best_count = 0;
        for (const auto& [label, count] : votes) {
            if (count > best_count) {
                best = label;
                best_count = count;
            }
        }
        winner[trial] = best;
    }
    std::vector<int> out(truth.size());
    for (std::size_t i = 0; i < truth.size(); ++i) {
        out[i] = winner[{truth[i], repetitions[i]}];
    }
    return out;
}

EvalReport make_report(int subject_id, std::string technique, std::string config,
                       std::string classifier, std::span<const int> predicted,
                       std::span<const int> truth, std::span<const int> classes,
                       std::size_t n_train) {
    EvalReport r;
    r.subject_id = subject_id;
    r.technique = std::move(technique);
    r.config = std::move(config);
    r.classifier = std::move(classifier);
    r.confusion = confusion(predicted, truth, classes);
    r.accuracy_pct = accuracy(predicted, truth);
    r.per_class_accuracy = r.confusion.per_class_accuracy();
    r.n_train = n_train;
    r.n_test = truth.size();
    return r;
}

GroupSummary group_average(std::span<const EvalReport> reports, std::size_t group_size) {
    if (reports.empty()) {
        throw DataError("no reports to summarize");
    }
    if (group_size < 1) {
        throw ValidationError("group size must be at least 1");
    }
    std::vector<int> subjects;
    for (const auto& r : reports) {
        subjects.push_back(r.subject_id);
    }
    std::sort(subjects.begin(), subjects.end());
    subjects.erase(std::unique(subjects.begin(), subjects.end()), subjects.end());

    GroupSummary summary;
    std::map<int, std::size_t> group_of;
    for (std::size_t i = 0; i < subjects.size(); ++i) {
        if (i % group_size == 0) {
            summary.groups.push_back({subjects[i], subjects[i], {}});
        }
        auto& g = summary.groups.back();
        g.last_subject = subjects[i];
        g.subjects.push_back(subjects[i]);
        group_of[subjects[i]] = summary.groups.size() - 1;
    }

    using Key = std::tuple<std::size_t, std::string, std::string, std::string>;
    std::map<Key, std::pair<double, std::size_t>> sums;
    std::vector<Key> order;
    for (const auto& r : reports) {
        Key key{group_of[r.subject_id], r.technique, r.config, r.classifier};
        auto [it, inserted] = sums.try_emplace(key, 0.0, 0);
        if (inserted) {
            order.push_back(key);
        }
        it->second.first += r.accuracy_pct;
        it->second.second += 1;
    }
    std::stable_sort(order.begin(), order.end(), [](const Key& a, const Key& b) {
        return std::get<0>(a) < std::get<0>(b);
    });
    for (const auto& key : order) {
        const auto& [sum, n] = sums[key];
        summary.entries.push_back({std::get<0>(key), std::get<1>(key), std::get<2>(key),
                                   std::get<3>(key), sum / static_cast<double>(n), n});
    }
    return summary;
}

std::string format_pct(double pct) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4f", pct);
    return buf;
}

void write_report_csv(std::ostream& out, std::span<const EvalReport> reports) {
    out << "subject,technique,config,classifier,accuracy_pct,n_train,n_test\n";
    for (const auto& r : reports) {
        out << r.subject_id << ',' << r.technique << ',' << r.config << ',' << r.classifier << ','
            << format_pct(r.accuracy_pct) << ',' << r.n_train << ',' << r.n_test << '\n';
    }
}

void write_summary_csv(std::ostream& out, const GroupSummary& summary) {
    out << "group,first_subject,last_subject,technique,config,classifier,mean_accuracy_pct,"
           "n_subjects\n";
    for (const auto& e : summary.entries) {
        const auto& g = summary.groups[e.group];
        out << e.group + 1 << ',' << g.first_subject << ',' << g.last_subject << ',' << e.technique
            << ',' << e.config << ',' << e.classifier << ',' << format_pct(e.mean_accuracy_pct)
            << ',' << e.n_subjects << '\n';
    }
}

void write_confusion_csv(std::ostream& out, const ConfusionMatrix& cm) {
    out << "truth\\predicted";
    for (int c : cm.classes) {
        out << ',' << c;
    }
    out << '\n';
    for (std::size_t i = 0; i < cm.size(); ++i) {
        out << cm.classes[i];
        for (std::size_t j = 0; j < cm.size(); ++j) {
            out << ',' << cm.at(i, j);
        }
        out << '\n';
    }
}

} // namespace emgpr
