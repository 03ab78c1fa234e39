#pragma once

// Evaluation schemes: ordered percentile-class bins with weights and
// expected proportions. The built-in six-class scheme follows the NSF
// evaluation bins (bottom-50%, [50;75[, [75;90[, [90;95[, [95;99[, top-1%)
// with weights 1-6 and expected proportions 50:25:15:5:4:1.

#include <cmath>
#include <string>

#include "pctrank/percentile.hpp"
#include "pctrank/types.hpp"

namespace pctrank {

struct ClassAssignment {
    std::string paper_id;
    int class_index = 0;
    double weight = 0.0;

    bool operator==(const ClassAssignment&) const = default;
};

// Validates and returns a scheme. Bounds must start at 0 and increase
// strictly; weights must be non-negative (a zero-weight bottom class is a
// legitimate evaluation choice); expected proportions must sum to 1.
inline ClassScheme make_scheme(std::string name, std::vector<SchemeClass> classes) {
    if (classes.empty())
        throw std::invalid_argument("scheme '" + name + "': no classes");
    if (classes.front().lower_bound != 0)
        throw std::invalid_argument("scheme '" + name + "': first lower bound must be 0");

    double proportion_sum = 0.0;
    for (std::size_t j = 0; j < classes.size(); ++j) {
        const auto& c = classes[j];
        if (c.lower_bound < 0 || c.lower_bound > 99)
            throw std::invalid_argument("scheme '" + name + "': lower bound out of [0,99]");
        if (j > 0 && classes[j - 1].lower_bound >= c.lower_bound)
            throw std::invalid_argument("scheme '" + name + "': lower bounds must increase strictly");
        if (!(c.weight >= 0.0) || !std::isfinite(c.weight))
            throw std::invalid_argument("scheme '" + name + "': negative or non-finite weight");
        if (c.expected_proportion < 0.0 || c.expected_proportion > 1.0)
            throw std::invalid_argument("scheme '" + name + "': expected proportion out of [0,1]");
        proportion_sum += c.expected_proportion;
    }
    if (std::fabs(proportion_sum - 1.0) > 1e-9)
        throw std::invalid_argument("scheme '" + name + "': expected proportions must sum to 1");

    ClassScheme scheme;
    scheme.name = std::move(name);
    scheme.classes = std::move(classes);
    return scheme;
}

inline ClassScheme builtin_nsf6() {
    return make_scheme("nsf6", {
                                   {0, 1.0, 0.50},
                                   {50, 2.0, 0.25},
                                   {75, 3.0, 0.15},
                                   {90, 4.0, 0.05},
                                   {95, 5.0, 0.04},
                                   {99, 6.0, 0.01},
                               });
}

// 100 one-class-wide bins with weight = rank; the weighted mean under this
// scheme is the mean percentile rank.
inline ClassScheme percentile_identity_scheme() {
    std::vector<SchemeClass> classes;
    classes.reserve(100);
    for (int j = 0; j < 100; ++j)
        classes.push_back({j, static_cast<double>(j + 1), 0.01});
    return make_scheme("r100", std::move(classes));
}

// Largest class whose lower bound does not exceed the percentile class.
// Total: every class 0-99 maps somewhere.
inline int classify(const PercentileScore& score, const ClassScheme& scheme) {
    int index = 0;
    for (std::size_t j = 1; j < scheme.classes.size(); ++j) {
        if (scheme.classes[j].lower_bound <= score.percentile_class)
            index = static_cast<int>(j);
        else
            break;
    }
    return index;
}

inline ClassAssignment assign_class(const std::string& paper_id, const PercentileScore& score,
                                    const ClassScheme& scheme) {
    const int index = classify(score, scheme);
    return {paper_id, index, scheme.classes[static_cast<std::size_t>(index)].weight};
}

// Human-readable label for one class, in the half-open bracket style used
// for percentile intervals ("<50", "[50;75[", ">=99").
inline std::string class_label(const ClassScheme& scheme, std::size_t index) {
    const auto& classes = scheme.classes;
    if (index + 1 == classes.size())
        return classes.size() == 1 ? "all" : ">=" + std::to_string(classes[index].lower_bound);
    if (index == 0)
        return "<" + std::to_string(classes[1].lower_bound);
    return "[" + std::to_string(classes[index].lower_bound) + ";" +
           std::to_string(classes[index + 1].lower_bound) + "[";
}

// Aggregates one subset's 100-bin vector into scheme-class counts.
inline std::vector<long long> aggregate_bins(const PercentileVector& vec, const ClassScheme& scheme) {
    std::vector<long long> counts(scheme.size(), 0);
    for (int j = 0; j < 100; ++j) {
        PercentileScore probe;
        probe.percentile_class = j;
        probe.rank = j + 1;
        probe.raw_percentage = j;
        counts[static_cast<std::size_t>(classify(probe, scheme))] += vec.bins[static_cast<std::size_t>(j)];
    }
    return counts;
}

inline ContingencyTable contingency_table(const std::vector<PercentileVector>& vectors,
                                          const ClassScheme& scheme) {
    if (vectors.empty())
        throw std::invalid_argument("contingency table needs at least one subset vector");

    ContingencyTable table;
    std::unordered_set<std::string> seen;
    for (const auto& vec : vectors) {
        if (!seen.insert(vec.subset_id).second)
            throw std::invalid_argument("duplicate subset id '" + vec.subset_id + "'");
        table.subset_ids.push_back(vec.subset_id);
        table.counts.push_back(aggregate_bins(vec, scheme));
    }
    for (std::size_t c = 0; c < scheme.size(); ++c)
        table.class_labels.push_back(class_label(scheme, c));
    return table;
}

inline std::vector<double> expected_counts(const ClassScheme& scheme, long long n) {
    if (n <= 0)
        throw std::invalid_argument("expected_counts: subset size must be positive");
    std::vector<double> expected;
    expected.reserve(scheme.size());
    for (const auto& c : scheme.classes)
        expected.push_back(static_cast<double>(n) * c.expected_proportion);
    return expected;
}

} // namespace pctrank
