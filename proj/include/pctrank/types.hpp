#pragma once

// Core domain types shared by the percentile engine, the indicator
// calculations and the statistics battery, plus dataset-level validation.

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace pctrank {

// An operation that cannot produce a meaningful result from the data it was
// given (e.g. a signed-rank test where every difference is zero).
class degenerate_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Malformed input file; the message carries file name and line number.
class parse_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// One publication. A paper may belong to several subsets (coauthored work);
// subset-level statistics count it once per membership.
struct PaperRecord {
    std::string paper_id;
    long long citations = 0;
    std::string reference_key;
    std::vector<std::string> subset_ids;

    bool operator==(const PaperRecord&) const = default;
};

// Citation counts of all comparable papers (same journal / year / document
// type). A paper's own count is expected to appear among counts: the paper
// is a member of its own reference set and the denominator is the full set.
struct ReferenceDistribution {
    std::string reference_key;
    std::vector<long long> counts;

    bool operator==(const ReferenceDistribution&) const = default;
};

// Percentile classes run 0-99, ranks 1-100; rank = class + 1 and
// class = floor(raw_percentage).
struct PercentileScore {
    int percentile_class = 0;
    int rank = 1;
    double raw_percentage = 0.0;

    bool operator==(const PercentileScore&) const = default;
};

struct SchemeClass {
    int lower_bound = 0;               // inclusive percentile-class bound
    double weight = 0.0;
    double expected_proportion = 0.0;

    bool operator==(const SchemeClass&) const = default;
};

// Ordered percentile-class bins. Intervals are half-open
// [lower_bound_j, lower_bound_{j+1}) and the last class is unbounded above.
struct ClassScheme {
    std::string name;
    std::vector<SchemeClass> classes;

    std::size_t size() const { return classes.size(); }

    bool operator==(const ClassScheme&) const = default;
};

// Subsets x classes count matrix.
struct ContingencyTable {
    std::vector<std::string> subset_ids;
    std::vector<std::string> class_labels;
    std::vector<std::vector<long long>> counts;

    long long row_total(std::size_t row) const {
        return std::accumulate(counts[row].begin(), counts[row].end(), 0LL);
    }
    long long grand_total() const {
        long long total = 0;
        for (std::size_t r = 0; r < counts.size(); ++r) total += row_total(r);
        return total;
    }

    bool operator==(const ContingencyTable&) const = default;
};

// One indicator value for one subset. standard_error is absent when the
// subset has fewer than two papers; rank_among_subsets is filled by
// rank_subsets() (1 = highest value).
struct IndicatorResult {
    std::string subset_id;
    double value = 0.0;
    std::optional<double> standard_error;
    std::optional<int> rank_among_subsets;

    bool operator==(const IndicatorResult&) const = default;
};

struct Violation {
    std::string paper_id;   // empty for dataset-level findings
    std::string message;

    bool operator==(const Violation&) const = default;
    bool operator<(const Violation& other) const {
        return std::tie(paper_id, message) < std::tie(other.paper_id, other.message);
    }
};

// Reports every rule the dataset breaks; an empty result means the dataset
// is usable. Callers decide whether to abort. The report is sorted, so the
// outcome does not depend on input order.
inline std::vector<Violation> validate_dataset(const std::vector<PaperRecord>& papers,
                                               const std::vector<ReferenceDistribution>& refs) {
    std::vector<Violation> out;

    std::unordered_map<std::string, const ReferenceDistribution*> by_key;
    for (const auto& ref : refs) {
        if (!by_key.emplace(ref.reference_key, &ref).second)
            out.push_back({"", "duplicate reference set '" + ref.reference_key + "'"});
        if (ref.counts.empty())
            out.push_back({"", "reference set '" + ref.reference_key + "' is empty"});
        for (long long c : ref.counts)
            if (c < 0) {
                out.push_back({"", "reference set '" + ref.reference_key + "' contains a negative count"});
                break;
            }
    }

    std::unordered_set<std::string> seen_ids;
    for (const auto& paper : papers) {
        if (paper.paper_id.empty())
            out.push_back({"", "paper with blank id"});
        if (!seen_ids.insert(paper.paper_id).second)
            out.push_back({paper.paper_id, "duplicate paper id"});
        if (paper.citations < 0)
            out.push_back({paper.paper_id, "negative citation count"});
        if (paper.subset_ids.empty())
            out.push_back({paper.paper_id, "no subset membership"});
        std::set<std::string> unique_subsets(paper.subset_ids.begin(), paper.subset_ids.end());
        if (unique_subsets.size() != paper.subset_ids.size())
            out.push_back({paper.paper_id, "duplicate subset membership"});

        auto it = by_key.find(paper.reference_key);
        if (it == by_key.end()) {
            out.push_back({paper.paper_id, "missing reference set '" + paper.reference_key + "'"});
        } else {
            const auto& counts = it->second->counts;
            if (std::find(counts.begin(), counts.end(), paper.citations) == counts.end())
                out.push_back({paper.paper_id,
                               "own citation count (" + std::to_string(paper.citations) +
                                   ") absent from reference set '" + paper.reference_key + "'"});
        }
    }

    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

// Total memberships: a paper in three subsets contributes three.
inline long long total_memberships(const std::vector<PaperRecord>& papers) {
    long long n = 0;
    for (const auto& paper : papers) n += static_cast<long long>(paper.subset_ids.size());
    return n;
}

// Subset ids in order of first appearance.
inline std::vector<std::string> subset_order(const std::vector<PaperRecord>& papers) {
    std::vector<std::string> order;
    std::unordered_set<std::string> seen;
    for (const auto& paper : papers)
        for (const auto& id : paper.subset_ids)
            if (seen.insert(id).second) order.push_back(id);
    return order;
}

} // namespace pctrank
