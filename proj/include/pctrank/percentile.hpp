#pragma once

// Percentile assignment. A paper's raw percentage is the share of its
// reference set with strictly fewer citations; tied counts do not count as
// "fewer than", so uncited papers land in the 0th percentile class. Classes
// are the floor of the raw percentage (0-99), ranks run 1-100.

#include <array>
#include <map>
#include <unordered_map>

#include "pctrank/types.hpp"

namespace pctrank {

// Per-subset tally over the 100 percentile classes: bins[j] = number of
// member papers in class j (rank j + 1).
struct PercentileVector {
    std::string subset_id;
    std::array<long long, 100> bins{};

    long long total() const {
        long long n = 0;
        for (long long b : bins) n += b;
        return n;
    }

    bool operator==(const PercentileVector&) const = default;
};

inline PercentileScore compute_percentile(long long citations, const ReferenceDistribution& ref) {
    if (ref.counts.empty())
        throw std::invalid_argument("reference set '" + ref.reference_key + "' is empty and unusable");

    long long fewer = 0;
    for (long long c : ref.counts)
        if (c < citations) ++fewer;

    const auto size = static_cast<long long>(ref.counts.size());
    if (fewer == size)
        throw std::invalid_argument("citation count " + std::to_string(citations) +
                                    " exceeds every value in reference set '" + ref.reference_key +
                                    "'; the paper must be a member of its own reference set");

    PercentileScore score;
    // Integer arithmetic keeps the floor exact; fewer < size guarantees a
    // class in [0, 99].
    score.percentile_class = static_cast<int>((100 * fewer) / size);
    score.rank = score.percentile_class + 1;
    score.raw_percentage = 100.0 * static_cast<double>(fewer) / static_cast<double>(size);
    return score;
}

// Scores every paper against its reference distribution. Distributions are
// sorted once and reused, so assignment of large corpora stays cheap; the
// result is identical to calling compute_percentile() per paper.
inline std::map<std::string, PercentileScore>
assign_percentiles(const std::vector<PaperRecord>& papers,
                   const std::vector<ReferenceDistribution>& refs) {
    std::unordered_map<std::string, std::vector<long long>> sorted;
    sorted.reserve(refs.size());
    for (const auto& ref : refs) {
        auto counts = ref.counts;
        std::sort(counts.begin(), counts.end());
        sorted.emplace(ref.reference_key, std::move(counts));
    }

    std::map<std::string, PercentileScore> scores;
    for (const auto& paper : papers) {
        auto it = sorted.find(paper.reference_key);
        if (it == sorted.end())
            throw std::invalid_argument("paper '" + paper.paper_id + "': missing reference set '" +
                                        paper.reference_key + "'");
        const auto& counts = it->second;
        if (counts.empty())
            throw std::invalid_argument("paper '" + paper.paper_id + "': reference set '" +
                                        paper.reference_key + "' is empty");

        const auto fewer = static_cast<long long>(
            std::lower_bound(counts.begin(), counts.end(), paper.citations) - counts.begin());
        const auto size = static_cast<long long>(counts.size());
        if (fewer == size)
            throw std::invalid_argument("paper '" + paper.paper_id +
                                        "': citation count exceeds every value in reference set '" +
                                        paper.reference_key + "'");

        PercentileScore score;
        score.percentile_class = static_cast<int>((100 * fewer) / size);
        score.rank = score.percentile_class + 1;
        score.raw_percentage = 100.0 * static_cast<double>(fewer) / static_cast<double>(size);

        if (!scores.emplace(paper.paper_id, score).second)
            throw std::invalid_argument("duplicate paper id '" + paper.paper_id + "'");
    }
    return scores;
}

inline PercentileVector percentile_vector(const std::string& subset_id,
                                          const std::vector<PaperRecord>& papers,
                                          const std::map<std::string, PercentileScore>& scores) {
    PercentileVector vec;
    vec.subset_id = subset_id;

    bool known = false;
    for (const auto& paper : papers) {
        if (std::find(paper.subset_ids.begin(), paper.subset_ids.end(), subset_id) ==
            paper.subset_ids.end())
            continue;
        known = true;
        auto it = scores.find(paper.paper_id);
        if (it == scores.end())
            throw std::invalid_argument("paper '" + paper.paper_id + "' has no percentile score");
        ++vec.bins[static_cast<std::size_t>(it->second.percentile_class)];
    }
    if (!known)
        throw std::invalid_argument("unknown subset id '" + subset_id + "'");
    return vec;
}

// Expands a vector back to its per-paper rank values (1-100), the form the
// rank tests consume. Deterministic: ascending by class.
inline std::vector<double> rank_observations(const PercentileVector& vec) {
    std::vector<double> values;
    values.reserve(static_cast<std::size_t>(vec.total()));
    for (std::size_t j = 0; j < vec.bins.size(); ++j)
        for (long long i = 0; i < vec.bins[j]; ++i)
            values.push_back(static_cast<double>(j + 1));
    return values;
}

} // namespace pctrank
