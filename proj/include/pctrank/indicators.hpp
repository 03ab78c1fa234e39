#pragma once

// Percentile-rank impact indicators. R(i) weights each scheme class's
// within-subset relative frequency with the class weight; R(i,k) normalizes
// the frequencies over the grand total of all subsets instead and multiplies
// by the number of subsets k, which removes the productivity penalty of the
// within-subset form. The two averages-based citations-per-paper indicators
// they replace (rate of averages and mean of rates) are provided for
// comparison.

#include <cmath>

#include "pctrank/percentile.hpp"
#include "pctrank/schemes.hpp"
#include "pctrank/types.hpp"

namespace pctrank {

// Per-class paper counts n_r for one subset.
struct SubsetClassCounts {
    std::string subset_id;
    std::vector<long long> counts;

    long long total() const {
        long long n = 0;
        for (long long c : counts) n += c;
        return n;
    }

    bool operator==(const SubsetClassCounts&) const = default;
};

// k = number of subsets, grand_total = total memberships N over all subsets.
struct NormalizationContext {
    int k = 1;
    long long grand_total = 0;

    bool operator==(const NormalizationContext&) const = default;
};

// Observed citations c and expected citations e (the reference-set mean)
// for one paper.
struct CitationPair {
    std::string paper_id;
    double citations = 0.0;
    double expected = 0.0;

    bool operator==(const CitationPair&) const = default;
};

struct ValueWithError {
    double value = 0.0;
    std::optional<double> standard_error;

    bool operator==(const ValueWithError&) const = default;
};

inline SubsetClassCounts subset_class_counts(const PercentileVector& vec, const ClassScheme& scheme) {
    return {vec.subset_id, aggregate_bins(vec, scheme)};
}

namespace detail {

inline void check_counts(const SubsetClassCounts& counts, const ClassScheme& scheme) {
    if (counts.counts.size() != scheme.size())
        throw std::invalid_argument("subset '" + counts.subset_id + "': " +
                                    std::to_string(counts.counts.size()) + " class counts against a " +
                                    std::to_string(scheme.size()) + "-class scheme");
    for (long long c : counts.counts)
        if (c < 0) throw std::invalid_argument("subset '" + counts.subset_id + "': negative class count");
}

inline double weighted_sum(const SubsetClassCounts& counts, const ClassScheme& scheme) {
    double sum = 0.0;
    for (std::size_t r = 0; r < scheme.size(); ++r)
        sum += scheme.classes[r].weight * static_cast<double>(counts.counts[r]);
    return sum;
}

// Sample standard deviation (n-1 denominator) of the per-paper class
// weights, computed from the class counts.
inline double weight_sample_sd(const SubsetClassCounts& counts, const ClassScheme& scheme) {
    const auto n = static_cast<double>(counts.total());
    const double mean = weighted_sum(counts, scheme) / n;
    double ss = 0.0;
    for (std::size_t r = 0; r < scheme.size(); ++r) {
        const double d = scheme.classes[r].weight - mean;
        ss += static_cast<double>(counts.counts[r]) * d * d;
    }
    return std::sqrt(ss / (n - 1.0));
}

} // namespace detail

// Standard error of the mean class weight: sample SD / sqrt(n).
inline double standard_error(const SubsetClassCounts& counts, const ClassScheme& scheme) {
    detail::check_counts(counts, scheme);
    const long long n = counts.total();
    if (n < 2)
        throw degenerate_error("subset '" + counts.subset_id +
                               "': standard error undefined for fewer than two papers");
    return detail::weight_sample_sd(counts, scheme) / std::sqrt(static_cast<double>(n));
}

// R(i): sum over classes of weight_r * (n_r / n). Stays within
// [min weight, max weight] of the scheme.
inline IndicatorResult r_within(const SubsetClassCounts& counts, const ClassScheme& scheme) {
    detail::check_counts(counts, scheme);
    const long long n = counts.total();
    if (n == 0)
        throw std::invalid_argument("subset '" + counts.subset_id + "' is empty");

    IndicatorResult result;
    result.subset_id = counts.subset_id;
    result.value = detail::weighted_sum(counts, scheme) / static_cast<double>(n);
    if (n >= 2)
        result.standard_error = detail::weight_sample_sd(counts, scheme) / std::sqrt(static_cast<double>(n));
    return result;
}

// R(i,k): k * sum over classes of weight_r * (n_r / N). Identical to
// (k*n/N) * R(i); may exceed the scheme maximum when the subset is large
// relative to N/k. The standard error is the within-subset one scaled by
// the same k*n/N factor.
inline IndicatorResult r_across(const SubsetClassCounts& counts, const NormalizationContext& ctx,
                                const ClassScheme& scheme) {
    detail::check_counts(counts, scheme);
    const long long n = counts.total();
    if (n == 0)
        throw std::invalid_argument("subset '" + counts.subset_id + "' is empty");
    if (ctx.k < 1)
        throw std::invalid_argument("normalization context: k must be at least 1");
    if (ctx.grand_total < n)
        throw std::invalid_argument("normalization context: grand total " +
                                    std::to_string(ctx.grand_total) + " smaller than subset size " +
                                    std::to_string(n));

    const double scale =
        static_cast<double>(ctx.k) * static_cast<double>(n) / static_cast<double>(ctx.grand_total);

    IndicatorResult result;
    result.subset_id = counts.subset_id;
    result.value = static_cast<double>(ctx.k) * detail::weighted_sum(counts, scheme) /
                   static_cast<double>(ctx.grand_total);
    if (n >= 2)
        result.standard_error = scale * detail::weight_sample_sd(counts, scheme) /
                                std::sqrt(static_cast<double>(n));
    return result;
}

// Expected indicator value under random attribution: papers distributed
// according to the scheme's expected proportions.
inline double baseline_r(const ClassScheme& scheme) {
    double expected = 0.0;
    for (const auto& c : scheme.classes) expected += c.expected_proportion * c.weight;
    return expected;
}

// Mean percentile rank (1-100) of a subset; equal to R(i) under the
// 100-class identity scheme.
inline ValueWithError mean_percentile(const PercentileVector& vec) {
    const long long n = vec.total();
    if (n == 0)
        throw std::invalid_argument("subset '" + vec.subset_id + "' is empty");

    double sum = 0.0;
    for (std::size_t j = 0; j < vec.bins.size(); ++j)
        sum += static_cast<double>(vec.bins[j]) * static_cast<double>(j + 1);
    const double mean = sum / static_cast<double>(n);

    ValueWithError result;
    result.value = mean;
    if (n >= 2) {
        double ss = 0.0;
        for (std::size_t j = 0; j < vec.bins.size(); ++j) {
            const double d = static_cast<double>(j + 1) - mean;
            ss += static_cast<double>(vec.bins[j]) * d * d;
        }
        result.standard_error =
            std::sqrt(ss / (static_cast<double>(n) - 1.0)) / std::sqrt(static_cast<double>(n));
    }
    return result;
}

// Rate of averages, Avg(c)/Avg(e) = sum(c_i) / sum(e_i): the classic
// aggregate-then-divide citations-per-paper indicator.
inline double rate_of_averages(const std::vector<CitationPair>& pairs) {
    if (pairs.empty())
        throw std::invalid_argument("rate_of_averages: no citation pairs");
    double c_sum = 0.0, e_sum = 0.0;
    for (const auto& p : pairs) {
        c_sum += p.citations;
        e_sum += p.expected;
    }
    if (e_sum <= 0.0)
        throw degenerate_error("rate_of_averages: expected citations sum to zero");
    return c_sum / e_sum;
}

// Mean of rates, Avg(c/e) = (1/n) sum(c_i/e_i): normalize each paper first,
// then average. A paper whose reference set is entirely uncited (e = 0)
// aborts the computation rather than being skipped, since skipping would
// silently change n.
inline ValueWithError mean_of_rates(const std::vector<CitationPair>& pairs) {
    if (pairs.empty())
        throw std::invalid_argument("mean_of_rates: no citation pairs");

    std::vector<double> ratios;
    ratios.reserve(pairs.size());
    for (const auto& p : pairs) {
        if (p.expected <= 0.0)
            throw degenerate_error("mean_of_rates: paper '" + p.paper_id +
                                   "' has zero expected citations (entirely uncited reference set)");
        ratios.push_back(p.citations / p.expected);
    }

    const auto n = static_cast<double>(ratios.size());
    double mean = 0.0;
    for (double r : ratios) mean += r;
    mean /= n;

    ValueWithError result;
    result.value = mean;
    if (ratios.size() >= 2) {
        double ss = 0.0;
        for (double r : ratios) ss += (r - mean) * (r - mean);
        result.standard_error = std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
    }
    return result;
}

// Competition ranking, highest value first: tied values share the smaller
// rank and the next rank skips accordingly. Ties are ordered by subset id
// for determinism. Returns the results sorted by rank.
inline std::vector<IndicatorResult> rank_subsets(std::vector<IndicatorResult> results) {
    std::sort(results.begin(), results.end(), [](const IndicatorResult& a, const IndicatorResult& b) {
        if (a.value != b.value) return a.value > b.value;
        return a.subset_id < b.subset_id;
    });
    for (std::size_t i = 0; i < results.size(); ++i) {
        if (i > 0 && results[i].value == results[i - 1].value)
            results[i].rank_among_subsets = results[i - 1].rank_among_subsets;
        else
            results[i].rank_among_subsets = static_cast<int>(i + 1);
    }
    return results;
}

} // namespace pctrank
