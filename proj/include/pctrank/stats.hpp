#pragma once

// Non-parametric test battery: Wilcoxon signed-rank, Mann-Whitney U,
// Kruskal-Wallis, Dunn's post-hoc with Bonferroni family correction,
// chi-square goodness of fit with expected-frequency validity checks,
// Cramer's V, and Goldstein-adjusted confidence intervals.
//
// Ties are midranked throughout; six-class data is massively tied, so the
// tie corrections are load-bearing, not decoration. The signed-rank and U
// tests enumerate their exact conditional distributions at desk scale
// (signed-rank m <= 20, U with n_a*n_b <= 400) and fall back to the normal
// approximation beyond that.

#include <cmath>
#include <cstdint>
#include <utility>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/normal.hpp>

#include "pctrank/types.hpp"

namespace pctrank {

enum class Method { exact, approximate };
enum class Alternative { two_sided, greater, less };

struct TestResult {
    double statistic = 0.0;
    double p_value = 1.0;
    std::optional<int> degrees_of_freedom;
    Method method = Method::approximate;
    std::vector<std::string> notes;

    bool operator==(const TestResult&) const = default;
};

// One Dunn pairwise comparison. significance is decided against the
// family-adjusted alpha; the confidence interval (on the mean-rank
// difference, at confidence 1 - adjusted alpha) is reported only for
// significant pairs.
struct PairwiseComparison {
    std::string subset_a;
    std::string subset_b;
    double mean_rank_a = 0.0;
    double mean_rank_b = 0.0;
    double z_statistic = 0.0;
    double p_value = 1.0;
    bool significant = false;
    std::optional<std::pair<double, double>> confidence_interval;

    bool operator==(const PairwiseComparison&) const = default;
};

struct Group {
    std::string id;
    std::vector<double> values;
};

namespace detail {

inline double normal_sf(double z) {
    static const boost::math::normal_distribution<double> norm;
    return boost::math::cdf(boost::math::complement(norm, z));
}

inline double normal_quantile(double p) {
    static const boost::math::normal_distribution<double> norm;
    return boost::math::quantile(norm, p);
}

inline double chi_squared_sf(double x, int df) {
    const boost::math::chi_squared_distribution<double> dist(static_cast<double>(df));
    return boost::math::cdf(boost::math::complement(dist, x));
}

struct RankedData {
    std::vector<double> ranks;   // midranks, parallel to the input
    double tie_sum = 0.0;        // sum over tie groups of (t^3 - t)
    bool has_ties = false;
};

inline RankedData midranks(const std::vector<double>& values) {
    const std::size_t n = values.size();
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });

    RankedData out;
    out.ranks.resize(n);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
        const auto t = static_cast<double>(j - i + 1);
        const double rank = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
        for (std::size_t k = i; k <= j; ++k) out.ranks[order[k]] = rank;
        if (t > 1.0) {
            out.has_ties = true;
            out.tie_sum += t * t * t - t;
        }
        i = j + 1;
    }
    return out;
}

// Number of {0,1}-weighted subsets reaching each sum of the given
// non-negative integers. Counts stay integral; double holds them exactly
// within the enumeration limits used here.
inline std::vector<double> subset_sum_counts(const std::vector<long long>& items) {
    long long total = 0;
    for (long long v : items) total += v;
    std::vector<double> dist(static_cast<std::size_t>(total) + 1, 0.0);
    dist[0] = 1.0;
    for (long long v : items)
        for (long long s = total; s >= v; --s)
            dist[static_cast<std::size_t>(s)] += dist[static_cast<std::size_t>(s - v)];
    return dist;
}

inline double two_sided_from_counts(double cdf, double sf, double whole) {
    const double p = 2.0 * std::min(cdf, sf) / whole;
    return std::min(1.0, p);
}

} // namespace detail

// Wilcoxon signed-rank test of the values against the hypothesized center
// mu0. Zero differences are dropped; tied absolute differences midranked.
// The statistic is W+, the rank sum of the positive differences. Exact
// enumeration of the 2^m sign assignments up to m = 20, normal
// approximation with tie correction beyond.
inline TestResult wilcoxon_signed_rank(const std::vector<double>& values, double mu0,
                                       Alternative alt = Alternative::two_sided) {
    std::vector<double> abs_diffs;
    std::vector<bool> positive;
    abs_diffs.reserve(values.size());
    std::size_t zeros = 0;
    for (double v : values) {
        const double d = v - mu0;
        if (d == 0.0) {
            ++zeros;
            continue;
        }
        abs_diffs.push_back(std::fabs(d));
        positive.push_back(d > 0.0);
    }
    const std::size_t m = abs_diffs.size();
    if (m == 0)
        throw degenerate_error("wilcoxon_signed_rank: all differences are zero");

    const auto ranked = detail::midranks(abs_diffs);
    double w_plus = 0.0;
    for (std::size_t i = 0; i < m; ++i)
        if (positive[i]) w_plus += ranked.ranks[i];

    TestResult result;
    result.statistic = w_plus;
    if (zeros > 0)
        result.notes.push_back(std::to_string(zeros) + " zero difference(s) dropped");
    if (ranked.has_ties)
        result.notes.push_back("tied absolute differences; midranks used");

    if (m <= 20) {
        // Ranks are multiples of 0.5; doubling makes the subset-sum lattice
        // integral.
        std::vector<long long> doubled(m);
        for (std::size_t i = 0; i < m; ++i) doubled[i] = std::llround(2.0 * ranked.ranks[i]);
        const auto dist = detail::subset_sum_counts(doubled);
        const auto w2 = static_cast<std::size_t>(std::llround(2.0 * w_plus));

        double cdf = 0.0, sf = 0.0, whole = 0.0;
        for (std::size_t s = 0; s < dist.size(); ++s) {
            whole += dist[s];
            if (s <= w2) cdf += dist[s];
            if (s >= w2) sf += dist[s];
        }
        result.method = Method::exact;
        switch (alt) {
            case Alternative::two_sided: result.p_value = detail::two_sided_from_counts(cdf, sf, whole); break;
            case Alternative::greater: result.p_value = sf / whole; break;
            case Alternative::less: result.p_value = cdf / whole; break;
        }
        return result;
    }

    const auto md = static_cast<double>(m);
    const double mean = md * (md + 1.0) / 4.0;
    const double variance = md * (md + 1.0) * (2.0 * md + 1.0) / 24.0 - ranked.tie_sum / 48.0;
    const double sd = std::sqrt(variance);
    result.method = Method::approximate;
    result.notes.push_back("normal approximation with continuity correction (m > 20)");
    // Continuity correction of 0.5 toward the null.
    switch (alt) {
        case Alternative::two_sided: {
            const double z = std::max(0.0, std::fabs(w_plus - mean) - 0.5) / sd;
            result.p_value = 2.0 * detail::normal_sf(z);
            break;
        }
        case Alternative::greater:
            result.p_value = detail::normal_sf((w_plus - mean - 0.5) / sd);
            break;
        case Alternative::less:
            result.p_value = 1.0 - detail::normal_sf((w_plus - mean + 0.5) / sd);
            break;
    }
    result.p_value = std::min(1.0, result.p_value);
    return result;
}

// Two-sided Mann-Whitney U test. U counts the pairs where a < b, tied pairs
// contributing one half. Exact conditional distribution (given the observed
// tie pattern) when n_a*n_b <= 400, else normal approximation with tie and
// continuity corrections.
inline TestResult mann_whitney_u(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.empty() || b.empty())
        throw std::invalid_argument("mann_whitney_u: both samples must be non-empty");

    const auto n_a = static_cast<double>(a.size());
    const auto n_b = static_cast<double>(b.size());

    std::vector<double> pooled(a);
    pooled.insert(pooled.end(), b.begin(), b.end());
    const auto ranked = detail::midranks(pooled);

    double rank_sum_a = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) rank_sum_a += ranked.ranks[i];

    // Rank sums give #(a > b) + ties/2; flip the orientation to the
    // "a below b" count.
    const double u = n_a * n_b + n_a * (n_a + 1.0) / 2.0 - rank_sum_a;

    TestResult result;
    result.statistic = u;
    if (ranked.has_ties) result.notes.push_back("ties; midranks used");

    const double n = n_a + n_b;
    if (n_a * n_b <= 400.0) {
        // Distribution of the doubled rank sum of group a over all
        // equally-likely choices of its positions.
        std::vector<long long> doubled(pooled.size());
        for (std::size_t i = 0; i < pooled.size(); ++i)
            doubled[i] = std::llround(2.0 * ranked.ranks[i]);
        long long total2 = 0;
        for (long long d : doubled) total2 += d;

        const auto size_a = a.size();
        std::vector<std::vector<double>> ways(
            size_a + 1, std::vector<double>(static_cast<std::size_t>(total2) + 1, 0.0));
        ways[0][0] = 1.0;
        for (std::size_t i = 0; i < doubled.size(); ++i) {
            const long long d = doubled[i];
            const std::size_t cmax = std::min(size_a, i + 1);
            for (std::size_t c = cmax; c >= 1; --c)
                for (long long s = total2; s >= d; --s)
                    ways[c][static_cast<std::size_t>(s)] += ways[c - 1][static_cast<std::size_t>(s - d)];
        }

        // U <= u  <=>  doubled rank sum >= threshold.
        const long long u2 = std::llround(2.0 * u);
        const long long threshold =
            2 * static_cast<long long>(a.size()) * static_cast<long long>(b.size()) +
            static_cast<long long>(a.size()) * (static_cast<long long>(a.size()) + 1) - u2;

        double cdf = 0.0, sf = 0.0, whole = 0.0;
        const auto& row = ways[size_a];
        for (long long s = 0; s <= total2; ++s) {
            const double w = row[static_cast<std::size_t>(s)];
            whole += w;
            if (s >= threshold) cdf += w;
            if (s <= threshold) sf += w;
        }
        result.method = Method::exact;
        result.p_value = detail::two_sided_from_counts(cdf, sf, whole);
        return result;
    }

    const double mean = n_a * n_b / 2.0;
    const double variance =
        n_a * n_b / 12.0 * ((n + 1.0) - ranked.tie_sum / (n * (n - 1.0)));
    result.method = Method::approximate;
    result.notes.push_back("normal approximation with continuity correction");
    if (variance <= 0.0) {
        result.p_value = 1.0;
        result.notes.push_back("all observations tied");
        return result;
    }
    const double z = std::max(0.0, std::fabs(u - mean) - 0.5) / std::sqrt(variance);
    result.p_value = std::min(1.0, 2.0 * detail::normal_sf(z));
    return result;
}

// Kruskal-Wallis rank variance analysis with midranks and the standard tie
// correction; p from the chi-square distribution with g-1 degrees of
// freedom. All observations identical is not an error: H = 0, p = 1.
inline TestResult kruskal_wallis(const std::vector<std::vector<double>>& groups) {
    if (groups.size() < 2)
        throw std::invalid_argument("kruskal_wallis: at least two groups required");
    std::size_t n = 0;
    for (const auto& g : groups) {
        if (g.empty()) throw std::invalid_argument("kruskal_wallis: empty group");
        n += g.size();
    }
    if (n < 3)
        throw std::invalid_argument("kruskal_wallis: at least three observations required");

    std::vector<double> pooled;
    pooled.reserve(n);
    for (const auto& g : groups) pooled.insert(pooled.end(), g.begin(), g.end());
    const auto ranked = detail::midranks(pooled);

    const auto nd = static_cast<double>(n);
    double stat = 0.0;
    std::size_t offset = 0;
    for (const auto& g : groups) {
        double rank_sum = 0.0;
        for (std::size_t i = 0; i < g.size(); ++i) rank_sum += ranked.ranks[offset + i];
        offset += g.size();
        stat += rank_sum * rank_sum / static_cast<double>(g.size());
    }
    stat = 12.0 / (nd * (nd + 1.0)) * stat - 3.0 * (nd + 1.0);

    TestResult result;
    result.degrees_of_freedom = static_cast<int>(groups.size()) - 1;
    result.method = Method::approximate;
    if (ranked.has_ties) result.notes.push_back("ties; midranks and tie correction used");

    const double correction = 1.0 - ranked.tie_sum / (nd * nd * nd - nd);
    if (correction <= 0.0) {
        // Every pooled observation tied: no rank variance at all.
        result.statistic = 0.0;
        result.p_value = 1.0;
        result.notes.push_back("all observations identical");
        return result;
    }
    result.statistic = std::max(0.0, stat / correction);
    result.p_value = detail::chi_squared_sf(result.statistic, *result.degrees_of_freedom);
    return result;
}

// Adjusted per-comparison alpha for all g(g-1)/2 pairwise comparisons.
inline double bonferroni_alpha(int group_count, double alpha) {
    if (group_count < 2)
        throw std::invalid_argument("bonferroni_alpha: at least two groups required");
    if (!(alpha > 0.0 && alpha < 1.0))
        throw std::invalid_argument("bonferroni_alpha: alpha must lie in (0,1)");
    const double comparisons = static_cast<double>(group_count) *
                               (static_cast<double>(group_count) - 1.0) / 2.0;
    return alpha / comparisons;
}

// Dunn's post-hoc z tests on mean ranks for every pair of groups, with the
// Bonferroni family correction. Callers are expected to have run
// kruskal_wallis first and to invoke this only when that test rejects.
// Pairs come back sorted lexicographically by ids.
inline std::vector<PairwiseComparison> dunn_posthoc(const std::vector<Group>& groups,
                                                    double family_alpha) {
    if (groups.size() < 2)
        throw std::invalid_argument("dunn_posthoc: at least two groups required");
    for (const auto& g : groups)
        if (g.values.empty()) throw std::invalid_argument("dunn_posthoc: empty group");

    const double adjusted_alpha = bonferroni_alpha(static_cast<int>(groups.size()), family_alpha);

    std::vector<double> pooled;
    for (const auto& g : groups) pooled.insert(pooled.end(), g.values.begin(), g.values.end());
    const auto ranked = detail::midranks(pooled);
    const auto n = static_cast<double>(pooled.size());

    std::vector<double> mean_rank(groups.size(), 0.0);
    std::size_t offset = 0;
    for (std::size_t g = 0; g < groups.size(); ++g) {
        double sum = 0.0;
        for (std::size_t i = 0; i < groups[g].values.size(); ++i) sum += ranked.ranks[offset + i];
        offset += groups[g].values.size();
        mean_rank[g] = sum / static_cast<double>(groups[g].values.size());
    }

    // Tie-corrected pooled rank variance.
    const double s2 = n * (n + 1.0) / 12.0 - ranked.tie_sum / (12.0 * (n - 1.0));

    std::vector<PairwiseComparison> out;
    out.reserve(groups.size() * (groups.size() - 1) / 2);
    for (std::size_t i = 0; i < groups.size(); ++i) {
        for (std::size_t j = i + 1; j < groups.size(); ++j) {
            std::size_t lo = i, hi = j;
            if (groups[hi].id < groups[lo].id) std::swap(lo, hi);

            PairwiseComparison cmp;
            cmp.subset_a = groups[lo].id;
            cmp.subset_b = groups[hi].id;
            cmp.mean_rank_a = mean_rank[lo];
            cmp.mean_rank_b = mean_rank[hi];

            const double se = std::sqrt(s2 * (1.0 / static_cast<double>(groups[lo].values.size()) +
                                              1.0 / static_cast<double>(groups[hi].values.size())));
            const double diff = mean_rank[lo] - mean_rank[hi];
            if (se == 0.0) {
                cmp.z_statistic = 0.0;
                cmp.p_value = 1.0;
            } else {
                cmp.z_statistic = diff / se;
                cmp.p_value = std::min(1.0, 2.0 * detail::normal_sf(std::fabs(cmp.z_statistic)));
            }
            cmp.significant = cmp.p_value < adjusted_alpha;
            if (cmp.significant) {
                const double q = detail::normal_quantile(1.0 - adjusted_alpha / 2.0);
                cmp.confidence_interval = std::make_pair(diff - q * se, diff + q * se);
            }
            out.push_back(std::move(cmp));
        }
    }
    std::sort(out.begin(), out.end(), [](const PairwiseComparison& x, const PairwiseComparison& y) {
        return std::tie(x.subset_a, x.subset_b) < std::tie(y.subset_a, y.subset_b);
    });
    return out;
}

// Chi-square goodness of fit of observed counts against expected counts.
// When the usual validity rule fails (about 80% of expected counts above 5,
// none below 1) the result carries advisory notes instead of refusing to
// compute.
inline TestResult chi_square_gof(const std::vector<long long>& observed,
                                 const std::vector<double>& expected) {
    if (observed.empty() || observed.size() != expected.size())
        throw std::invalid_argument("chi_square_gof: observed/expected size mismatch");

    long long o_sum = 0;
    double e_sum = 0.0;
    for (long long o : observed) {
        if (o < 0) throw std::invalid_argument("chi_square_gof: negative observed count");
        o_sum += o;
    }
    for (double e : expected) {
        if (e <= 0.0) throw std::invalid_argument("chi_square_gof: expected count must be positive");
        e_sum += e;
    }
    if (o_sum <= 0)
        throw std::invalid_argument("chi_square_gof: observed counts sum to zero");
    if (std::fabs(static_cast<double>(o_sum) - e_sum) > 1e-6)
        throw std::invalid_argument("chi_square_gof: expected counts must sum to the observed total");

    TestResult result;
    double stat = 0.0;
    std::size_t above5 = 0, below1 = 0;
    for (std::size_t c = 0; c < observed.size(); ++c) {
        const double d = static_cast<double>(observed[c]) - expected[c];
        stat += d * d / expected[c];
        if (expected[c] > 5.0) ++above5;
        if (expected[c] < 1.0) ++below1;
    }
    result.statistic = stat;
    result.degrees_of_freedom = static_cast<int>(observed.size()) - 1;
    result.method = Method::approximate;
    result.p_value = detail::chi_squared_sf(stat, *result.degrees_of_freedom);

    const auto m = static_cast<double>(observed.size());
    if (static_cast<double>(above5) < 0.8 * m)
        result.notes.push_back("validity: only " + std::to_string(above5) + " of " +
                               std::to_string(observed.size()) +
                               " expected counts exceed 5 (rule: about 80%)");
    if (below1 > 0)
        result.notes.push_back("validity: " + std::to_string(below1) +
                               " expected count(s) below 1");
    return result;
}

// Cramer's V effect size from the independence chi-square of the table.
inline double cramers_v(const ContingencyTable& table) {
    const std::size_t rows = table.counts.size();
    if (rows < 2)
        throw std::invalid_argument("cramers_v: at least two rows required");
    const std::size_t cols = table.counts.front().size();
    if (cols < 2)
        throw std::invalid_argument("cramers_v: at least two columns required");
    for (const auto& row : table.counts)
        if (row.size() != cols) throw std::invalid_argument("cramers_v: ragged table");

    std::vector<double> row_sum(rows, 0.0), col_sum(cols, 0.0);
    double total = 0.0;
    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < cols; ++c) {
            const auto v = static_cast<double>(table.counts[r][c]);
            if (v < 0.0) throw std::invalid_argument("cramers_v: negative count");
            row_sum[r] += v;
            col_sum[c] += v;
            total += v;
        }
    if (total <= 0.0)
        throw std::invalid_argument("cramers_v: empty table");
    for (double s : row_sum)
        if (s == 0.0) throw std::invalid_argument("cramers_v: zero row margin");
    for (double s : col_sum)
        if (s == 0.0) throw std::invalid_argument("cramers_v: zero column margin");

    double chi2 = 0.0;
    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < cols; ++c) {
            const double e = row_sum[r] * col_sum[c] / total;
            const double d = static_cast<double>(table.counts[r][c]) - e;
            chi2 += d * d / e;
        }
    const double v = std::sqrt(chi2 / (total * (static_cast<double>(std::min(rows, cols)) - 1.0)));
    return std::clamp(v, 0.0, 1.0);
}

// Goldstein-adjusted interval: mean +/- 1.396 * SE. Non-overlap between two
// such intervals indicates a difference at roughly the 5% level.
inline std::pair<double, double> goldstein_ci(double mean, double se) {
    if (se < 0.0)
        throw std::invalid_argument("goldstein_ci: negative standard error");
    const double half = 1.396 * se;
    return {mean - half, mean + half};
}

} // namespace pctrank
