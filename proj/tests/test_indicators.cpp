#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "pctrank/pctrank.hpp"

using namespace pctrank;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

const std::vector<std::vector<long long>> kSevenSets{
    {7, 6, 3, 1, 3, 3},   {10, 5, 13, 5, 4, 0}, {5, 4, 6, 5, 2, 0}, {10, 8, 8, 5, 1, 0},
    {11, 18, 6, 1, 1, 0}, {35, 14, 10, 1, 5, 0}, {17, 9, 4, 2, 0, 0}};

SubsetClassCounts subset(const std::string& id, std::vector<long long> counts) {
    return {id, std::move(counts)};
}

// Oracle: expand counts to per-paper weight observations and compute the
// plain sample statistics.
std::pair<double, double> weight_mean_and_se(const std::vector<long long>& counts,
                                             const ClassScheme& scheme) {
    std::vector<double> observations;
    for (std::size_t r = 0; r < counts.size(); ++r)
        for (long long i = 0; i < counts[r]; ++i) observations.push_back(scheme.classes[r].weight);
    const auto n = static_cast<double>(observations.size());
    double mean = 0.0;
    for (double w : observations) mean += w;
    mean /= n;
    double ss = 0.0;
    for (double w : observations) ss += (w - mean) * (w - mean);
    return {mean, std::sqrt(ss / (n - 1.0)) / std::sqrt(n)};
}

} // namespace

TEST_CASE("r_within reproduces the worked six-class derivation") {
    const auto scheme = builtin_nsf6();
    const auto result = r_within(subset("1", {7, 6, 3, 1, 3, 3}), scheme);
    CHECK_THAT(result.value, WithinAbs(2.8261, 1e-4));

    const auto s2 = r_within(subset("2", {10, 5, 13, 5, 4, 0}), scheme);
    CHECK_THAT(s2.value, WithinAbs(2.68, 0.005));

    const auto bottom = r_within(subset("b", {9, 0, 0, 0, 0, 0}), scheme);
    CHECK_THAT(bottom.value, WithinAbs(1.0, 1e-12));

    CHECK_THROWS_AS(r_within(subset("e", {0, 0, 0, 0, 0, 0}), scheme), std::invalid_argument);
    CHECK_THROWS_AS(r_within(subset("m", {1, 2}), scheme), std::invalid_argument);
}

TEST_CASE("r_across applies the grand-total normalization times k") {
    const auto scheme = builtin_nsf6();
    const NormalizationContext ctx{7, 248};

    const auto s1 = r_across(subset("1", {7, 6, 3, 1, 3, 3}), ctx, scheme);
    CHECK_THAT(s1.value, WithinAbs(1.8347, 1e-4));

    const auto s6 = r_across(subset("6", {35, 14, 10, 1, 5, 0}), ctx, scheme);
    CHECK_THAT(s6.value, WithinAbs(3.44, 0.005));

    SECTION("k = 1 with N = n coincides with r_within") {
        const auto counts = subset("a", {3, 2, 1, 0, 0, 0});
        const auto within = r_within(counts, scheme);
        const auto across = r_across(counts, NormalizationContext{1, counts.total()}, scheme);
        CHECK_THAT(across.value, WithinRel(within.value, 1e-15));
        CHECK_THAT(*across.standard_error, WithinRel(*within.standard_error, 1e-15));
    }

    SECTION("inconsistent context is rejected") {
        CHECK_THROWS_AS(r_across(subset("a", {5, 0, 0, 0, 0, 0}), NormalizationContext{2, 3}, scheme),
                        std::invalid_argument);
        CHECK_THROWS_AS(r_across(subset("a", {5, 0, 0, 0, 0, 0}), NormalizationContext{0, 10}, scheme),
                        std::invalid_argument);
    }
}

TEST_CASE("standard errors use the n-1 sample SD of class weights over sqrt(n)") {
    const auto scheme = builtin_nsf6();

    // Scientist 1 matches the published value.
    CHECK_THAT(standard_error(subset("1", {7, 6, 3, 1, 3, 3}), scheme), WithinAbs(0.38, 0.005));

    // All observations in one class: zero variance.
    CHECK_THAT(standard_error(subset("z", {0, 8, 0, 0, 0, 0}), scheme), WithinAbs(0.0, 1e-12));

    // Against the expanded-observation oracle for every published row.
    for (std::size_t s = 0; s < kSevenSets.size(); ++s) {
        const auto [mean, se] = weight_mean_and_se(kSevenSets[s], scheme);
        const auto result = r_within(subset(std::to_string(s + 1), kSevenSets[s]), scheme);
        CHECK_THAT(result.value, WithinAbs(mean, 1e-12));
        REQUIRE(result.standard_error.has_value());
        CHECK_THAT(*result.standard_error, WithinAbs(se, 1e-12));
    }

    CHECK_THROWS_AS(standard_error(subset("one", {1, 0, 0, 0, 0, 0}), scheme), degenerate_error);
}

TEST_CASE("random-attribution baseline") {
    CHECK_THAT(baseline_r(builtin_nsf6()), WithinAbs(1.91, 1e-9));

    const auto single = make_scheme("single", {{0, 3.5, 1.0}});
    CHECK_THAT(baseline_r(single), WithinAbs(3.5, 1e-12));

    // Uniform 100-class scheme with weights 1..100: arithmetic-series oracle.
    const auto identity = percentile_identity_scheme();
    double oracle = 0.0;
    for (int j = 1; j <= 100; ++j) oracle += 0.01 * static_cast<double>(j);
    CHECK_THAT(baseline_r(identity), WithinAbs(oracle, 1e-9));
    CHECK_THAT(baseline_r(identity), WithinAbs(50.5, 1e-9));
}

TEST_CASE("mean percentile rank") {
    PercentileVector vec;
    vec.subset_id = "A";

    SECTION("all papers at one rank") {
        vec.bins[50] = 4;   // rank 51
        const auto result = mean_percentile(vec);
        CHECK_THAT(result.value, WithinAbs(51.0, 1e-12));
        CHECK_THAT(*result.standard_error, WithinAbs(0.0, 1e-12));
    }

    SECTION("direct average oracle") {
        vec.bins[50] = 2;
        vec.bins[99] = 1;
        const auto result = mean_percentile(vec);
        CHECK_THAT(result.value, WithinAbs((51.0 + 51.0 + 100.0) / 3.0, 1e-12));
    }

    SECTION("equals r_within under the identity scheme") {
        std::mt19937 rng(3);
        const auto identity = percentile_identity_scheme();
        for (int trial = 0; trial < 40; ++trial) {
            PercentileVector random_vec;
            random_vec.subset_id = "A";
            for (auto& bin : random_vec.bins) bin = rng() % 4;
            if (random_vec.total() == 0) random_vec.bins[0] = 1;
            const auto direct = mean_percentile(random_vec);
            const auto via_scheme = r_within(subset_class_counts(random_vec, identity), identity);
            CHECK_THAT(direct.value, WithinAbs(via_scheme.value, 1e-9));
            if (direct.standard_error)
                CHECK_THAT(*direct.standard_error, WithinAbs(*via_scheme.standard_error, 1e-9));
        }
    }
}

TEST_CASE("rate of averages versus mean of rates") {
    SECTION("self-normalized input gives 1") {
        const std::vector<CitationPair> pairs{{"p1", 3, 3}, {"p2", 8, 8}};
        CHECK_THAT(rate_of_averages(pairs), WithinAbs(1.0, 1e-12));
        const auto mr = mean_of_rates(pairs);
        CHECK_THAT(mr.value, WithinAbs(1.0, 1e-12));
        CHECK_THAT(*mr.standard_error, WithinAbs(0.0, 1e-12));
    }

    SECTION("the two orders of operations differ on skewed input") {
        const std::vector<CitationPair> pairs{{"p1", 4, 1}, {"p2", 1, 2}};
        CHECK_THAT(rate_of_averages(pairs), WithinAbs(5.0 / 3.0, 1e-12));
        CHECK_THAT(mean_of_rates(pairs).value, WithinAbs(2.25, 1e-12));
    }

    SECTION("uncited set") {
        CHECK_THAT(rate_of_averages({{"p1", 0, 5}}), WithinAbs(0.0, 1e-12));
    }

    SECTION("zero expected citations") {
        CHECK_THROWS_AS(rate_of_averages({{"p1", 1, 0}}), degenerate_error);
        CHECK_THROWS_WITH(mean_of_rates({{"p1", 1, 2}, {"bad-paper", 1, 0}}),
                          Catch::Matchers::ContainsSubstring("bad-paper"));
    }

    SECTION("they agree whenever every expected value is equal") {
        std::mt19937 rng(17);
        for (int trial = 0; trial < 40; ++trial) {
            std::vector<CitationPair> pairs;
            const double e = 1.0 + static_cast<double>(rng() % 50) / 7.0;
            const int n = 1 + static_cast<int>(rng() % 12);
            for (int i = 0; i < n; ++i)
                pairs.push_back({"p" + std::to_string(i), static_cast<double>(rng() % 30), e});
            CHECK_THAT(rate_of_averages(pairs), WithinAbs(mean_of_rates(pairs).value, 1e-9));
        }
    }
}

TEST_CASE("rank_subsets uses competition ranking, highest first") {
    auto make = [](const std::string& id, double value) {
        return IndicatorResult{id, value, {}, {}};
    };

    SECTION("published six-class column") {
        const auto ranked = rank_subsets({make("1", 2.83), make("2", 2.68), make("3", 2.77),
                                          make("4", 2.34), make("5", 2.00), make("6", 1.88),
                                          make("7", 1.72)});
        std::map<std::string, int> rank;
        for (const auto& r : ranked) rank[r.subset_id] = *r.rank_among_subsets;
        CHECK(rank == std::map<std::string, int>{
                          {"1", 1}, {"2", 3}, {"3", 2}, {"4", 4}, {"5", 5}, {"6", 6}, {"7", 7}});
    }

    SECTION("published cross-normalized column") {
        const auto ranked = rank_subsets({make("1", 1.83), make("2", 2.79), make("3", 1.72),
                                          make("4", 2.12), make("5", 2.09), make("6", 3.44),
                                          make("7", 1.55)});
        std::map<std::string, int> rank;
        for (const auto& r : ranked) rank[r.subset_id] = *r.rank_among_subsets;
        CHECK(rank == std::map<std::string, int>{
                          {"1", 5}, {"2", 2}, {"3", 6}, {"4", 3}, {"5", 4}, {"6", 1}, {"7", 7}});
    }

    SECTION("ties share the smaller rank and the next rank skips") {
        const auto ranked = rank_subsets({make("a", 2.0), make("b", 3.0), make("c", 2.0),
                                          make("d", 1.0)});
        REQUIRE(ranked.size() == 4);
        CHECK(ranked[0].subset_id == "b");
        CHECK(*ranked[0].rank_among_subsets == 1);
        CHECK(ranked[1].subset_id == "a");   // tie order by subset id
        CHECK(*ranked[1].rank_among_subsets == 2);
        CHECK(ranked[2].subset_id == "c");
        CHECK(*ranked[2].rank_among_subsets == 2);
        CHECK(ranked[3].subset_id == "d");
        CHECK(*ranked[3].rank_among_subsets == 4);
    }
}

TEST_CASE("cross-normalization identity holds on randomized instances") {
    std::mt19937 rng(2024);
    std::uniform_int_distribution<int> class_count_dist(1, 10);
    std::uniform_int_distribution<long long> count_dist(0, 40);

    for (int trial = 0; trial < 1000; ++trial) {
        const int classes = class_count_dist(rng);
        std::vector<SchemeClass> scheme_classes;
        double remaining = 1.0;
        for (int c = 0; c < classes; ++c) {
            const double proportion =
                (c + 1 == classes) ? remaining : remaining * 0.3;
            remaining -= (c + 1 == classes) ? 0.0 : proportion;
            scheme_classes.push_back({c * (99 / classes + 1) > 99 ? 99 : c * (99 / classes + 1),
                                      static_cast<double>(rng() % 100) / 9.0, proportion});
        }
        // Rebuild bounds strictly increasing within [0,99].
        for (int c = 0; c < classes; ++c) scheme_classes[static_cast<std::size_t>(c)].lower_bound = c;
        const auto scheme = make_scheme("random", scheme_classes);

        SubsetClassCounts counts{"s", {}};
        for (int c = 0; c < classes; ++c) counts.counts.push_back(count_dist(rng));
        if (counts.total() == 0) counts.counts[0] = 1;

        const long long n = counts.total();
        const int k = 1 + static_cast<int>(rng() % 9);
        const long long grand_total = n + static_cast<long long>(rng() % 500);
        const NormalizationContext ctx{k, grand_total};

        const auto within = r_within(counts, scheme);
        const auto across = r_across(counts, ctx, scheme);
        const double scale = static_cast<double>(k) * static_cast<double>(n) /
                             static_cast<double>(grand_total);
        if (within.value != 0.0)
            CHECK_THAT(across.value, WithinRel(scale * within.value, 1e-12));
        else
            CHECK_THAT(across.value, WithinAbs(0.0, 1e-15));

        // Value bounds for the within-subset form.
        double min_w = scheme.classes.front().weight, max_w = min_w;
        for (const auto& c : scheme.classes) {
            min_w = std::min(min_w, c.weight);
            max_w = std::max(max_w, c.weight);
        }
        CHECK(within.value >= min_w - 1e-12);
        CHECK(within.value <= max_w + 1e-12);
        const double baseline = baseline_r(scheme);
        CHECK(baseline >= min_w - 1e-12);
        CHECK(baseline <= max_w + 1e-12);

        // Permutation invariance: the weighted sum does not depend on the
        // order classes are visited in.
        std::vector<std::size_t> perm(scheme.size());
        for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;
        std::shuffle(perm.begin(), perm.end(), rng);
        double permuted = 0.0;
        for (std::size_t i : perm)
            permuted += scheme.classes[i].weight * static_cast<double>(counts.counts[i]);
        CHECK_THAT(within.value, WithinAbs(permuted / static_cast<double>(n), 1e-9));
    }
}

TEST_CASE("spot fixture: scientist 6 cross-normalization") {
    const auto scheme = builtin_nsf6();
    const auto counts = subset("6", {35, 14, 10, 1, 5, 0});
    const NormalizationContext ctx{7, 248};
    const auto within = r_within(counts, scheme);
    const auto across = r_across(counts, ctx, scheme);
    CHECK_THAT(across.value,
               WithinRel(within.value * 7.0 * 65.0 / 248.0, 1e-12));
    CHECK_THAT(within.value, WithinAbs(1.88, 0.005));
    CHECK_THAT(across.value, WithinAbs(3.44, 0.005));
}
