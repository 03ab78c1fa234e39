#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "pctrank/pctrank.hpp"

using namespace pctrank;
using Catch::Matchers::WithinAbs;

namespace {

PercentileScore score_for_class(int cls) { return {cls, cls + 1, static_cast<double>(cls)}; }

} // namespace

TEST_CASE("builtin nsf6 matches the published scheme") {
    const auto scheme = builtin_nsf6();
    REQUIRE(scheme.size() == 6);

    const std::vector<int> bounds{0, 50, 75, 90, 95, 99};
    const std::vector<double> weights{1, 2, 3, 4, 5, 6};
    const std::vector<double> proportions{0.50, 0.25, 0.15, 0.05, 0.04, 0.01};
    double sum = 0.0;
    for (std::size_t j = 0; j < 6; ++j) {
        CHECK(scheme.classes[j].lower_bound == bounds[j]);
        CHECK(scheme.classes[j].weight == weights[j]);
        CHECK(scheme.classes[j].expected_proportion == proportions[j]);
        sum += scheme.classes[j].expected_proportion;
    }
    CHECK(scheme.classes.back().lower_bound == 99);
    CHECK_THAT(sum, WithinAbs(1.0, 1e-12));

    // Expected proportions equal the interval widths / 100.
    for (std::size_t j = 0; j + 1 < 6; ++j)
        CHECK_THAT(scheme.classes[j].expected_proportion,
                   WithinAbs((scheme.classes[j + 1].lower_bound - scheme.classes[j].lower_bound) / 100.0,
                             1e-12));
}

TEST_CASE("classify follows the half-open interval rule") {
    const auto scheme = builtin_nsf6();
    CHECK(classify(score_for_class(0), scheme) == 0);
    CHECK(classify(score_for_class(49), scheme) == 0);
    CHECK(classify(score_for_class(50), scheme) == 1);
    CHECK(classify(score_for_class(74), scheme) == 1);
    CHECK(classify(score_for_class(75), scheme) == 2);
    CHECK(classify(score_for_class(89), scheme) == 2);
    CHECK(classify(score_for_class(90), scheme) == 3);
    CHECK(classify(score_for_class(94), scheme) == 3);
    CHECK(classify(score_for_class(95), scheme) == 4);
    CHECK(classify(score_for_class(98), scheme) == 4);
    CHECK(classify(score_for_class(99), scheme) == 5);
}

TEST_CASE("classify is total and monotone over all percentile classes") {
    const auto nsf6 = builtin_nsf6();
    const auto identity = percentile_identity_scheme();
    int previous = 0;
    for (int cls = 0; cls < 100; ++cls) {
        const int index = classify(score_for_class(cls), nsf6);
        CHECK(index >= previous);
        CHECK(index < 6);
        previous = index;
        CHECK(classify(score_for_class(cls), identity) == cls);
    }
}

TEST_CASE("assign_class carries the class weight") {
    const auto scheme = builtin_nsf6();
    const auto assignment = assign_class("p1", score_for_class(96), scheme);
    CHECK(assignment.paper_id == "p1");
    CHECK(assignment.class_index == 4);
    CHECK(assignment.weight == 5.0);
}

TEST_CASE("expected_counts multiplies proportions by the subset size") {
    const auto scheme = builtin_nsf6();

    // Oracle: direct multiplication.
    for (long long n : {23LL, 65LL}) {
        const auto expected = expected_counts(scheme, n);
        REQUIRE(expected.size() == 6);
        for (std::size_t j = 0; j < 6; ++j)
            CHECK_THAT(expected[j],
                       WithinAbs(static_cast<double>(n) * scheme.classes[j].expected_proportion, 1e-12));
    }

    const auto e23 = expected_counts(scheme, 23);
    const std::vector<double> want23{11.5, 5.75, 3.45, 1.15, 0.92, 0.23};
    for (std::size_t j = 0; j < 6; ++j) CHECK_THAT(e23[j], WithinAbs(want23[j], 1e-9));

    const auto e100 = expected_counts(scheme, 100);
    const std::vector<double> want100{50, 25, 15, 5, 4, 1};
    for (std::size_t j = 0; j < 6; ++j) CHECK_THAT(e100[j], WithinAbs(want100[j], 1e-9));

    const auto e65 = expected_counts(scheme, 65);
    const std::vector<double> want65{32.5, 16.25, 9.75, 3.25, 2.6, 0.65};
    for (std::size_t j = 0; j < 6; ++j) CHECK_THAT(e65[j], WithinAbs(want65[j], 1e-9));

    CHECK_THROWS_AS(expected_counts(scheme, 0), std::invalid_argument);
}

TEST_CASE("scheme validation rejects malformed definitions") {
    CHECK_THROWS_AS(make_scheme("bad", {}), std::invalid_argument);
    CHECK_THROWS_AS(make_scheme("bad", {{5, 1.0, 1.0}}), std::invalid_argument);
    CHECK_THROWS_AS(make_scheme("bad", {{0, 1.0, 0.5}, {40, 1.0, 0.3}, {30, 1.0, 0.2}}),
                    std::invalid_argument);
    CHECK_THROWS_AS(make_scheme("bad", {{0, 1.0, 0.5}, {50, -1.0, 0.5}}), std::invalid_argument);
    CHECK_THROWS_AS(make_scheme("bad", {{0, 1.0, 0.5}, {50, 1.0, 0.4}}), std::invalid_argument);

    // Zero-weight bottom class is allowed.
    const auto thresholded = make_scheme("thresholded", {{0, 0.0, 0.9}, {90, 1.0, 0.1}});
    CHECK(thresholded.classes[0].weight == 0.0);

    // Five-class variant.
    const auto r5 = make_scheme("r5", {{0, 1.0, 0.50},
                                       {50, 2.0, 0.25},
                                       {75, 3.0, 0.15},
                                       {90, 4.0, 0.05},
                                       {95, 5.0, 0.05}});
    CHECK(r5.size() == 5);
}

TEST_CASE("scheme JSON round-trips to the builtin") {
    const auto scheme = builtin_nsf6();
    CHECK(parse_scheme(scheme_to_json(scheme)) == scheme);
}

TEST_CASE("contingency table aggregates vectors by scheme class") {
    const auto scheme = builtin_nsf6();

    SECTION("all papers in the bottom class") {
        PercentileVector vec;
        vec.subset_id = "A";
        vec.bins[0] = 3;
        vec.bins[49] = 4;
        const auto table = contingency_table({vec}, scheme);
        CHECK(table.counts == std::vector<std::vector<long long>>{{7, 0, 0, 0, 0, 0}});
        CHECK(table.class_labels ==
              std::vector<std::string>{"<50", "[50;75[", "[75;90[", "[90;95[", "[95;99[", ">=99"});
    }

    SECTION("duplicate subset ids are rejected") {
        PercentileVector vec;
        vec.subset_id = "A";
        vec.bins[0] = 1;
        CHECK_THROWS_AS(contingency_table({vec, vec}, scheme), std::invalid_argument);
        CHECK_THROWS_AS(contingency_table({}, scheme), std::invalid_argument);
    }

    SECTION("aggregation preserves counts on random vectors") {
        std::mt19937 rng(23);
        for (int trial = 0; trial < 30; ++trial) {
            PercentileVector vec;
            vec.subset_id = "A";
            for (auto& bin : vec.bins) bin = rng() % 5;
            const auto table = contingency_table({vec}, scheme);
            CHECK(table.row_total(0) == vec.total());

            // Independent tally oracle per class.
            for (std::size_t c = 0; c < scheme.size(); ++c) {
                long long want = 0;
                for (int cls = 0; cls < 100; ++cls)
                    if (classify(score_for_class(cls), scheme) == static_cast<int>(c))
                        want += vec.bins[static_cast<std::size_t>(cls)];
                CHECK(table.counts[0][c] == want);
            }
        }
    }
}
