#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <random>

#include "pctrank/pctrank.hpp"

using namespace pctrank;

namespace {

PaperRecord paper(std::string id, long long citations, std::string key,
                  std::vector<std::string> subsets) {
    return {std::move(id), citations, std::move(key), std::move(subsets)};
}

} // namespace

TEST_CASE("validate_dataset accepts a well-formed dataset") {
    const std::vector<PaperRecord> papers{paper("p1", 3, "X", {"A"})};
    const std::vector<ReferenceDistribution> refs{{"X", {0, 3, 7}}};
    CHECK(validate_dataset(papers, refs).empty());
}

TEST_CASE("validate_dataset flags a missing reference set") {
    const std::vector<PaperRecord> papers{paper("p1", 3, "X", {"A"})};
    const std::vector<ReferenceDistribution> refs{{"Y", {0, 3, 7}}};
    const auto report = validate_dataset(papers, refs);
    REQUIRE(report.size() == 1);
    CHECK(report[0].paper_id == "p1");
    CHECK(report[0].message.find("missing reference set") != std::string::npos);
}

TEST_CASE("validate_dataset flags an own count absent from the reference distribution") {
    const std::vector<PaperRecord> papers{paper("p1", 9, "X", {"A"})};
    const std::vector<ReferenceDistribution> refs{{"X", {0, 1, 2}}};

    // Direct-scan oracle for the membership rule.
    const auto& counts = refs[0].counts;
    REQUIRE(std::find(counts.begin(), counts.end(), 9) == counts.end());

    const auto report = validate_dataset(papers, refs);
    REQUIRE(report.size() == 1);
    CHECK(report[0].paper_id == "p1");
    CHECK(report[0].message.find("own citation count") != std::string::npos);
}

TEST_CASE("validate_dataset flags structural problems") {
    const std::vector<PaperRecord> papers{
        paper("p1", -1, "X", {"A"}),          // negative citations
        paper("p1", 2, "X", {"A"}),           // duplicate id
        paper("p2", 0, "X", {}),              // no memberships
        paper("p3", 0, "X", {"A", "A"}),      // duplicate membership
        paper("", 0, "X", {"A"}),             // blank id
    };
    const std::vector<ReferenceDistribution> refs{{"X", {0, 2, 5}}, {"X", {1}}, {"E", {}}};

    const auto report = validate_dataset(papers, refs);
    auto has = [&](const std::string& fragment) {
        return std::any_of(report.begin(), report.end(), [&](const Violation& v) {
            return v.message.find(fragment) != std::string::npos;
        });
    };
    CHECK(has("negative citation count"));
    CHECK(has("duplicate paper id"));
    CHECK(has("no subset membership"));
    CHECK(has("duplicate subset membership"));
    CHECK(has("blank id"));
    CHECK(has("duplicate reference set"));
    CHECK(has("reference set 'E' is empty"));
}

TEST_CASE("validation is idempotent and order-insensitive") {
    std::vector<PaperRecord> papers{
        paper("p1", 9, "X", {"A"}),
        paper("p2", 1, "Y", {"A", "B"}),
        paper("p3", 4, "X", {"B"}),
        paper("p4", 2, "Z", {"C"}),
    };
    std::vector<ReferenceDistribution> refs{{"X", {0, 1, 2, 4}}, {"Y", {1, 5}}};

    const auto baseline = validate_dataset(papers, refs);
    CHECK(validate_dataset(papers, refs) == baseline);

    std::mt19937 rng(7);
    for (int i = 0; i < 20; ++i) {
        std::shuffle(papers.begin(), papers.end(), rng);
        std::shuffle(refs.begin(), refs.end(), rng);
        CHECK(validate_dataset(papers, refs) == baseline);
    }
}

TEST_CASE("total memberships counts every subset membership") {
    const std::vector<PaperRecord> papers{
        paper("p1", 0, "X", {"A"}),
        paper("p2", 0, "X", {"A", "B"}),
        paper("p3", 0, "X", {"B", "C", "D"}),
    };
    CHECK(total_memberships(papers) == 6);
    CHECK(subset_order(papers) == std::vector<std::string>{"A", "B", "C", "D"});
}

TEST_CASE("contingency table totals") {
    ContingencyTable table;
    table.subset_ids = {"A", "B"};
    table.class_labels = {"x", "y"};
    table.counts = {{1, 2}, {3, 4}};
    CHECK(table.row_total(0) == 3);
    CHECK(table.row_total(1) == 7);
    CHECK(table.grand_total() == 10);
}
