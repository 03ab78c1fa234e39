#pragma once

// Evaluation orchestration and report rendering.
//
// The pipeline follows the order: validate -> percentiles -> classify ->
// contingency -> indicators -> Kruskal-Wallis gate -> per-subset tests ->
// pairwise post-hoc tests. Pairwise tests (Dunn, Mann-Whitney) run only
// when Kruskal-Wallis rejects at the family alpha, unless forced.
//
// Three ingestion paths: raw papers + reference distributions, papers with
// a precomputed percentile_class column, or subset class counts directly
// (which carries no percentile-level information, so rank-level statistics
// are skipped).

#include <charconv>
#include <cstdio>
#include <set>

#include <json.hpp>

#include "pctrank/indicators.hpp"
#include "pctrank/io.hpp"
#include "pctrank/percentile.hpp"
#include "pctrank/schemes.hpp"
#include "pctrank/stats.hpp"
#include "pctrank/types.hpp"

namespace nlohmann {

template <typename T>
struct adl_serializer<std::optional<T>> {
    static void to_json(json& j, const std::optional<T>& value) {
        if (value)
            j = *value;
        else
            j = nullptr;
    }
    static void from_json(const json& j, std::optional<T>& value) {
        if (j.is_null())
            value.reset();
        else
            value = j.template get<T>();
    }
};

} // namespace nlohmann

namespace pctrank {

enum class OutputFormat { text, csv, json };
enum class TestKind { wilcoxon, chi2, kruskal, dunn, mwu };

inline std::set<TestKind> all_tests() {
    return {TestKind::wilcoxon, TestKind::chi2, TestKind::kruskal, TestKind::dunn, TestKind::mwu};
}

struct EvaluationConfig {
    std::string papers_path;
    std::string references_path;
    std::string counts_path;
    std::string scheme = "nsf6";       // builtin name ("nsf6", "r100")
    std::string scheme_path;           // scheme file; wins over the builtin name
    double family_alpha = 0.05;
    OutputFormat output_format = OutputFormat::text;
    std::set<TestKind> tests = all_tests();
    bool force_posthoc = false;
};

struct SubsetIndicators {
    std::string subset_id;
    long long n = 0;
    IndicatorResult r_within;                          // R(i)
    IndicatorResult r_across;                          // R(i,k)
    std::optional<IndicatorResult> r100_within;        // mean percentile rank
    std::optional<IndicatorResult> r100_across;
    std::optional<IndicatorResult> rate_of_averages;   // Avg(c)/Avg(e)
    std::optional<IndicatorResult> mean_of_rates;      // Avg(c/e)
    std::optional<std::array<double, 5>> rank_quartiles;   // min,q1,median,q3,max

    bool operator==(const SubsetIndicators&) const = default;
};

struct SubsetTestRow {
    std::string subset_id;
    std::optional<TestResult> wilcoxon_vs_median;      // percentile ranks against 50
    std::optional<TestResult> chi2_goodness_of_fit;    // classes against the scheme expectation
    std::optional<std::pair<double, double>> goldstein_ci_r100;
    std::vector<std::string> notes;

    bool operator==(const SubsetTestRow&) const = default;
};

struct PairwiseTestResult {
    std::string subset_a;
    std::string subset_b;
    TestResult result;
    bool significant = false;   // at the family-adjusted alpha

    bool operator==(const PairwiseTestResult&) const = default;
};

// One granularity of comparative testing (percentile ranks or scheme
// classes): the Kruskal-Wallis gate plus the pairwise batteries behind it.
struct TestBattery {
    std::string data_label;
    std::optional<TestResult> kruskal;
    bool posthoc_ran = false;
    std::vector<PairwiseComparison> dunn;
    std::vector<PairwiseTestResult> mann_whitney;
    std::vector<std::string> notes;

    bool operator==(const TestBattery&) const = default;
};

struct Report {
    std::string ingestion;
    ClassScheme scheme;
    int k = 0;
    long long total_memberships = 0;
    double family_alpha = 0.05;
    double adjusted_alpha = 0.05;
    double baseline = 0.0;
    std::vector<std::string> notes;
    ContingencyTable contingency;
    std::vector<SubsetIndicators> subsets;
    std::vector<SubsetTestRow> subset_tests;
    std::optional<TestBattery> rank_tests;
    std::optional<TestBattery> class_tests;

    bool operator==(const Report&) const = default;
};

NLOHMANN_JSON_SERIALIZE_ENUM(Method, {
                                         {Method::exact, "exact"},
                                         {Method::approximate, "normal-approximation"},
                                     })

NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(SchemeClass, lower_bound, weight, expected_proportion)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(ClassScheme, name, classes)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(ContingencyTable, subset_ids, class_labels, counts)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(IndicatorResult, subset_id, value, standard_error,
                                   rank_among_subsets)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(TestResult, statistic, p_value, degrees_of_freedom, method,
                                   notes)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(PairwiseComparison, subset_a, subset_b, mean_rank_a,
                                   mean_rank_b, z_statistic, p_value, significant,
                                   confidence_interval)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(SubsetIndicators, subset_id, n, r_within, r_across,
                                   r100_within, r100_across, rate_of_averages, mean_of_rates,
                                   rank_quartiles)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(SubsetTestRow, subset_id, wilcoxon_vs_median,
                                   chi2_goodness_of_fit, goldstein_ci_r100, notes)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(PairwiseTestResult, subset_a, subset_b, result, significant)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(TestBattery, data_label, kruskal, posthoc_ran, dunn,
                                   mann_whitney, notes)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(Report, ingestion, scheme, k, total_memberships, family_alpha,
                                   adjusted_alpha, baseline, notes, contingency, subsets,
                                   subset_tests, rank_tests, class_tests)

inline nlohmann::json report_to_json(const Report& report) { return report; }
inline Report report_from_json(const nlohmann::json& j) { return j.get<Report>(); }

namespace detail {

template <typename Fn>
auto run_stage(const char* stage, Fn&& fn) {
    try {
        return fn();
    } catch (const degenerate_error&) {
        throw;
    } catch (const parse_error& e) {
        throw parse_error(std::string(stage) + ": " + e.what());
    } catch (const std::exception& e) {
        throw std::runtime_error(std::string(stage) + ": " + e.what());
    }
}

inline std::vector<double> class_observations(const SubsetClassCounts& counts) {
    std::vector<double> values;
    values.reserve(static_cast<std::size_t>(counts.total()));
    for (std::size_t c = 0; c < counts.counts.size(); ++c)
        for (long long i = 0; i < counts.counts[c]; ++i)
            values.push_back(static_cast<double>(c));
    return values;
}

inline double interpolated_quantile(const std::vector<double>& sorted, double p) {
    const double h = (static_cast<double>(sorted.size()) - 1.0) * p;
    const auto lo = static_cast<std::size_t>(h);
    if (lo + 1 >= sorted.size()) return sorted.back();
    const double frac = h - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

inline std::array<double, 5> five_number_summary(std::vector<double> values) {
    std::sort(values.begin(), values.end());
    return {values.front(), interpolated_quantile(values, 0.25), interpolated_quantile(values, 0.5),
            interpolated_quantile(values, 0.75), values.back()};
}

// Fills rank_among_subsets for one indicator column across the report.
template <typename Getter>
inline void apply_column_ranks(std::vector<SubsetIndicators>& subsets, Getter get) {
    std::vector<IndicatorResult> column;
    for (auto& s : subsets) {
        if (auto* r = get(s)) column.push_back(*r);
    }
    if (column.empty()) return;
    const auto ranked = rank_subsets(column);
    for (const auto& r : ranked)
        for (auto& s : subsets)
            if (auto* target = get(s); target && target->subset_id == r.subset_id)
                target->rank_among_subsets = r.rank_among_subsets;
}

inline TestBattery comparative_battery(const std::string& label,
                                       const std::vector<Group>& groups,
                                       const EvaluationConfig& config, double adjusted_alpha) {
    TestBattery battery;
    battery.data_label = label;

    const bool wants_posthoc = config.tests.count(TestKind::dunn) > 0 ||
                               config.tests.count(TestKind::mwu) > 0;
    std::vector<std::vector<double>> plain;
    plain.reserve(groups.size());
    for (const auto& g : groups) plain.push_back(g.values);

    battery.kruskal = kruskal_wallis(plain);
    const bool rejects = battery.kruskal->p_value < config.family_alpha;
    if (!wants_posthoc) return battery;

    if (!rejects && !config.force_posthoc) {
        battery.notes.push_back(
            "Kruskal-Wallis does not reject at the family alpha; pairwise post-hoc tests skipped");
        return battery;
    }
    if (!rejects && config.force_posthoc)
        battery.notes.push_back("Kruskal-Wallis does not reject; pairwise tests forced");

    battery.posthoc_ran = true;
    if (config.tests.count(TestKind::dunn) > 0)
        battery.dunn = dunn_posthoc(groups, config.family_alpha);
    if (config.tests.count(TestKind::mwu) > 0) {
        for (std::size_t i = 0; i < groups.size(); ++i) {
            for (std::size_t j = i + 1; j < groups.size(); ++j) {
                std::size_t lo = i, hi = j;
                if (groups[hi].id < groups[lo].id) std::swap(lo, hi);
                PairwiseTestResult pair;
                pair.subset_a = groups[lo].id;
                pair.subset_b = groups[hi].id;
                pair.result = mann_whitney_u(groups[lo].values, groups[hi].values);
                pair.significant = pair.result.p_value < adjusted_alpha;
                battery.mann_whitney.push_back(std::move(pair));
            }
        }
        std::sort(battery.mann_whitney.begin(), battery.mann_whitney.end(),
                  [](const PairwiseTestResult& a, const PairwiseTestResult& b) {
                      return std::tie(a.subset_a, a.subset_b) < std::tie(b.subset_a, b.subset_b);
                  });
    }
    return battery;
}

// The shared back half of the pipeline. `vectors` is null on the
// class-counts path; `pairs_by_subset` is null unless reference
// distributions were available.
inline Report assemble_report(
    const ClassScheme& scheme, const std::vector<SubsetClassCounts>& class_counts,
    const std::vector<PercentileVector>* vectors,
    const std::map<std::string, std::vector<CitationPair>>* pairs_by_subset,
    const EvaluationConfig& config, const std::string& ingestion) {
    Report report;
    report.ingestion = ingestion;
    report.scheme = scheme;
    report.k = static_cast<int>(class_counts.size());
    report.family_alpha = config.family_alpha;
    for (const auto& counts : class_counts) report.total_memberships += counts.total();
    report.adjusted_alpha = report.k >= 2 ? bonferroni_alpha(report.k, config.family_alpha)
                                          : config.family_alpha;
    report.baseline = baseline_r(scheme);

    report.notes = {
        "percentile rule: percentage of the reference set with strictly fewer citations; "
        "ties do not count as fewer; uncited papers fall in the 0th percentile class",
        "reference sets include the focal paper, so the denominator is the full set size",
        "percentile classes take the floor of the raw percentage: classes 0-99, ranks 1-100",
        "coauthored papers count once per subset membership; N counts memberships",
        "ranking: highest value first; tied values share the smaller rank",
    };
    if (vectors == nullptr)
        report.notes.push_back(
            "class counts supplied directly; percentile-level statistics are unavailable");
    if (report.k < 2)
        report.notes.push_back("single subset: comparative tests skipped, k = 1");

    // Contingency table.
    if (vectors != nullptr) {
        report.contingency = run_stage("contingency", [&] { return contingency_table(*vectors, scheme); });
    } else {
        std::unordered_set<std::string> seen;
        for (const auto& counts : class_counts) {
            if (!seen.insert(counts.subset_id).second)
                throw std::runtime_error("contingency: duplicate subset id '" + counts.subset_id + "'");
            report.contingency.subset_ids.push_back(counts.subset_id);
            report.contingency.counts.push_back(counts.counts);
        }
        for (std::size_t c = 0; c < scheme.size(); ++c)
            report.contingency.class_labels.push_back(class_label(scheme, c));
    }

    // Indicators.
    run_stage("indicators", [&] {
        const NormalizationContext ctx{report.k, report.total_memberships};
        const auto identity = percentile_identity_scheme();
        for (std::size_t s = 0; s < class_counts.size(); ++s) {
            SubsetIndicators row;
            row.subset_id = class_counts[s].subset_id;
            row.n = class_counts[s].total();
            row.r_within = r_within(class_counts[s], scheme);
            row.r_across = r_across(class_counts[s], ctx, scheme);
            if (vectors != nullptr) {
                const auto& vec = (*vectors)[s];
                const auto mp = mean_percentile(vec);
                row.r100_within = IndicatorResult{vec.subset_id, mp.value, mp.standard_error, {}};
                SubsetClassCounts identity_counts{vec.subset_id,
                                                  {vec.bins.begin(), vec.bins.end()}};
                row.r100_across = r_across(identity_counts, ctx, identity);
                row.rank_quartiles = five_number_summary(rank_observations(vec));
            }
            if (pairs_by_subset != nullptr) {
                const auto& pairs = pairs_by_subset->at(row.subset_id);
                try {
                    row.rate_of_averages =
                        IndicatorResult{row.subset_id, rate_of_averages(pairs), {}, {}};
                } catch (const degenerate_error&) {
                    // left empty; noted in the subset test row below
                }
                try {
                    const auto mr = mean_of_rates(pairs);
                    row.mean_of_rates =
                        IndicatorResult{row.subset_id, mr.value, mr.standard_error, {}};
                } catch (const degenerate_error&) {
                }
            }
            report.subsets.push_back(std::move(row));
        }
        apply_column_ranks(report.subsets, [](SubsetIndicators& s) { return &s.r_within; });
        apply_column_ranks(report.subsets, [](SubsetIndicators& s) { return &s.r_across; });
        apply_column_ranks(report.subsets, [](SubsetIndicators& s) {
            return s.r100_within ? &*s.r100_within : nullptr;
        });
        apply_column_ranks(report.subsets, [](SubsetIndicators& s) {
            return s.r100_across ? &*s.r100_across : nullptr;
        });
        apply_column_ranks(report.subsets, [](SubsetIndicators& s) {
            return s.rate_of_averages ? &*s.rate_of_averages : nullptr;
        });
        apply_column_ranks(report.subsets, [](SubsetIndicators& s) {
            return s.mean_of_rates ? &*s.mean_of_rates : nullptr;
        });
        return 0;
    });

    // Comparative batteries and their Kruskal-Wallis gate.
    const bool wants_comparative = config.tests.count(TestKind::kruskal) > 0 ||
                                   config.tests.count(TestKind::dunn) > 0 ||
                                   config.tests.count(TestKind::mwu) > 0;
    if (report.k >= 2 && wants_comparative) {
        run_stage("comparative tests", [&] {
            if (vectors != nullptr) {
                std::vector<Group> groups;
                for (const auto& vec : *vectors) groups.push_back({vec.subset_id, rank_observations(vec)});
                report.rank_tests = comparative_battery("percentile ranks (1-100)", groups, config,
                                                        report.adjusted_alpha);
            }
            std::vector<Group> class_groups;
            for (const auto& counts : class_counts)
                class_groups.push_back({counts.subset_id, class_observations(counts)});
            report.class_tests = comparative_battery("scheme classes", class_groups, config,
                                                     report.adjusted_alpha);
            return 0;
        });
    }

    // Per-subset tests.
    std::size_t wilcoxon_successes = 0;
    run_stage("per-subset tests", [&] {
        for (std::size_t s = 0; s < class_counts.size(); ++s) {
            SubsetTestRow row;
            row.subset_id = class_counts[s].subset_id;
            if (vectors != nullptr && config.tests.count(TestKind::wilcoxon) > 0) {
                try {
                    row.wilcoxon_vs_median =
                        wilcoxon_signed_rank(rank_observations((*vectors)[s]), 50.0);
                    ++wilcoxon_successes;
                } catch (const degenerate_error& e) {
                    row.notes.push_back(std::string("wilcoxon: ") + e.what());
                }
            }
            if (config.tests.count(TestKind::chi2) > 0) {
                try {
                    row.chi2_goodness_of_fit = chi_square_gof(
                        class_counts[s].counts, expected_counts(scheme, class_counts[s].total()));
                } catch (const std::invalid_argument& e) {
                    row.notes.push_back(std::string("chi2: ") + e.what());
                }
            }
            if (vectors != nullptr) {
                const auto& row_ind = report.subsets[s];
                if (row_ind.r100_within && row_ind.r100_within->standard_error)
                    row.goldstein_ci_r100 = goldstein_ci(row_ind.r100_within->value,
                                                         *row_ind.r100_within->standard_error);
            }
            if (pairs_by_subset != nullptr && !report.subsets[s].mean_of_rates) {
                try {
                    mean_of_rates(pairs_by_subset->at(row.subset_id));
                } catch (const degenerate_error& e) {
                    row.notes.push_back(std::string("mean of rates: ") + e.what());
                } catch (const std::invalid_argument& e) {
                    row.notes.push_back(std::string("mean of rates: ") + e.what());
                }
            }
            report.subset_tests.push_back(std::move(row));
        }
        return 0;
    });

    if (config.tests == std::set<TestKind>{TestKind::wilcoxon} && vectors != nullptr &&
        wilcoxon_successes == 0)
        throw degenerate_error(
            "the only requested test (wilcoxon) is degenerate for every subset");

    return report;
}

} // namespace detail

// Raw path: papers plus reference distributions.
inline Report evaluate_papers(const std::vector<PaperRecord>& papers,
                              const std::vector<ReferenceDistribution>& refs,
                              const ClassScheme& scheme, const EvaluationConfig& config) {
    detail::run_stage("validate", [&] {
        const auto violations = validate_dataset(papers, refs);
        if (!violations.empty()) {
            std::string msg = "dataset invalid (" + std::to_string(violations.size()) + " violation(s)):";
            const std::size_t shown = std::min<std::size_t>(violations.size(), 8);
            for (std::size_t i = 0; i < shown; ++i)
                msg += "\n  " + (violations[i].paper_id.empty() ? std::string("<dataset>")
                                                                : violations[i].paper_id) +
                       ": " + violations[i].message;
            if (shown < violations.size()) msg += "\n  ...";
            throw std::invalid_argument(msg);
        }
        return 0;
    });

    const auto scores = detail::run_stage("percentiles", [&] { return assign_percentiles(papers, refs); });

    const auto order = subset_order(papers);
    std::vector<PercentileVector> vectors;
    for (const auto& id : order)
        vectors.push_back(detail::run_stage("percentiles", [&] { return percentile_vector(id, papers, scores); }));

    std::vector<SubsetClassCounts> class_counts;
    for (const auto& vec : vectors) class_counts.push_back(subset_class_counts(vec, scheme));

    // Expected citations per paper: the mean of its reference distribution.
    std::unordered_map<std::string, double> expected_by_key;
    for (const auto& ref : refs) {
        double sum = 0.0;
        for (long long c : ref.counts) sum += static_cast<double>(c);
        expected_by_key[ref.reference_key] = sum / static_cast<double>(ref.counts.size());
    }
    std::map<std::string, std::vector<CitationPair>> pairs;
    for (const auto& id : order) pairs[id] = {};
    for (const auto& paper : papers) {
        const CitationPair pair{paper.paper_id, static_cast<double>(paper.citations),
                                expected_by_key.at(paper.reference_key)};
        for (const auto& id : paper.subset_ids) pairs[id].push_back(pair);
    }

    return detail::assemble_report(scheme, class_counts, &vectors, &pairs, config, "raw");
}

// Precomputed path: percentile classes supplied with the papers.
inline Report evaluate_precomputed(const std::vector<PaperRecord>& papers,
                                   const std::map<std::string, int>& percentile_classes,
                                   const ClassScheme& scheme, const EvaluationConfig& config) {
    std::map<std::string, PercentileScore> scores;
    detail::run_stage("percentiles", [&] {
        for (const auto& paper : papers) {
            const auto it = percentile_classes.find(paper.paper_id);
            if (it == percentile_classes.end())
                throw std::invalid_argument("paper '" + paper.paper_id + "' has no percentile class");
            if (it->second < 0 || it->second > 99)
                throw std::invalid_argument("paper '" + paper.paper_id +
                                            "': percentile class out of [0,99]");
            PercentileScore score;
            score.percentile_class = it->second;
            score.rank = it->second + 1;
            score.raw_percentage = static_cast<double>(it->second);
            scores.emplace(paper.paper_id, score);
        }
        return 0;
    });

    const auto order = subset_order(papers);
    std::vector<PercentileVector> vectors;
    for (const auto& id : order)
        vectors.push_back(detail::run_stage("percentiles", [&] { return percentile_vector(id, papers, scores); }));

    std::vector<SubsetClassCounts> class_counts;
    for (const auto& vec : vectors) class_counts.push_back(subset_class_counts(vec, scheme));

    return detail::assemble_report(scheme, class_counts, &vectors, nullptr, config,
                                   "precomputed-percentiles");
}

// Class-counts path: the contingency rows are the input.
inline Report evaluate_counts(const std::vector<SubsetClassCounts>& class_counts,
                              const ClassScheme& scheme, const EvaluationConfig& config) {
    detail::run_stage("validate", [&] {
        if (class_counts.empty())
            throw std::invalid_argument("no subsets supplied");
        for (const auto& counts : class_counts) {
            if (counts.counts.size() != scheme.size())
                throw std::invalid_argument("subset '" + counts.subset_id + "' has " +
                                            std::to_string(counts.counts.size()) +
                                            " class counts; scheme '" + scheme.name + "' has " +
                                            std::to_string(scheme.size()));
            if (counts.total() == 0)
                throw std::invalid_argument("subset '" + counts.subset_id + "' is empty");
        }
        return 0;
    });
    return detail::assemble_report(scheme, class_counts, nullptr, nullptr, config, "class-counts");
}

inline ClassScheme resolve_scheme(const EvaluationConfig& config) {
    if (!config.scheme_path.empty()) return load_scheme_file(config.scheme_path);
    if (config.scheme == "nsf6") return builtin_nsf6();
    if (config.scheme == "r100") return percentile_identity_scheme();
    throw std::invalid_argument("unknown builtin scheme '" + config.scheme +
                                "' (expected nsf6 or r100, or pass a scheme file)");
}

// File-driven entry point used by the CLI.
inline Report run_evaluation(const EvaluationConfig& config) {
    const auto scheme = detail::run_stage("scheme", [&] { return resolve_scheme(config); });

    const bool has_papers = !config.papers_path.empty();
    const bool has_counts = !config.counts_path.empty();
    if (has_papers == has_counts)
        throw std::invalid_argument("exactly one of a papers file or a class-counts file is required");

    if (has_counts) {
        if (!config.references_path.empty())
            throw std::invalid_argument("reference distributions make no sense with class counts");
        const auto counts =
            detail::run_stage("ingest", [&] { return load_class_counts(config.counts_path); });
        return evaluate_counts(counts, scheme, config);
    }

    const auto papers_file = detail::run_stage("ingest", [&] { return load_papers(config.papers_path); });
    if (papers_file.has_percentile_column) {
        if (!config.references_path.empty())
            throw std::invalid_argument(
                "supply either reference distributions or a percentile_class column, not both");
        return evaluate_precomputed(papers_file.papers, papers_file.percentile_classes, scheme, config);
    }
    if (config.references_path.empty())
        throw std::invalid_argument(
            "reference distributions are required when no percentile_class column is present");
    const auto refs = detail::run_stage(
        "ingest", [&] { return load_reference_distributions(config.references_path); });
    return evaluate_papers(papers_file.papers, refs, scheme, config);
}

// --- rendering ---------------------------------------------------------

namespace detail {

inline std::string format_fixed(double v, int decimals) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
    return buf;
}

// Shortest round-trip representation; used wherever output must be lossless.
inline std::string format_full(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

// Alpha levels are displayed truncated, so 0.05/21 prints as 0.0023.
inline std::string format_alpha(double alpha) {
    return format_fixed(std::floor(alpha * 10000.0) / 10000.0, 4);
}

inline std::string format_p(double p) {
    std::string s = format_fixed(p, 4);
    if (p < 0.05) s += "*";
    return s;
}

inline std::string format_indicator(const IndicatorResult& r) {
    std::string s = format_fixed(r.value, 2);
    if (r.standard_error) s += "(±" + format_fixed(*r.standard_error, 2) + ")";
    if (r.rank_among_subsets) s += " [" + std::to_string(*r.rank_among_subsets) + "]";
    return s;
}

struct TextTable {
    std::vector<std::vector<std::string>> rows;

    void add(std::vector<std::string> row) { rows.push_back(std::move(row)); }

    std::string str() const {
        std::vector<std::size_t> width;
        for (const auto& row : rows) {
            if (width.size() < row.size()) width.resize(row.size(), 0);
            for (std::size_t c = 0; c < row.size(); ++c)
                width[c] = std::max(width[c], row[c].size());
        }
        std::string out;
        for (const auto& row : rows) {
            for (std::size_t c = 0; c < row.size(); ++c) {
                if (c > 0) out += "  ";
                if (c == 0) {
                    out += row[c];
                    out.append(width[c] - row[c].size(), ' ');
                } else {
                    out.append(width[c] - row[c].size(), ' ');
                    out += row[c];
                }
            }
            while (!out.empty() && out.back() == ' ') out.pop_back();
            out += '\n';
        }
        return out;
    }
};

inline std::string render_battery_text(const TestBattery& battery, double adjusted_alpha) {
    std::string out;
    out += "comparative tests: " + battery.data_label + "\n";
    out += std::string(19 + battery.data_label.size(), '-') + "\n";
    if (battery.kruskal) {
        out += "kruskal-wallis: H = " + format_fixed(battery.kruskal->statistic, 2) +
               ", df = " + std::to_string(*battery.kruskal->degrees_of_freedom) +
               ", p = " + format_p(battery.kruskal->p_value) + "\n";
    }
    for (const auto& note : battery.notes) out += "note: " + note + "\n";
    if (!battery.dunn.empty()) {
        out += "dunn post-hoc (adjusted alpha " + format_alpha(adjusted_alpha) +
               "; CI shown for significant pairs):\n";
        TextTable table;
        table.add({"pair", "z", "p", "significant", "CI"});
        for (const auto& cmp : battery.dunn) {
            std::string ci = "";
            if (cmp.confidence_interval)
                ci = "[" + format_fixed(cmp.confidence_interval->first, 2) + "; " +
                     format_fixed(cmp.confidence_interval->second, 2) + "]";
            table.add({cmp.subset_a + " vs " + cmp.subset_b, format_fixed(cmp.z_statistic, 2),
                       format_fixed(cmp.p_value, 4), cmp.significant ? "yes" : "no", ci});
        }
        out += table.str();
    }
    if (!battery.mann_whitney.empty()) {
        out += "mann-whitney pairwise (significance at adjusted alpha " +
               format_alpha(adjusted_alpha) + "):\n";
        TextTable table;
        table.add({"pair", "U", "p", "significant", "method"});
        for (const auto& pair : battery.mann_whitney) {
            table.add({pair.subset_a + " vs " + pair.subset_b,
                       format_fixed(pair.result.statistic, 1), format_fixed(pair.result.p_value, 4),
                       pair.significant ? "yes" : "no",
                       pair.result.method == Method::exact ? "exact" : "normal"});
        }
        out += table.str();
    }
    return out;
}

inline std::string render_text(const Report& report) {
    std::string out;
    out += "percentile rank impact report\n";
    out += "=============================\n";
    out += "ingestion: " + report.ingestion + "    scheme: " + report.scheme.name + " (" +
           std::to_string(report.scheme.size()) + " classes)\n";
    out += "subsets (k): " + std::to_string(report.k) +
           "    memberships (N): " + std::to_string(report.total_memberships) + "\n";
    out += "family alpha: " + format_full(report.family_alpha) +
           "    adjusted alpha: " + format_alpha(report.adjusted_alpha) + "\n";
    out += "random-attribution baseline R = " + format_fixed(report.baseline, 2) + "\n";
    out += "\nconventions\n-----------\n";
    for (const auto& note : report.notes) out += "- " + note + "\n";

    out += "\ncontingency table\n-----------------\n";
    {
        TextTable table;
        std::vector<std::string> header{"subset"};
        for (const auto& label : report.contingency.class_labels) header.push_back(label);
        header.push_back("total");
        table.add(header);
        std::vector<long long> column_totals(report.contingency.class_labels.size(), 0);
        for (std::size_t r = 0; r < report.contingency.subset_ids.size(); ++r) {
            std::vector<std::string> row{report.contingency.subset_ids[r]};
            for (std::size_t c = 0; c < report.contingency.counts[r].size(); ++c) {
                row.push_back(std::to_string(report.contingency.counts[r][c]));
                column_totals[c] += report.contingency.counts[r][c];
            }
            row.push_back(std::to_string(report.contingency.row_total(r)));
            table.add(row);
        }
        std::vector<std::string> totals{"total"};
        for (long long t : column_totals) totals.push_back(std::to_string(t));
        totals.push_back(std::to_string(report.contingency.grand_total()));
        table.add(totals);
        out += table.str();
    }

    out += "\nindicators (value(±SE) [rank])\n------------------------------\n";
    {
        const std::string r_label = "R(" + std::to_string(report.scheme.size()) + ")";
        const std::string rk_label = "R(" + std::to_string(report.scheme.size()) + ",k)";
        TextTable table;
        table.add({"subset", "n", r_label, rk_label, "R(100)", "R(100,k)", "Avg(c)/Avg(e)",
                   "Avg(c/e)"});
        for (const auto& s : report.subsets) {
            auto cell = [](const std::optional<IndicatorResult>& r) {
                return r ? format_indicator(*r) : std::string("-");
            };
            table.add({s.subset_id, std::to_string(s.n), format_indicator(s.r_within),
                       format_indicator(s.r_across), cell(s.r100_within), cell(s.r100_across),
                       cell(s.rate_of_averages), cell(s.mean_of_rates)});
        }
        out += table.str();
    }

    if (!report.subset_tests.empty()) {
        bool any = false;
        for (const auto& row : report.subset_tests)
            any = any || row.wilcoxon_vs_median || row.chi2_goodness_of_fit ||
                  row.goldstein_ci_r100 || !row.notes.empty();
        if (any) {
            out += "\nper-subset tests\n----------------\n";
            TextTable table;
            table.add({"subset", "wilcoxon W+", "p", "chi2", "p", "goldstein CI of R(100)", "notes"});
            for (const auto& row : report.subset_tests) {
                std::string ci = "-";
                if (row.goldstein_ci_r100)
                    ci = "[" + format_fixed(row.goldstein_ci_r100->first, 2) + "; " +
                         format_fixed(row.goldstein_ci_r100->second, 2) + "]";
                std::string notes;
                for (const auto& n : row.notes) notes += (notes.empty() ? "" : "; ") + n;
                table.add({row.subset_id,
                           row.wilcoxon_vs_median ? format_fixed(row.wilcoxon_vs_median->statistic, 1)
                                                  : "-",
                           row.wilcoxon_vs_median ? format_p(row.wilcoxon_vs_median->p_value) : "-",
                           row.chi2_goodness_of_fit
                               ? format_fixed(row.chi2_goodness_of_fit->statistic, 2)
                               : "-",
                           row.chi2_goodness_of_fit ? format_p(row.chi2_goodness_of_fit->p_value)
                                                    : "-",
                           ci, notes.empty() ? "-" : notes});
            }
            out += table.str();
            bool any_chi2_notes = false;
            for (const auto& row : report.subset_tests)
                if (row.chi2_goodness_of_fit && !row.chi2_goodness_of_fit->notes.empty())
                    any_chi2_notes = true;
            if (any_chi2_notes) {
                out += "chi2 validity:\n";
                for (const auto& row : report.subset_tests)
                    if (row.chi2_goodness_of_fit)
                        for (const auto& note : row.chi2_goodness_of_fit->notes)
                            out += "  " + row.subset_id + ": " + note + "\n";
            }
        }
    }

    if (report.rank_tests) out += "\n" + render_battery_text(*report.rank_tests, report.adjusted_alpha);
    if (report.class_tests) out += "\n" + render_battery_text(*report.class_tests, report.adjusted_alpha);
    return out;
}

inline void csv_row(std::string& out, const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i > 0) out += ',';
        out += fields[i];
    }
    out += '\n';
}

inline std::string render_battery_csv(const std::string& section, const TestBattery& battery) {
    std::string out;
    out += "# " + section + "\n";
    if (battery.kruskal) {
        csv_row(out, {"kruskal_h", "df", "p", "posthoc_ran"});
        csv_row(out, {format_full(battery.kruskal->statistic),
                      std::to_string(*battery.kruskal->degrees_of_freedom),
                      format_full(battery.kruskal->p_value), battery.posthoc_ran ? "1" : "0"});
    }
    if (!battery.dunn.empty()) {
        out += "# " + section + ".dunn\n";
        csv_row(out, {"subset_a", "subset_b", "mean_rank_a", "mean_rank_b", "z", "p", "significant",
                      "ci_low", "ci_high"});
        for (const auto& cmp : battery.dunn)
            csv_row(out, {cmp.subset_a, cmp.subset_b, format_full(cmp.mean_rank_a),
                          format_full(cmp.mean_rank_b), format_full(cmp.z_statistic),
                          format_full(cmp.p_value), cmp.significant ? "1" : "0",
                          cmp.confidence_interval ? format_full(cmp.confidence_interval->first) : "",
                          cmp.confidence_interval ? format_full(cmp.confidence_interval->second)
                                                  : ""});
    }
    if (!battery.mann_whitney.empty()) {
        out += "# " + section + ".mann_whitney\n";
        csv_row(out, {"subset_a", "subset_b", "u", "p", "method", "significant"});
        for (const auto& pair : battery.mann_whitney)
            csv_row(out, {pair.subset_a, pair.subset_b, format_full(pair.result.statistic),
                          format_full(pair.result.p_value),
                          pair.result.method == Method::exact ? "exact" : "normal-approximation",
                          pair.significant ? "1" : "0"});
    }
    return out;
}

inline std::string render_csv(const Report& report) {
    std::string out;
    out += "# metadata\n";
    csv_row(out, {"key", "value"});
    csv_row(out, {"ingestion", report.ingestion});
    csv_row(out, {"scheme", report.scheme.name});
    csv_row(out, {"classes", std::to_string(report.scheme.size())});
    csv_row(out, {"k", std::to_string(report.k)});
    csv_row(out, {"N", std::to_string(report.total_memberships)});
    csv_row(out, {"family_alpha", format_full(report.family_alpha)});
    csv_row(out, {"adjusted_alpha", format_full(report.adjusted_alpha)});
    csv_row(out, {"baseline_r", format_full(report.baseline)});

    out += "# contingency\n";
    {
        std::vector<std::string> header{"subset_id"};
        for (const auto& label : report.contingency.class_labels) header.push_back(label);
        header.push_back("total");
        csv_row(out, header);
        for (std::size_t r = 0; r < report.contingency.subset_ids.size(); ++r) {
            std::vector<std::string> row{report.contingency.subset_ids[r]};
            for (long long c : report.contingency.counts[r]) row.push_back(std::to_string(c));
            row.push_back(std::to_string(report.contingency.row_total(r)));
            csv_row(out, row);
        }
    }

    out += "# indicators\n";
    csv_row(out, {"subset_id", "n", "r_within", "r_within_se", "r_within_rank", "r_across",
                  "r_across_se", "r_across_rank", "r100", "r100_se", "r100_rank", "r100_across",
                  "r100_across_se", "r100_across_rank", "rate_of_averages", "rate_rank",
                  "mean_of_rates", "mean_of_rates_se", "mean_of_rates_rank"});
    for (const auto& s : report.subsets) {
        auto opt_value = [](const std::optional<IndicatorResult>& r) {
            return r ? format_full(r->value) : std::string();
        };
        auto opt_se = [](const std::optional<IndicatorResult>& r) {
            return r && r->standard_error ? format_full(*r->standard_error) : std::string();
        };
        auto opt_rank = [](const std::optional<IndicatorResult>& r) {
            return r && r->rank_among_subsets ? std::to_string(*r->rank_among_subsets)
                                              : std::string();
        };
        csv_row(out,
                {s.subset_id, std::to_string(s.n), format_full(s.r_within.value),
                 s.r_within.standard_error ? format_full(*s.r_within.standard_error) : "",
                 s.r_within.rank_among_subsets ? std::to_string(*s.r_within.rank_among_subsets) : "",
                 format_full(s.r_across.value),
                 s.r_across.standard_error ? format_full(*s.r_across.standard_error) : "",
                 s.r_across.rank_among_subsets ? std::to_string(*s.r_across.rank_among_subsets) : "",
                 opt_value(s.r100_within), opt_se(s.r100_within), opt_rank(s.r100_within),
                 opt_value(s.r100_across), opt_se(s.r100_across), opt_rank(s.r100_across),
                 opt_value(s.rate_of_averages), opt_rank(s.rate_of_averages),
                 opt_value(s.mean_of_rates), opt_se(s.mean_of_rates), opt_rank(s.mean_of_rates)});
    }

    bool any_quartiles = false;
    for (const auto& s : report.subsets) any_quartiles = any_quartiles || s.rank_quartiles.has_value();
    if (any_quartiles) {
        out += "# rank_quartiles\n";
        csv_row(out, {"subset_id", "min", "q1", "median", "q3", "max"});
        for (const auto& s : report.subsets) {
            if (!s.rank_quartiles) continue;
            const auto& q = *s.rank_quartiles;
            csv_row(out, {s.subset_id, format_full(q[0]), format_full(q[1]), format_full(q[2]),
                          format_full(q[3]), format_full(q[4])});
        }
    }

    if (!report.subset_tests.empty()) {
        out += "# subset_tests\n";
        csv_row(out, {"subset_id", "wilcoxon_w", "wilcoxon_p", "wilcoxon_method", "chi2", "chi2_df",
                      "chi2_p", "goldstein_low", "goldstein_high", "notes"});
        for (const auto& row : report.subset_tests) {
            std::string notes;
            for (const auto& n : row.notes) notes += (notes.empty() ? "" : " | ") + n;
            if (row.chi2_goodness_of_fit)
                for (const auto& n : row.chi2_goodness_of_fit->notes)
                    notes += (notes.empty() ? "" : " | ") + n;
            csv_row(out, {row.subset_id,
                          row.wilcoxon_vs_median ? format_full(row.wilcoxon_vs_median->statistic) : "",
                          row.wilcoxon_vs_median ? format_full(row.wilcoxon_vs_median->p_value) : "",
                          row.wilcoxon_vs_median
                              ? (row.wilcoxon_vs_median->method == Method::exact
                                     ? "exact"
                                     : "normal-approximation")
                              : "",
                          row.chi2_goodness_of_fit ? format_full(row.chi2_goodness_of_fit->statistic)
                                                   : "",
                          row.chi2_goodness_of_fit
                              ? std::to_string(*row.chi2_goodness_of_fit->degrees_of_freedom)
                              : "",
                          row.chi2_goodness_of_fit ? format_full(row.chi2_goodness_of_fit->p_value)
                                                   : "",
                          row.goldstein_ci_r100 ? format_full(row.goldstein_ci_r100->first) : "",
                          row.goldstein_ci_r100 ? format_full(row.goldstein_ci_r100->second) : "",
                          notes});
        }
    }

    if (report.rank_tests) out += render_battery_csv("rank_tests", *report.rank_tests);
    if (report.class_tests) out += render_battery_csv("class_tests", *report.class_tests);
    return out;
}

} // namespace detail

inline std::string render_report(const Report& report, OutputFormat format) {
    switch (format) {
        case OutputFormat::text: return detail::render_text(report);
        case OutputFormat::csv: return detail::render_csv(report);
        case OutputFormat::json: return report_to_json(report).dump(2) + "\n";
    }
    throw std::invalid_argument("unknown output format");
}

} // namespace pctrank
