// pctrank: percentile-rank citation impact reports from the command line.
//
// Exit codes: 0 success, 1 input error, 2 degenerate computation (nothing
// statistically meaningful could be produced from the data).

#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "pctrank/pctrank.hpp"

namespace {

pctrank::TestKind parse_test_name(const std::string& name) {
    if (name == "wilcoxon") return pctrank::TestKind::wilcoxon;
    if (name == "chi2") return pctrank::TestKind::chi2;
    if (name == "kruskal") return pctrank::TestKind::kruskal;
    if (name == "dunn") return pctrank::TestKind::dunn;
    if (name == "mwu") return pctrank::TestKind::mwu;
    throw CLI::ValidationError("--tests", "unknown test '" + name +
                                              "' (expected wilcoxon, chi2, kruskal, dunn, mwu)");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"percentile-rank citation impact indicators and their significance tests"};

    pctrank::EvaluationConfig config;
    std::string scheme_arg = "nsf6";
    std::vector<std::string> test_names;
    std::string format_name = "text";
    std::string out_path;

    app.add_option("--papers", config.papers_path,
                   "papers CSV (paper_id,citations,reference_key,subset_ids[,percentile_class])");
    app.add_option("--refs", config.references_path,
                   "reference distributions CSV (reference_key,counts)");
    app.add_option("--counts", config.counts_path,
                   "subset class counts CSV (subset_id,class_counts)");
    app.add_option("--scheme", scheme_arg, "builtin scheme name (nsf6, r100) or a scheme JSON file")
        ->capture_default_str();
    app.add_option("--alpha", config.family_alpha, "family-wise alpha for the test battery")
        ->capture_default_str();
    app.add_option("--tests", test_names,
                   "tests to run (comma separated from: wilcoxon,chi2,kruskal,dunn,mwu)")
        ->delimiter(',');
    app.add_option("--format", format_name, "output format: text, csv or json")
        ->check(CLI::IsMember({"text", "csv", "json"}))
        ->capture_default_str();
    app.add_option("--out", out_path, "write the report to a file instead of stdout");
    app.add_flag("--force-posthoc", config.force_posthoc,
                 "run pairwise tests even when Kruskal-Wallis does not reject");

    CLI11_PARSE(app, argc, argv);

    if (std::filesystem::exists(scheme_arg))
        config.scheme_path = scheme_arg;
    else
        config.scheme = scheme_arg;

    if (!test_names.empty()) {
        config.tests.clear();
        try {
            for (const auto& name : test_names) config.tests.insert(parse_test_name(name));
        } catch (const CLI::ValidationError& e) {
            std::cerr << "error: " << e.what() << "\n";
            return 1;
        }
    }

    if (format_name == "csv")
        config.output_format = pctrank::OutputFormat::csv;
    else if (format_name == "json")
        config.output_format = pctrank::OutputFormat::json;

    try {
        const auto report = pctrank::run_evaluation(config);
        const auto rendered = pctrank::render_report(report, config.output_format);
        if (out_path.empty()) {
            std::cout << rendered;
        } else {
            std::ofstream out(out_path);
            if (!out) {
                std::cerr << "error: cannot open '" << out_path << "' for writing\n";
                return 1;
            }
            out << rendered;
        }
        return 0;
    } catch (const pctrank::degenerate_error& e) {
        std::cerr << "degenerate: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
