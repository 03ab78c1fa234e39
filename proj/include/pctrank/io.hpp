#pragma once

// File ingestion. Three inputs drive an evaluation:
//
//   papers file (CSV, header mandatory):
//       paper_id,citations,reference_key,subset_ids[,percentile_class]
//     subset_ids are semicolon-separated; the optional percentile_class
//     column (0-99) switches the pipeline to precomputed percentiles.
//
//   reference distributions (CSV, header mandatory):
//       reference_key,counts
//     counts are space-separated non-negative integers, one per paper in
//     the reference set.
//
//   class counts (CSV, header mandatory):
//       subset_id,class_counts
//     one row per subset, counts space-separated, one per scheme class.
//
// Scheme files are JSON: {"name": ..., "classes": [{"lower_bound": ...,
// "weight": ..., "expected_proportion": ...}, ...]}.

#include <charconv>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "pctrank/indicators.hpp"
#include "pctrank/schemes.hpp"
#include "pctrank/types.hpp"

namespace pctrank {

struct PapersFile {
    std::vector<PaperRecord> papers;
    bool has_percentile_column = false;
    std::map<std::string, int> percentile_classes;   // by paper_id, when present
};

namespace detail {

inline std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r\n");
    return s.substr(begin, end - begin + 1);
}

inline std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> fields;
    std::string::size_type start = 0;
    while (true) {
        const auto pos = line.find(sep, start);
        if (pos == std::string::npos) {
            fields.push_back(trim(line.substr(start)));
            break;
        }
        fields.push_back(trim(line.substr(start, pos - start)));
        start = pos + 1;
    }
    return fields;
}

inline long long parse_int(const std::string& text, const std::string& where) {
    long long value = 0;
    const char* first = text.data();
    const char* last = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc{} || ptr != last)
        throw parse_error(where + ": expected an integer, got '" + text + "'");
    return value;
}

inline std::vector<std::string> read_lines(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw parse_error("cannot open '" + path + "'");
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) lines.push_back(line);
    return lines;
}

inline std::string location(const std::string& path, std::size_t line_no) {
    return path + ":" + std::to_string(line_no);
}

} // namespace detail

inline PapersFile load_papers(const std::string& path) {
    const auto lines = detail::read_lines(path);
    if (lines.empty())
        throw parse_error(path + ": empty file");

    const auto header = detail::split(lines[0], ',');
    const bool with_percentile = header.size() == 5;
    if (!(header.size() == 4 || with_percentile) || header[0] != "paper_id" ||
        header[1] != "citations" || header[2] != "reference_key" || header[3] != "subset_ids" ||
        (with_percentile && header[4] != "percentile_class"))
        throw parse_error(detail::location(path, 1) +
                          ": header must be paper_id,citations,reference_key,subset_ids"
                          "[,percentile_class]");

    PapersFile out;
    out.has_percentile_column = with_percentile;
    std::unordered_set<std::string> seen;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        if (detail::trim(lines[i]).empty()) continue;
        const auto where = detail::location(path, i + 1);
        const auto fields = detail::split(lines[i], ',');
        if (fields.size() != header.size())
            throw parse_error(where + ": expected " + std::to_string(header.size()) +
                              " fields, got " + std::to_string(fields.size()));

        PaperRecord paper;
        paper.paper_id = fields[0];
        if (paper.paper_id.empty())
            throw parse_error(where + ": blank paper_id");
        if (!seen.insert(paper.paper_id).second)
            throw parse_error(where + ": duplicate paper_id '" + paper.paper_id + "'");
        paper.citations = detail::parse_int(fields[1], where);
        if (paper.citations < 0)
            throw parse_error(where + ": citations must be non-negative");
        paper.reference_key = fields[2];
        if (paper.reference_key.empty())
            throw parse_error(where + ": blank reference_key");

        for (auto& id : detail::split(fields[3], ';'))
            if (!id.empty()) paper.subset_ids.push_back(std::move(id));
        if (paper.subset_ids.empty())
            throw parse_error(where + ": no subset ids");
        std::set<std::string> unique(paper.subset_ids.begin(), paper.subset_ids.end());
        if (unique.size() != paper.subset_ids.size())
            throw parse_error(where + ": duplicate subset id for one paper");

        if (with_percentile) {
            const long long cls = detail::parse_int(fields[4], where);
            if (cls < 0 || cls > 99)
                throw parse_error(where + ": percentile_class must lie in [0,99]");
            out.percentile_classes.emplace(paper.paper_id, static_cast<int>(cls));
        }
        out.papers.push_back(std::move(paper));
    }
    if (out.papers.empty())
        throw parse_error(path + ": no paper rows");
    return out;
}

inline std::vector<ReferenceDistribution> load_reference_distributions(const std::string& path) {
    const auto lines = detail::read_lines(path);
    if (lines.empty())
        throw parse_error(path + ": empty file");
    const auto header = detail::split(lines[0], ',');
    if (header.size() != 2 || header[0] != "reference_key" || header[1] != "counts")
        throw parse_error(detail::location(path, 1) + ": header must be reference_key,counts");

    std::vector<ReferenceDistribution> out;
    std::unordered_set<std::string> seen;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        if (detail::trim(lines[i]).empty()) continue;
        const auto where = detail::location(path, i + 1);
        const auto fields = detail::split(lines[i], ',');
        if (fields.size() != 2)
            throw parse_error(where + ": expected 2 fields, got " + std::to_string(fields.size()));

        ReferenceDistribution ref;
        ref.reference_key = fields[0];
        if (ref.reference_key.empty())
            throw parse_error(where + ": blank reference_key");
        if (!seen.insert(ref.reference_key).second)
            throw parse_error(where + ": duplicate reference_key '" + ref.reference_key + "'");

        std::istringstream counts(fields[1]);
        std::string token;
        while (counts >> token) {
            const long long c = detail::parse_int(token, where);
            if (c < 0)
                throw parse_error(where + ": negative citation count");
            ref.counts.push_back(c);
        }
        if (ref.counts.empty())
            throw parse_error(where + ": empty reference distribution");
        out.push_back(std::move(ref));
    }
    if (out.empty())
        throw parse_error(path + ": no reference rows");
    return out;
}

inline void save_reference_distributions(const std::string& path,
                                         const std::vector<ReferenceDistribution>& refs) {
    std::ofstream outfile(path);
    if (!outfile)
        throw parse_error("cannot open '" + path + "' for writing");
    outfile << "reference_key,counts\n";
    for (const auto& ref : refs) {
        outfile << ref.reference_key << ',';
        for (std::size_t i = 0; i < ref.counts.size(); ++i) {
            if (i > 0) outfile << ' ';
            outfile << ref.counts[i];
        }
        outfile << '\n';
    }
}

inline std::vector<SubsetClassCounts> load_class_counts(const std::string& path) {
    const auto lines = detail::read_lines(path);
    if (lines.empty())
        throw parse_error(path + ": empty file");
    const auto header = detail::split(lines[0], ',');
    if (header.size() != 2 || header[0] != "subset_id" || header[1] != "class_counts")
        throw parse_error(detail::location(path, 1) + ": header must be subset_id,class_counts");

    std::vector<SubsetClassCounts> out;
    std::unordered_set<std::string> seen;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        if (detail::trim(lines[i]).empty()) continue;
        const auto where = detail::location(path, i + 1);
        const auto fields = detail::split(lines[i], ',');
        if (fields.size() != 2)
            throw parse_error(where + ": expected 2 fields, got " + std::to_string(fields.size()));

        SubsetClassCounts counts;
        counts.subset_id = fields[0];
        if (counts.subset_id.empty())
            throw parse_error(where + ": blank subset_id");
        if (!seen.insert(counts.subset_id).second)
            throw parse_error(where + ": duplicate subset_id '" + counts.subset_id + "'");

        std::istringstream values(fields[1]);
        std::string token;
        while (values >> token) {
            const long long c = detail::parse_int(token, where);
            if (c < 0)
                throw parse_error(where + ": negative class count");
            counts.counts.push_back(c);
        }
        if (counts.counts.empty())
            throw parse_error(where + ": no class counts");
        out.push_back(std::move(counts));
    }
    if (out.empty())
        throw parse_error(path + ": no subset rows");
    return out;
}

inline ClassScheme parse_scheme(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("name") || !j.contains("classes"))
        throw parse_error("scheme: expected an object with 'name' and 'classes'");
    std::vector<SchemeClass> classes;
    for (const auto& c : j.at("classes")) {
        SchemeClass sc;
        sc.lower_bound = c.at("lower_bound").get<int>();
        sc.weight = c.at("weight").get<double>();
        sc.expected_proportion = c.at("expected_proportion").get<double>();
        classes.push_back(sc);
    }
    return make_scheme(j.at("name").get<std::string>(), std::move(classes));
}

inline nlohmann::json scheme_to_json(const ClassScheme& scheme) {
    nlohmann::json classes = nlohmann::json::array();
    for (const auto& c : scheme.classes)
        classes.push_back({{"lower_bound", c.lower_bound},
                           {"weight", c.weight},
                           {"expected_proportion", c.expected_proportion}});
    return {{"name", scheme.name}, {"classes", classes}};
}

inline ClassScheme load_scheme_file(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw parse_error("cannot open '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw parse_error(path + ": invalid JSON: " + e.what());
    }
    try {
        return parse_scheme(j);
    } catch (const nlohmann::json::exception& e) {
        throw parse_error(path + ": " + e.what());
    } catch (const std::invalid_argument& e) {
        throw parse_error(path + ": " + e.what());
    }
}

} // namespace pctrank
