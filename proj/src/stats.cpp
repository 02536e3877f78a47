#include "textreuse/pipeline.hpp"

#include <istream>
#include <set>

#include <json.hpp>

namespace textreuse {

namespace {

void count_lists(std::map<std::string, std::size_t>& counts, const std::optional<std::vector<std::string>>& a,
                 const std::optional<std::vector<std::string>>& b) {
    std::set<std::string> values;
    if (a) values.insert(a->begin(), a->end());
    if (b) values.insert(b->begin(), b->end());
    for (const auto& v : values) ++counts[v];
}

template <typename Map>
nlohmann::ordered_json to_object(const Map& m) {
    nlohmann::ordered_json j = nlohmann::ordered_json::object();
    for (const auto& [k, v] : m) {
        if constexpr (std::is_same_v<typename Map::key_type, std::string>) {
            j[k] = v;
        } else {
            j[std::to_string(k)] = v;
        }
    }
    return j;
}

} // namespace

CaseStats compute_stats(std::istream& in, const std::string& source) {
    CaseStats stats;
    std::map<std::string, std::set<std::string>> partners;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        ++stats.records;
        ReuseCase c;
        try {
            c = parse_case_record(line);
        } catch (const std::exception& e) {
            ++stats.malformed;
            stats.diagnostics.push_back({source, line_no, e.what()});
            continue;
        }
        ++stats.cases;

        std::set<std::string> years;
        if (c.a.metadata.year) years.insert(std::to_string(*c.a.metadata.year));
        if (c.b.metadata.year) years.insert(std::to_string(*c.b.metadata.year));
        for (const auto& y : years) ++stats.by_year[y];
        count_lists(stats.by_field, c.a.metadata.field, c.b.metadata.field);
        count_lists(stats.by_area, c.a.metadata.area, c.b.metadata.area);
        count_lists(stats.by_discipline, c.a.metadata.discipline, c.b.metadata.discipline);

        for (const auto* side : {&c.a, &c.b}) {
            ++stats.length_histogram[(side->end - side->begin) / kLengthBucket * kLengthBucket];
        }
        partners[c.a.doi].insert(c.b.doi);
        partners[c.b.doi].insert(c.a.doi);
    }
    for (const auto& [doi, set] : partners) ++stats.partners_per_document[set.size()];
    return stats;
}

std::string to_json(const CaseStats& stats) {
    nlohmann::ordered_json j;
    j["records"] = stats.records;
    j["malformed"] = stats.malformed;
    j["cases"] = stats.cases;
    j["by_year"] = to_object(stats.by_year);
    j["by_field"] = to_object(stats.by_field);
    j["by_area"] = to_object(stats.by_area);
    j["by_discipline"] = to_object(stats.by_discipline);
    j["length_bucket_chars"] = kLengthBucket;
    j["length_histogram"] = to_object(stats.length_histogram);
    j["partners_per_document"] = to_object(stats.partners_per_document);
    return j.dump(2);
}

} // namespace textreuse
