#include "textreuse/records.hpp"

#include <stdexcept>

#include <json.hpp>

namespace textreuse {

namespace {

using ojson = nlohmann::ordered_json;
using json = nlohmann::json;

ojson optional_list(const std::optional<std::vector<std::string>>& values) {
    return values ? ojson(*values) : ojson(nullptr);
}

void write_side(ojson& out, const CaseSide& side, const std::string& suffix, OutputMode mode) {
    if (mode == OutputMode::full) {
        out["text" + suffix] = side.text;
        out["before" + suffix] = side.before;
        out["after" + suffix] = side.after;
    }
    out["begin" + suffix] = side.begin;
    out["end" + suffix] = side.end;
    out["doc_length" + suffix] = side.doc_length;
    out["doi" + suffix] = side.doi;
    out["year" + suffix] = side.metadata.year ? ojson(*side.metadata.year) : ojson(nullptr);
    out["field" + suffix] = optional_list(side.metadata.field);
    out["area" + suffix] = optional_list(side.metadata.area);
    out["discipline" + suffix] = optional_list(side.metadata.discipline);
}

const json& require(const json& record, const std::string& key) {
    auto it = record.find(key);
    if (it == record.end()) throw std::runtime_error("missing key '" + key + "'");
    return *it;
}

std::size_t read_offset(const json& record, const std::string& key) {
    const auto& v = require(record, key);
    if (!v.is_number_unsigned()) throw std::runtime_error("'" + key + "' must be a non-negative integer");
    return v.get<std::size_t>();
}

std::optional<std::vector<std::string>> read_list(const json& record, const std::string& key) {
    const auto& v = require(record, key);
    if (v.is_null()) return std::nullopt;
    if (!v.is_array()) throw std::runtime_error("'" + key + "' must be an array or null");
    std::vector<std::string> out;
    for (const auto& item : v) {
        if (!item.is_string()) throw std::runtime_error("'" + key + "' must contain strings");
        out.push_back(item.get<std::string>());
    }
    return out;
}

CaseSide read_side(const json& record, const std::string& suffix) {
    CaseSide side;
    auto text = [&](const std::string& key) -> std::string {
        auto it = record.find(key);
        if (it == record.end()) return {};
        if (!it->is_string()) throw std::runtime_error("'" + key + "' must be a string");
        return it->get<std::string>();
    };
    side.text = text("text" + suffix);
    side.before = text("before" + suffix);
    side.after = text("after" + suffix);
    side.begin = read_offset(record, "begin" + suffix);
    side.end = read_offset(record, "end" + suffix);
    side.doc_length = read_offset(record, "doc_length" + suffix);
    if (!(side.begin < side.end && side.end <= side.doc_length)) {
        throw std::runtime_error("invalid locator on side" + suffix);
    }
    const auto& doi = require(record, "doi" + suffix);
    if (!doi.is_string() || doi.get_ref<const std::string&>().empty()) {
        throw std::runtime_error("'doi" + suffix + "' must be a non-empty string");
    }
    side.doi = doi.get<std::string>();
    const auto& year = require(record, "year" + suffix);
    if (!year.is_null()) {
        if (!year.is_number_integer()) throw std::runtime_error("'year" + suffix + "' must be an integer or null");
        side.metadata.year = year.get<std::int64_t>();
    }
    side.metadata.field = read_list(record, "field" + suffix);
    side.metadata.area = read_list(record, "area" + suffix);
    side.metadata.discipline = read_list(record, "discipline" + suffix);
    return side;
}

} // namespace

std::string_view to_string(OutputMode mode) noexcept {
    return mode == OutputMode::full ? "full" : "metadata-only";
}

OutputMode parse_output_mode(std::string_view name) {
    if (name == "full") return OutputMode::full;
    if (name == "metadata-only") return OutputMode::metadata_only;
    throw std::invalid_argument("unknown output mode '" + std::string(name) + "'");
}

std::string to_case_record(const ReuseCase& c, OutputMode mode) {
    ojson out;
    out["id"] = c.id;
    write_side(out, c.a, "_a", mode);
    write_side(out, c.b, "_b", mode);
    return out.dump();
}

ReuseCase parse_case_record(std::string_view line) {
    json record;
    try {
        record = json::parse(line);
    } catch (const json::parse_error& e) {
        throw std::runtime_error(std::string("invalid JSON: ") + e.what());
    }
    if (!record.is_object()) throw std::runtime_error("case record is not an object");
    ReuseCase c;
    const auto& id = require(record, "id");
    if (!id.is_string()) throw std::runtime_error("'id' must be a string");
    c.id = id.get<std::string>();
    c.a = read_side(record, "_a");
    c.b = read_side(record, "_b");
    return c;
}

std::string to_publication_record(const Document& doc) {
    ojson out;
    out["doi"] = doc.doi;
    out["doc_length"] = doc.doc_length();
    out["year"] = doc.metadata.year ? ojson(*doc.metadata.year) : ojson(nullptr);
    out["field"] = optional_list(doc.metadata.field);
    out["area"] = optional_list(doc.metadata.area);
    out["discipline"] = optional_list(doc.metadata.discipline);
    return out.dump();
}

} // namespace textreuse
