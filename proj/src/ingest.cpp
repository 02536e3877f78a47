#include "textreuse/ingest.hpp"

#include <algorithm>
#include <fstream>
#include <unordered_map>

#include <json.hpp>
#include <unicode/uchar.h>
#include <unicode/utf8.h>

namespace textreuse {

namespace {

using json = nlohmann::json;

void append_utf8(std::string& out, char32_t cp) {
    if (cp < 0x80) {
        out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
        out.push_back(static_cast<char>(0xc0 | (cp >> 6)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3f)));
    } else if (cp < 0x10000) {
        out.push_back(static_cast<char>(0xe0 | (cp >> 12)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3f)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3f)));
    } else {
        out.push_back(static_cast<char>(0xf0 | (cp >> 18)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3f)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3f)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3f)));
    }
}

std::optional<std::vector<std::string>> string_list(const json& record, const char* key) {
    auto it = record.find(key);
    if (it == record.end() || it->is_null()) {
        return std::nullopt;
    }
    if (!it->is_array()) {
        throw IngestError(std::string("field '") + key + "' must be an array of strings");
    }
    std::vector<std::string> values;
    values.reserve(it->size());
    for (const auto& v : *it) {
        if (!v.is_string()) {
            throw IngestError(std::string("field '") + key + "' must be an array of strings");
        }
        auto s = v.get<std::string>();
        if (s.empty()) {
            throw IngestError(std::string("field '") + key + "' contains an empty string");
        }
        values.push_back(std::move(s));
    }
    return values;
}

} // namespace

std::u32string decode_utf8(std::string_view utf8) {
    std::u32string out;
    out.reserve(utf8.size());
    const auto* s = reinterpret_cast<const uint8_t*>(utf8.data());
    const auto length = static_cast<int32_t>(utf8.size());
    int32_t i = 0;
    while (i < length) {
        const int32_t at = i;
        UChar32 c;
        U8_NEXT(s, i, length, c);
        if (c < 0) {
            throw IngestError("malformed UTF-8 at byte " + std::to_string(at));
        }
        out.push_back(static_cast<char32_t>(c));
    }
    return out;
}

std::string encode_utf8(std::u32string_view text) {
    std::string out;
    out.reserve(text.size());
    for (char32_t cp : text) {
        append_utf8(out, cp);
    }
    return out;
}

std::string Document::text(CharSpan span) const {
    const std::size_t end = std::min(span.end, normalized_text.size());
    const std::size_t begin = std::min(span.begin, end);
    return encode_utf8(std::u32string_view(normalized_text).substr(begin, end - begin));
}

CharSpan Document::to_normalized(CharSpan raw) const {
    // raw_offsets is non-decreasing with a sentinel, so lower_bound finds the
    // first normalized character at or after each raw position.
    const auto last = raw_offsets.end() - 1;
    auto b = std::lower_bound(raw_offsets.begin(), last, raw.begin);
    auto e = std::lower_bound(raw_offsets.begin(), last, raw.end);
    auto begin = static_cast<std::size_t>(b - raw_offsets.begin());
    auto end = static_cast<std::size_t>(e - raw_offsets.begin());
    // Trim separator spaces so the span starts and ends on letters.
    while (begin < end && normalized_text[begin] == U' ') ++begin;
    while (end > begin && normalized_text[end - 1] == U' ') --end;
    return {begin, end};
}

Document normalize(std::string doi, std::string_view text) {
    const std::u32string raw = decode_utf8(text);

    Document doc;
    doc.doi = std::move(doi);
    doc.normalized_text.reserve(raw.size());
    doc.raw_offsets.reserve(raw.size() + 1);

    std::string token;
    std::size_t token_begin = 0;
    bool in_token = false;
    bool pending_space = false;

    auto close_token = [&] {
        doc.token_spans.push_back({token_begin, doc.normalized_text.size()});
        doc.tokens.push_back(std::move(token));
        token.clear();
        in_token = false;
    };

    std::size_t separator_at = 0;
    for (std::size_t i = 0; i < raw.size(); ++i) {
        const auto c = static_cast<UChar32>(raw[i]);
        if (u_isalpha(c)) {
            if (!in_token) {
                if (pending_space) {
                    doc.normalized_text.push_back(U' ');
                    doc.raw_offsets.push_back(separator_at);
                    pending_space = false;
                }
                token_begin = doc.normalized_text.size();
                in_token = true;
            }
            const auto lower = static_cast<char32_t>(u_tolower(c));
            doc.normalized_text.push_back(lower);
            doc.raw_offsets.push_back(i);
            append_utf8(token, lower);
        } else {
            if (in_token) {
                close_token();
                pending_space = true;
                separator_at = i;
            }
        }
    }
    if (in_token) {
        close_token();
    }
    doc.raw_offsets.push_back(raw.size());
    return doc;
}

Document normalize(const RawDocument& raw) {
    Document doc = normalize(raw.doi, raw.text);
    doc.metadata = raw.metadata;
    return doc;
}

bool length_filter(const Document& doc, std::size_t min_words, std::size_t max_words) noexcept {
    return doc.token_count() >= min_words && doc.token_count() <= max_words;
}

RawDocument parse_document_record(std::string_view line) {
    json record;
    try {
        record = json::parse(line);
    } catch (const json::parse_error& e) {
        throw IngestError(std::string("invalid JSON: ") + e.what());
    }
    if (!record.is_object()) {
        throw IngestError("record is not a JSON object");
    }

    RawDocument doc;
    auto doi = record.find("doi");
    if (doi == record.end() || !doi->is_string() || doi->get_ref<const std::string&>().empty()) {
        throw IngestError("missing or empty 'doi'");
    }
    doc.doi = doi->get<std::string>();

    auto text = record.find("text");
    if (text == record.end() || !text->is_string()) {
        throw IngestError("missing 'text'");
    }
    doc.text = text->get<std::string>();

    if (auto year = record.find("year"); year != record.end() && !year->is_null()) {
        if (!year->is_number_integer()) {
            throw IngestError("'year' must be an integer");
        }
        doc.metadata.year = year->get<std::int64_t>();
    }
    doc.metadata.field = string_list(record, "field");
    doc.metadata.area = string_list(record, "area");
    doc.metadata.discipline = string_list(record, "discipline");
    return doc;
}

std::string to_document_record(const RawDocument& doc) {
    nlohmann::ordered_json record;
    record["doi"] = doc.doi;
    record["text"] = doc.text;
    if (doc.metadata.year) record["year"] = *doc.metadata.year;
    if (doc.metadata.field) record["field"] = *doc.metadata.field;
    if (doc.metadata.area) record["area"] = *doc.metadata.area;
    if (doc.metadata.discipline) record["discipline"] = *doc.metadata.discipline;
    return record.dump();
}

CorpusLoad load_corpus(const std::filesystem::path& path) {
    namespace fs = std::filesystem;

    std::vector<fs::path> files;
    std::error_code ec;
    if (fs::is_directory(path, ec)) {
        for (const auto& entry : fs::directory_iterator(path)) {
            if (entry.is_regular_file()) {
                files.push_back(entry.path());
            }
        }
        std::sort(files.begin(), files.end());
    } else {
        files.push_back(path);
    }

    CorpusLoad result;
    std::unordered_map<std::string, std::size_t> position;
    for (const auto& file : files) {
        std::ifstream in(file, std::ios::binary);
        if (!in) {
            throw IngestError("cannot read corpus file " + file.string());
        }
        std::string line;
        std::size_t line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (line.find_first_not_of(" \t") == std::string::npos) continue;
            try {
                RawDocument doc = parse_document_record(line);
                auto [it, inserted] = position.try_emplace(doc.doi, result.documents.size());
                if (inserted) {
                    result.documents.push_back(std::move(doc));
                } else {
                    result.diagnostics.push_back(
                        {file.string(), line_no, "duplicate doi '" + doc.doi + "'; keeping the last record"});
                    result.documents[it->second] = std::move(doc);
                }
            } catch (const IngestError& e) {
                result.diagnostics.push_back({file.string(), line_no, e.what()});
            }
        }
        if (in.bad()) {
            throw IngestError("read error in corpus file " + file.string());
        }
    }
    return result;
}

} // namespace textreuse
