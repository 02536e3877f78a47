#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace textreuse {

// Half-open character interval [begin, end).
struct CharSpan {
    std::size_t begin = 0;
    std::size_t end = 0;

    std::size_t size() const noexcept { return end - begin; }
    bool empty() const noexcept { return end <= begin; }
    auto operator<=>(const CharSpan&) const = default;
};

struct Metadata {
    std::optional<std::int64_t> year;
    std::optional<std::vector<std::string>> field;
    std::optional<std::vector<std::string>> area;
    std::optional<std::vector<std::string>> discipline;

    bool operator==(const Metadata&) const = default;
};

struct RawDocument {
    std::string doi;
    std::string text; // UTF-8
    Metadata metadata;

    bool operator==(const RawDocument&) const = default;
};

/// A normalized document. `normalized_text` holds Unicode code points, so
/// every offset (token spans, case locators, doc_length) counts characters,
/// not bytes. `raw_offsets[i]` is the code-point offset in the raw text of
/// normalized character i; the trailing sentinel equals the raw length.
struct Document {
    std::string doi;
    std::vector<std::string> tokens; // UTF-8
    std::vector<CharSpan> token_spans;
    std::u32string normalized_text;
    std::vector<std::size_t> raw_offsets;
    Metadata metadata;

    std::size_t doc_length() const noexcept { return normalized_text.size(); }
    std::size_t token_count() const noexcept { return tokens.size(); }

    // UTF-8 substring of normalized_text; span is clamped to the text.
    std::string text(CharSpan span) const;
    std::string text() const { return text({0, doc_length()}); }

    // Maps a raw-text span to the smallest normalized span covering the
    // same letters.
    CharSpan to_normalized(CharSpan raw) const;
};

class IngestError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline constexpr std::size_t kMinWords = 1000;
inline constexpr std::size_t kMaxWords = 60000;

// Throws IngestError on malformed UTF-8.
Document normalize(const RawDocument& raw);
Document normalize(std::string doi, std::string_view text);

bool length_filter(const Document& doc, std::size_t min_words = kMinWords,
                   std::size_t max_words = kMaxWords) noexcept;

std::u32string decode_utf8(std::string_view utf8);
std::string encode_utf8(std::u32string_view text);

struct Diagnostic {
    std::string source;
    std::size_t line = 0; // 1-based; 0 for file-level diagnostics
    std::string message;
};

struct CorpusLoad {
    std::vector<RawDocument> documents;
    std::vector<Diagnostic> diagnostics;
};

// Parses one corpus record. Throws IngestError describing the defect.
RawDocument parse_document_record(std::string_view line);
std::string to_document_record(const RawDocument& doc);

/// Reads a line-delimited corpus file, or every regular file of a directory
/// in lexicographic order. Malformed lines are reported and skipped. A
/// duplicate doi keeps the position of its first occurrence and the content
/// of its last. An unreadable path throws IngestError.
CorpusLoad load_corpus(const std::filesystem::path& path);

} // namespace textreuse
