#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "textreuse/ingest.hpp"

namespace textreuse {

inline constexpr std::size_t kNGramSize = 8;
inline constexpr std::size_t kNGramOverlap = 7;
inline constexpr std::size_t kExtensionRange = 250;
inline constexpr std::size_t kMinSeeds = 2;
inline constexpr std::size_t kContextLength = 100;

struct AlignParams {
    std::size_t n_gram = kNGramSize;
    std::size_t overlap = kNGramOverlap; // k; stride is n_gram - overlap
    std::size_t delta = kExtensionRange; // maximum character gap between linked seeds
    std::size_t min_seeds = kMinSeeds;

    void validate() const;
    auto operator<=>(const AlignParams&) const = default;
};

struct NGram {
    std::size_t start_token = 0;
    CharSpan chars;
    std::uint64_t hash = 0;
};

struct Seed {
    CharSpan a;
    CharSpan b;
    std::size_t token_a = 0;
    std::size_t token_b = 0;

    auto operator<=>(const Seed&) const = default;
};

// A merged pair of aligned spans and the number of seeds behind it.
struct SpanPair {
    CharSpan a;
    CharSpan b;
    std::size_t seeds = 0;

    auto operator<=>(const SpanPair&) const = default;
};

// Hash over the space-joined tokens.
std::uint64_t ngram_hash(std::span<const std::string> tokens);

// Windows of n_gram tokens at stride n_gram - overlap.
std::vector<NGram> chunk_ngrams(const Document& doc, std::size_t n_gram = kNGramSize,
                                std::size_t overlap = kNGramOverlap);

/// Every pair of equal n-grams between a and b, verified token by token.
/// Sorted by (a.begin, b.begin).
std::vector<Seed> seed_matches(const Document& a, const Document& b, std::size_t n_gram = kNGramSize,
                               std::size_t overlap = kNGramOverlap);

/// Single-linkage clustering of seeds: two seeds link when the character gap
/// between them is at most `delta` in both documents. Clusters whose bounding
/// spans overlap in both documents are merged as well. Each cluster with at
/// least `min_seeds` members yields its bounding spans. Sorted by
/// (a.begin, b.begin).
std::vector<SpanPair> extend(std::span<const Seed> seeds, std::size_t delta = kExtensionRange,
                             std::size_t min_seeds = kMinSeeds);

std::vector<SpanPair> align_spans(const Document& a, const Document& b, const AlignParams& params = {});

struct CaseSide {
    std::string text;
    std::string before;
    std::string after;
    std::size_t begin = 0;
    std::size_t end = 0;
    std::size_t doc_length = 0;
    std::string doi;
    Metadata metadata;

    bool operator==(const CaseSide&) const = default;
};

struct ReuseCase {
    std::string id;
    CaseSide a;
    CaseSide b;

    bool operator==(const ReuseCase&) const = default;
};

inline constexpr std::string_view kDefaultRunNamespace = "textreuse";

std::string case_id(std::string_view run_namespace, std::string_view doi_a, std::string_view doi_b,
                    CharSpan a, CharSpan b);

ReuseCase make_case(const Document& a, const Document& b, const SpanPair& spans,
                    std::string_view run_namespace = kDefaultRunNamespace);

/// seed_matches -> extend -> case materialization. Side a is always the first
/// argument; callers pass canonically ordered documents.
std::vector<ReuseCase> align_pair(const Document& a, const Document& b, const AlignParams& params = {},
                                  std::string_view run_namespace = kDefaultRunNamespace);

} // namespace textreuse
