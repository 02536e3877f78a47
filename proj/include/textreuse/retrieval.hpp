#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "textreuse/ingest.hpp"

namespace textreuse {

inline constexpr std::size_t kPassageLength = 50;
inline constexpr std::size_t kMinHashCount = 10;
inline constexpr std::size_t kMinSharedTerms = 9;
inline constexpr std::size_t kDocumentFrequencyCap = 1000;

struct TokenRange {
    std::size_t begin = 0;
    std::size_t end = 0;

    std::size_t size() const noexcept { return end - begin; }
    auto operator<=>(const TokenRange&) const = default;
};

struct Passage {
    std::string doi;
    std::size_t index = 0;
    TokenRange token_range;
    std::vector<std::string> term_set; // sorted, distinct
};

struct PassageSketch {
    std::string doi;
    std::size_t passage_index = 0;
    std::vector<std::uint64_t> hashes; // sorted, distinct, at most m values
};

struct CandidatePair {
    std::string doi_a; // doi_a < doi_b
    std::string doi_b;
    std::size_t evidence = 0;

    auto operator<=>(const CandidatePair&) const = default;
};

// Consecutive non-overlapping passages; the last may be shorter.
std::vector<Passage> chunk_passages(const Document& doc, std::size_t n_passage = kPassageLength);

/// Per-function minima: element j is min over terms of h_j(term), where the
/// h_j are m hash functions derived from `seed`. Throws on an empty set.
std::vector<std::uint64_t> minhash_signature(std::span<const std::string> term_set, std::size_t m,
                                             std::uint64_t seed);

PassageSketch minhash_sketch(const Passage& passage, std::size_t m, std::uint64_t seed);

struct SketchParams {
    std::size_t n_passage = kPassageLength;
    std::size_t m = kMinHashCount;
    std::uint64_t seed = 0;
};

// Sketches every passage with at least two distinct terms.
std::vector<PassageSketch> sketch_document(const Document& doc, const SketchParams& params);

struct Posting {
    std::uint32_t doc = 0; // rank of the doi in InvertedIndex::dois()
    std::uint32_t passage = 0;

    auto operator<=>(const Posting&) const = default;
};

struct DroppedPosting {
    std::uint64_t hash = 0;
    std::size_t document_frequency = 0;
};

struct IndexOptions {
    std::size_t df_cap = kDocumentFrequencyCap;
    std::size_t workers = 1;
};

/// Hash value -> postings, sorted by document then passage. Immutable once
/// built.
class InvertedIndex {
public:
    const std::vector<std::string>& dois() const noexcept { return dois_; }
    std::span<const Posting> postings(std::uint64_t hash) const;

    std::size_t hash_count() const noexcept { return lists_.size(); }
    std::size_t entry_count() const noexcept;
    // Number of lists whose postings span two or more documents.
    std::size_t multi_document_lists() const noexcept;
    const std::vector<DroppedPosting>& dropped() const noexcept { return dropped_; }

    template <typename Fn>
    void for_each_list(Fn&& fn) const {
        for (const auto& [hash, list] : lists_) fn(hash, std::span<const Posting>(list));
    }

private:
    friend InvertedIndex build_index(std::span<const PassageSketch>, const IndexOptions&);

    std::vector<std::string> dois_;
    std::unordered_map<std::uint64_t, std::vector<Posting>> lists_;
    std::vector<DroppedPosting> dropped_;
};

/// Lists touching more than df_cap documents are dropped and reported in
/// InvertedIndex::dropped().
InvertedIndex build_index(std::span<const PassageSketch> sketches, const IndexOptions& options = {});

/// Every unordered document pair co-occurring in a posting list. Evidence
/// counts (hash, passage pair) co-occurrences. Sorted by (doi_a, doi_b).
std::vector<CandidatePair> retrieve_candidates(const InvertedIndex& index, std::size_t workers = 1);

/// Exact variant: a pair is a candidate iff some passage pair shares at least
/// j_min distinct terms. Evidence counts the qualifying passage pairs.
std::vector<CandidatePair> retrieve_candidates_exact(std::span<const Document> docs,
                                                     std::size_t n_passage = kPassageLength,
                                                     std::size_t j_min = kMinSharedTerms,
                                                     std::size_t workers = 1);

// Checkpoint format: doi_a<TAB>doi_b<TAB>evidence per line.
void write_candidates(std::ostream& out, std::span<const CandidatePair> pairs);
std::vector<CandidatePair> read_candidates(std::istream& in);

} // namespace textreuse
