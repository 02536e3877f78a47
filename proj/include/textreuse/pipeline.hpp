#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "textreuse/alignment.hpp"
#include "textreuse/ingest.hpp"
#include "textreuse/records.hpp"
#include "textreuse/retrieval.hpp"

namespace textreuse {

enum class RetrievalMode { minhash, exact };

std::string_view to_string(RetrievalMode mode) noexcept;
RetrievalMode parse_retrieval_mode(std::string_view name);

struct RunConfig {
    std::filesystem::path input;
    std::filesystem::path output;         // directory: cases.jsonl, publications.jsonl, manifest.json
    std::filesystem::path checkpoint_dir; // empty: no checkpointing

    std::size_t n_passage = kPassageLength;
    std::size_t m = kMinHashCount;
    std::size_t j_min = kMinSharedTerms;
    RetrievalMode retrieval = RetrievalMode::minhash;
    std::size_t df_cap = kDocumentFrequencyCap;

    AlignParams align;
    OutputMode mode = OutputMode::full;

    std::size_t min_words = kMinWords;
    std::size_t max_words = kMaxWords;
    std::size_t workers = 0; // 0: hardware concurrency
    std::uint64_t seed = 42;
    std::string run_namespace{kDefaultRunNamespace};
    std::size_t retries = 1;
    bool stop_after_retrieval = false;

    // Throws ConfigError naming the offending parameter.
    void validate() const;
    std::string to_json() const;
};

class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class PipelineError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct RunSummary {
    std::size_t documents_in = 0;
    std::size_t documents_filtered = 0; // removed by the length filter
    std::size_t documents_kept = 0;
    std::size_t load_diagnostics = 0;
    std::size_t candidate_pairs = 0;
    std::size_t total_pairs = 0;
    double pruning_ratio = 0.0; // 1 - candidates / C(kept, 2)
    std::size_t dropped_hashes = 0;
    std::size_t cases = 0;
    bool resumed = false;
    bool completed = false; // false when stopped after retrieval
};

// Normalizes and length-filters; output sorted by doi.
std::vector<Document> prepare_documents(std::span<const RawDocument> raw, const RunConfig& config,
                                        std::size_t* filtered = nullptr);

struct RetrievalResult {
    std::vector<CandidatePair> candidates;
    std::size_t dropped_hashes = 0;
};

RetrievalResult retrieve(std::span<const Document> docs, const RunConfig& config);

/// Aligns every candidate pair; cases sorted by (doi_a, doi_b, begin_a,
/// begin_b). `align_fn` replaces align_pair (used to inject failures).
using AlignFn = std::function<std::vector<ReuseCase>(const Document&, const Document&)>;
std::vector<ReuseCase> align_candidates(std::span<const Document> docs, std::span<const CandidatePair> candidates,
                                        const RunConfig& config, const AlignFn& align_fn = {});

/// ingest -> retrieve -> align -> emit. With a checkpoint directory the
/// candidate set is stored after retrieval and reused by later runs whose
/// corpus and retrieval settings match; a mismatching checkpoint makes the
/// run fail.
RunSummary run_pipeline(const RunConfig& config, std::ostream* log = nullptr);

struct CaseStats {
    std::size_t records = 0;
    std::size_t malformed = 0;
    std::size_t cases = 0;
    std::map<std::string, std::size_t> by_year;
    std::map<std::string, std::size_t> by_field;
    std::map<std::string, std::size_t> by_area;
    std::map<std::string, std::size_t> by_discipline;
    std::map<std::size_t, std::size_t> length_histogram;     // bucket floor (chars) -> side count
    std::map<std::size_t, std::size_t> partners_per_document; // partner count -> documents
    std::vector<Diagnostic> diagnostics;
};

inline constexpr std::size_t kLengthBucket = 100;

/// Per-case counts: a case counts once for each distinct year, field, area
/// and discipline across its two sides. Both sides contribute to the length
/// histogram. Malformed records are counted and skipped.
CaseStats compute_stats(std::istream& cases, const std::string& source = "<cases>");
std::string to_json(const CaseStats& stats);

} // namespace textreuse
