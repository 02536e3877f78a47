#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "textreuse/alignment.hpp"
#include "textreuse/ingest.hpp"

namespace textreuse {

// Obfuscation strategy of an annotated pair. `none` is verbatim reuse.
enum class Strategy { none, no_plagiarism, random, translation, summary };

std::string_view to_string(Strategy s) noexcept;
std::string_view display_name(Strategy s) noexcept;
Strategy parse_strategy(std::string_view name);

struct GoldSpan {
    CharSpan a;
    CharSpan b;

    auto operator<=>(const GoldSpan&) const = default;
};

struct GoldAnnotation {
    std::string pair_id;
    std::string doi_a; // doi_a < doi_b
    std::string doi_b;
    std::vector<GoldSpan> spans;
    Strategy strategy = Strategy::none;

    bool operator==(const GoldAnnotation&) const = default;
};

struct Detection {
    std::string doi_a;
    std::string doi_b;
    CharSpan a;
    CharSpan b;
};

Detection to_detection(const ReuseCase& c);
std::vector<Detection> to_detections(std::span<const ReuseCase> cases);

enum class Averaging { macro, micro };

struct EvalOptions {
    Averaging averaging = Averaging::macro;
    // Score detections on pairs absent from the gold set as no-plagiarism
    // pairs instead of rejecting them.
    bool score_unlisted_pairs = false;
    // Also report plagdet = F1 / log2(1 + granularity).
    bool fold_granularity = false;
    double beta = 0.5;
};

struct PrecisionRecall {
    double precision = 1.0;
    double recall = 1.0;
};

class EvaluationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Character-level precision and recall over both sides of every pair. A
/// pair without detections has precision 1; a pair without gold characters
/// has recall 1. Throws EvaluationError for a detection on a pair missing
/// from the gold set unless options.score_unlisted_pairs is set.
PrecisionRecall char_precision_recall(std::span<const GoldAnnotation> gold, std::span<const Detection> detected,
                                      const EvalOptions& options = {});

double f_beta(double precision, double recall, double beta = 0.5) noexcept;

/// Mean number of detections overlapping (in both documents) each gold span
/// that is detected at all; 1.0 when nothing is detected.
double granularity(std::span<const GoldAnnotation> gold, std::span<const Detection> detected);

struct StrategyScores {
    std::string label;
    std::size_t pairs = 0;
    std::size_t gold_cases = 0;
    std::size_t detections = 0;
    double precision = 1.0;
    double recall = 1.0;
    double f_beta = 1.0;
    double granularity = 1.0;
    std::optional<double> plagdet;
};

struct EvaluationReport {
    double beta = 0.5;
    Averaging averaging = Averaging::macro;
    std::vector<StrategyScores> strategies; // table order, present ones only
    StrategyScores overall;
};

EvaluationReport evaluate(std::span<const GoldAnnotation> gold, std::span<const Detection> detected,
                          const EvalOptions& options = {});

// One JSON object per row (strategies, then overall).
std::string to_jsonl(const EvaluationReport& report);
// Aligned plain-text table: Precision, Recall, F.
std::string to_table(const EvaluationReport& report);

std::string to_gold_record(const GoldAnnotation& gold);
GoldAnnotation parse_gold_record(std::string_view line);
std::vector<GoldAnnotation> read_gold(std::istream& in);

struct GridRanges {
    std::vector<std::size_t> n_gram;
    std::vector<std::size_t> overlap;
    std::vector<std::size_t> delta;
};

struct GridRow {
    AlignParams params;
    double precision = 0;
    double recall = 0;
    double f_beta = 0;
    std::size_t detections = 0;
};

/// Aligns every gold pair under each parameter combination (combinations with
/// overlap >= n_gram are skipped) and ranks rows by F-beta, descending; ties
/// keep (n_gram, overlap, delta) order. Throws std::invalid_argument on an
/// empty range or when no combination is valid.
std::vector<GridRow> grid_search(std::span<const Document> docs, std::span<const GoldAnnotation> gold,
                                 const GridRanges& ranges, std::size_t min_seeds = kMinSeeds,
                                 const EvalOptions& options = {}, std::size_t workers = 1);

std::string to_table(std::span<const GridRow> rows);

} // namespace textreuse
