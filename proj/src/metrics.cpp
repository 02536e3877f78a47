#include "textreuse/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <map>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

#include "textreuse/parallel.hpp"

namespace textreuse {

namespace {

using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

constexpr Strategy kStrategies[] = {Strategy::none, Strategy::no_plagiarism, Strategy::random,
                                    Strategy::summary, Strategy::translation};

std::vector<CharSpan> merge_intervals(std::vector<CharSpan> spans) {
    std::erase_if(spans, [](CharSpan s) { return s.empty(); });
    std::sort(spans.begin(), spans.end());
    std::vector<CharSpan> out;
    for (auto s : spans) {
        if (!out.empty() && s.begin <= out.back().end) {
            out.back().end = std::max(out.back().end, s.end);
        } else {
            out.push_back(s);
        }
    }
    return out;
}

std::size_t covered(const std::vector<CharSpan>& merged) {
    std::size_t n = 0;
    for (auto s : merged) n += s.size();
    return n;
}

std::size_t intersection(const std::vector<CharSpan>& x, const std::vector<CharSpan>& y) {
    std::size_t n = 0;
    for (std::size_t i = 0, j = 0; i < x.size() && j < y.size();) {
        const std::size_t lo = std::max(x[i].begin, y[j].begin);
        const std::size_t hi = std::min(x[i].end, y[j].end);
        if (lo < hi) n += hi - lo;
        (x[i].end < y[j].end) ? ++i : ++j;
    }
    return n;
}

bool overlaps(CharSpan x, CharSpan y) noexcept { return x.begin < y.end && y.begin < x.end; }

struct PairKey {
    std::string a;
    std::string b;
    auto operator<=>(const PairKey&) const = default;
};

PairKey canonical_key(const std::string& a, const std::string& b) { return a < b ? PairKey{a, b} : PairKey{b, a}; }

// One scored document pair: gold and detected spans with sides in key order.
struct PairData {
    Strategy strategy = Strategy::no_plagiarism;
    std::vector<GoldSpan> gold;
    std::vector<GoldSpan> detected;
};

struct PairCounts {
    std::size_t detected = 0;
    std::size_t gold = 0;
    std::size_t both = 0;
};

PairCounts count_pair(const PairData& pair) {
    std::vector<CharSpan> ga, gb, da, db;
    for (const auto& s : pair.gold) {
        ga.push_back(s.a);
        gb.push_back(s.b);
    }
    for (const auto& s : pair.detected) {
        da.push_back(s.a);
        db.push_back(s.b);
    }
    const auto mga = merge_intervals(std::move(ga)), mgb = merge_intervals(std::move(gb));
    const auto mda = merge_intervals(std::move(da)), mdb = merge_intervals(std::move(db));
    return {covered(mda) + covered(mdb), covered(mga) + covered(mgb),
            intersection(mga, mda) + intersection(mgb, mdb)};
}

std::map<PairKey, PairData> join_pairs(std::span<const GoldAnnotation> gold, std::span<const Detection> detected,
                                       const EvalOptions& options) {
    std::map<PairKey, PairData> pairs;
    for (const auto& g : gold) {
        const bool swap = g.doi_b < g.doi_a;
        auto [it, inserted] = pairs.try_emplace(canonical_key(g.doi_a, g.doi_b));
        if (!inserted) throw EvaluationError("duplicate gold pair " + g.doi_a + " / " + g.doi_b);
        it->second.strategy = g.strategy;
        for (const auto& s : g.spans) it->second.gold.push_back(swap ? GoldSpan{s.b, s.a} : s);
    }
    for (const auto& d : detected) {
        const bool swap = d.doi_b < d.doi_a;
        auto key = canonical_key(d.doi_a, d.doi_b);
        auto it = pairs.find(key);
        if (it == pairs.end()) {
            if (!options.score_unlisted_pairs) {
                throw EvaluationError("detection on unknown pair " + d.doi_a + " / " + d.doi_b);
            }
            it = pairs.try_emplace(std::move(key)).first;
        }
        it->second.detected.push_back(swap ? GoldSpan{d.b, d.a} : GoldSpan{d.a, d.b});
    }
    return pairs;
}

PrecisionRecall aggregate(const std::vector<PairCounts>& counts, Averaging averaging) {
    if (counts.empty()) return {};
    if (averaging == Averaging::micro) {
        PairCounts total;
        for (const auto& c : counts) {
            total.detected += c.detected;
            total.gold += c.gold;
            total.both += c.both;
        }
        return {total.detected ? double(total.both) / double(total.detected) : 1.0,
                total.gold ? double(total.both) / double(total.gold) : 1.0};
    }
    double p = 0, r = 0;
    for (const auto& c : counts) {
        p += c.detected ? double(c.both) / double(c.detected) : 1.0;
        r += c.gold ? double(c.both) / double(c.gold) : 1.0;
    }
    return {p / double(counts.size()), r / double(counts.size())};
}

// (detected gold spans, overlapping detections summed over them)
std::pair<std::size_t, std::size_t> granularity_counts(const PairData& pair) {
    std::size_t hit = 0, total = 0;
    for (const auto& g : pair.gold) {
        std::size_t n = 0;
        for (const auto& d : pair.detected) {
            if (overlaps(g.a, d.a) && overlaps(g.b, d.b)) ++n;
        }
        if (n > 0) {
            ++hit;
            total += n;
        }
    }
    return {hit, total};
}

StrategyScores score_group(std::string label, const std::vector<const PairData*>& group,
                           const EvalOptions& options) {
    StrategyScores s;
    s.label = std::move(label);
    s.pairs = group.size();
    std::vector<PairCounts> counts;
    std::size_t hit = 0, overlapping = 0;
    for (const auto* p : group) {
        counts.push_back(count_pair(*p));
        s.gold_cases += p->gold.size();
        s.detections += p->detected.size();
        auto [h, t] = granularity_counts(*p);
        hit += h;
        overlapping += t;
    }
    const auto pr = aggregate(counts, options.averaging);
    s.precision = pr.precision;
    s.recall = pr.recall;
    s.f_beta = f_beta(pr.precision, pr.recall, options.beta);
    s.granularity = hit ? double(overlapping) / double(hit) : 1.0;
    if (options.fold_granularity) {
        s.plagdet = f_beta(pr.precision, pr.recall, 1.0) / std::log2(1.0 + s.granularity);
    }
    return s;
}

std::string format_score(double v) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

} // namespace

std::string_view to_string(Strategy s) noexcept {
    switch (s) {
    case Strategy::none: return "none";
    case Strategy::no_plagiarism: return "no-plagiarism";
    case Strategy::random: return "random";
    case Strategy::translation: return "translation";
    case Strategy::summary: return "summary";
    }
    return "none";
}

std::string_view display_name(Strategy s) noexcept {
    switch (s) {
    case Strategy::none: return "No Obfuscation";
    case Strategy::no_plagiarism: return "No Plagiarism";
    case Strategy::random: return "Random Obfuscation";
    case Strategy::translation: return "Translation Obfuscation";
    case Strategy::summary: return "Summary Obfuscation";
    }
    return "No Obfuscation";
}

Strategy parse_strategy(std::string_view name) {
    for (auto s : kStrategies) {
        if (name == to_string(s)) return s;
    }
    throw std::invalid_argument("unknown strategy '" + std::string(name) + "'");
}

Detection to_detection(const ReuseCase& c) {
    return {c.a.doi, c.b.doi, {c.a.begin, c.a.end}, {c.b.begin, c.b.end}};
}

std::vector<Detection> to_detections(std::span<const ReuseCase> cases) {
    std::vector<Detection> out;
    out.reserve(cases.size());
    for (const auto& c : cases) out.push_back(to_detection(c));
    return out;
}

double f_beta(double precision, double recall, double beta) noexcept {
    const double b2 = beta * beta;
    const double denom = b2 * precision + recall;
    if (denom <= 0.0) return 0.0;
    return (1.0 + b2) * precision * recall / denom;
}

PrecisionRecall char_precision_recall(std::span<const GoldAnnotation> gold, std::span<const Detection> detected,
                                      const EvalOptions& options) {
    const auto pairs = join_pairs(gold, detected, options);
    std::vector<PairCounts> counts;
    counts.reserve(pairs.size());
    for (const auto& [key, pair] : pairs) counts.push_back(count_pair(pair));
    return aggregate(counts, options.averaging);
}

double granularity(std::span<const GoldAnnotation> gold, std::span<const Detection> detected) {
    EvalOptions options;
    options.score_unlisted_pairs = true;
    std::size_t hit = 0, total = 0;
    for (const auto& [key, pair] : join_pairs(gold, detected, options)) {
        auto [h, t] = granularity_counts(pair);
        hit += h;
        total += t;
    }
    return hit ? double(total) / double(hit) : 1.0;
}

EvaluationReport evaluate(std::span<const GoldAnnotation> gold, std::span<const Detection> detected,
                          const EvalOptions& options) {
    const auto pairs = join_pairs(gold, detected, options);
    EvaluationReport report;
    report.beta = options.beta;
    report.averaging = options.averaging;

    std::vector<const PairData*> all;
    for (const auto& [key, pair] : pairs) all.push_back(&pair);
    for (auto strategy : kStrategies) {
        std::vector<const PairData*> group;
        for (const auto* p : all) {
            if (p->strategy == strategy) group.push_back(p);
        }
        if (!group.empty()) {
            report.strategies.push_back(score_group(std::string(display_name(strategy)), group, options));
        }
    }
    report.overall = score_group("Entire Corpus", all, options);
    return report;
}

std::string to_jsonl(const EvaluationReport& report) {
    std::string out;
    auto row = [&](const StrategyScores& s) {
        ojson r;
        r["label"] = s.label;
        r["pairs"] = s.pairs;
        r["gold_cases"] = s.gold_cases;
        r["detections"] = s.detections;
        r["precision"] = s.precision;
        r["recall"] = s.recall;
        r["f_beta"] = s.f_beta;
        r["beta"] = report.beta;
        r["granularity"] = s.granularity;
        r["averaging"] = report.averaging == Averaging::macro ? "macro" : "micro";
        if (s.plagdet) r["plagdet"] = *s.plagdet;
        out += r.dump();
        out.push_back('\n');
    };
    for (const auto& s : report.strategies) row(s);
    row(report.overall);
    return out;
}

std::string to_table(const EvaluationReport& report) {
    std::size_t width = 13; // "Entire Corpus"
    for (const auto& s : report.strategies) width = std::max(width, s.label.size());
    const std::string f_label = report.beta == 0.5 ? "F0.5" : "F" + format_score(report.beta);
    const bool plagdet = report.overall.plagdet.has_value();

    std::ostringstream out;
    auto pad = [](const std::string& s, std::size_t w) { return s + std::string(w > s.size() ? w - s.size() : 0, ' '); };
    auto line = [&](const StrategyScores& s) {
        out << pad(s.label, width) << "   " << format_score(s.precision) << "       " << format_score(s.recall)
            << "    " << format_score(s.f_beta);
        if (plagdet) out << "   " << format_score(s.granularity) << "    " << format_score(*s.plagdet);
        out << '\n';
    };
    out << pad("", width) << "   Precision  Recall  " << f_label;
    if (plagdet) out << "   Gran.  PlagDet";
    out << '\n';
    for (const auto& s : report.strategies) line(s);
    out << std::string(width + 34 + (plagdet ? 16 : 0), '-') << '\n';
    line(report.overall);
    return out.str();
}

std::string to_gold_record(const GoldAnnotation& gold) {
    ojson out;
    out["pair_id"] = gold.pair_id;
    out["doi_a"] = gold.doi_a;
    out["doi_b"] = gold.doi_b;
    out["spans"] = ojson::array();
    for (const auto& s : gold.spans) {
        ojson span;
        span["begin_a"] = s.a.begin;
        span["end_a"] = s.a.end;
        span["begin_b"] = s.b.begin;
        span["end_b"] = s.b.end;
        out["spans"].push_back(std::move(span));
    }
    out["strategy"] = to_string(gold.strategy);
    return out.dump();
}

GoldAnnotation parse_gold_record(std::string_view line) {
    json record;
    try {
        record = json::parse(line);
    } catch (const json::parse_error& e) {
        throw EvaluationError(std::string("invalid JSON: ") + e.what());
    }
    auto str = [&](const char* key) {
        auto it = record.find(key);
        if (it == record.end() || !it->is_string()) {
            throw EvaluationError(std::string("gold record: missing string '") + key + "'");
        }
        return it->get<std::string>();
    };
    auto offset = [](const json& span, const char* key) {
        auto it = span.find(key);
        if (it == span.end() || !it->is_number_unsigned()) {
            throw EvaluationError(std::string("gold span: missing offset '") + key + "'");
        }
        return it->get<std::size_t>();
    };
    if (!record.is_object()) throw EvaluationError("gold record is not an object");
    GoldAnnotation g;
    g.pair_id = str("pair_id");
    g.doi_a = str("doi_a");
    g.doi_b = str("doi_b");
    try {
        g.strategy = parse_strategy(str("strategy"));
    } catch (const std::invalid_argument& e) {
        throw EvaluationError(e.what());
    }
    auto spans = record.find("spans");
    if (spans == record.end() || !spans->is_array()) throw EvaluationError("gold record: missing 'spans' array");
    for (const auto& s : *spans) {
        GoldSpan span{{offset(s, "begin_a"), offset(s, "end_a")}, {offset(s, "begin_b"), offset(s, "end_b")}};
        if (span.a.begin > span.a.end || span.b.begin > span.b.end) {
            throw EvaluationError("gold span: begin after end");
        }
        g.spans.push_back(span);
    }
    if (g.strategy == Strategy::no_plagiarism && !g.spans.empty()) {
        throw EvaluationError("gold record: no-plagiarism pair " + g.pair_id + " carries spans");
    }
    if (g.doi_b < g.doi_a) {
        std::swap(g.doi_a, g.doi_b);
        for (auto& s : g.spans) std::swap(s.a, s.b);
    }
    return g;
}

std::vector<GoldAnnotation> read_gold(std::istream& in) {
    std::vector<GoldAnnotation> gold;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            gold.push_back(parse_gold_record(line));
        } catch (const EvaluationError& e) {
            throw EvaluationError("gold line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return gold;
}

std::vector<GridRow> grid_search(std::span<const Document> docs, std::span<const GoldAnnotation> gold,
                                 const GridRanges& ranges, std::size_t min_seeds, const EvalOptions& options,
                                 std::size_t workers) {
    if (ranges.n_gram.empty() || ranges.overlap.empty() || ranges.delta.empty()) {
        throw std::invalid_argument("grid_search: empty parameter range");
    }
    std::vector<AlignParams> grid;
    for (auto n : ranges.n_gram) {
        for (auto k : ranges.overlap) {
            for (auto d : ranges.delta) {
                if (n == 0 || k >= n) continue;
                grid.push_back({n, k, d, min_seeds});
            }
        }
    }
    if (grid.empty()) throw std::invalid_argument("grid_search: no valid (n_gram, overlap) combination");

    std::unordered_map<std::string_view, const Document*> by_doi;
    for (const auto& d : docs) by_doi.emplace(d.doi, &d);
    auto find = [&](const std::string& doi) {
        auto it = by_doi.find(doi);
        if (it == by_doi.end()) throw EvaluationError("grid_search: gold pair references unknown document " + doi);
        return it->second;
    };
    std::vector<std::pair<const Document*, const Document*>> pairs;
    for (const auto& g : gold) pairs.emplace_back(find(g.doi_a), find(g.doi_b));

    std::vector<GridRow> rows(grid.size());
    parallel_for(grid.size(), workers, [&](std::size_t, std::size_t i) {
        std::vector<Detection> detected;
        for (const auto& [a, b] : pairs) {
            for (const auto& s : align_spans(*a, *b, grid[i])) detected.push_back({a->doi, b->doi, s.a, s.b});
        }
        const auto pr = char_precision_recall(gold, detected, options);
        rows[i] = {grid[i], pr.precision, pr.recall, f_beta(pr.precision, pr.recall, options.beta),
                   detected.size()};
    });
    std::stable_sort(rows.begin(), rows.end(),
                     [](const GridRow& x, const GridRow& y) { return x.f_beta > y.f_beta; });
    return rows;
}

std::string to_table(std::span<const GridRow> rows) {
    std::ostringstream out;
    out << "rank  n_gram  overlap  delta  min_seeds  precision  recall  f_beta  detections\n";
    char buf[160];
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& r = rows[i];
        std::snprintf(buf, sizeof buf, "%4zu  %6zu  %7zu  %5zu  %9zu  %9.4f  %6.4f  %6.4f  %10zu\n", i + 1,
                      r.params.n_gram, r.params.overlap, r.params.delta, r.params.min_seeds, r.precision,
                      r.recall, r.f_beta, r.detections);
        out << buf;
    }
    return out.str();
}

} // namespace textreuse
