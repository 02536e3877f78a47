#include "textreuse/alignment.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <unordered_map>

#include "textreuse/hashing.hpp"

namespace textreuse {

namespace {

// RFC 4122 DNS namespace; the run namespace is hashed beneath it.
constexpr Uuid kRootNamespace = {0x6b, 0xa7, 0xb8, 0x10, 0x9d, 0xad, 0x11, 0xd1,
                                 0x80, 0xb4, 0x00, 0xc0, 0x4f, 0xd4, 0x30, 0xc8};

std::size_t gap(CharSpan x, CharSpan y) noexcept {
    const std::size_t lo_end = std::min(x.end, y.end);
    const std::size_t hi_begin = std::max(x.begin, y.begin);
    return hi_begin > lo_end ? hi_begin - lo_end : 0;
}

bool overlaps(CharSpan x, CharSpan y) noexcept {
    return x.begin < y.end && y.begin < x.end;
}

CharSpan hull(CharSpan x, CharSpan y) noexcept {
    return {std::min(x.begin, y.begin), std::max(x.end, y.end)};
}

class DisjointSets {
public:
    explicit DisjointSets(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }

    std::size_t find(std::size_t x) {
        while (parent_[x] != x) {
            parent_[x] = parent_[parent_[x]];
            x = parent_[x];
        }
        return x;
    }

    bool unite(std::size_t x, std::size_t y) {
        x = find(x);
        y = find(y);
        if (x == y) return false;
        if (y < x) std::swap(x, y);
        parent_[y] = x;
        return true;
    }

private:
    std::vector<std::size_t> parent_;
};

bool tokens_equal(const Document& a, std::size_t i, const Document& b, std::size_t j, std::size_t n) {
    for (std::size_t t = 0; t < n; ++t) {
        if (a.tokens[i + t] != b.tokens[j + t]) return false;
    }
    return true;
}

std::vector<SpanPair> boxes_of(std::span<const SpanPair> items, DisjointSets& sets) {
    std::unordered_map<std::size_t, std::size_t> slot;
    std::vector<SpanPair> boxes;
    for (std::size_t i = 0; i < items.size(); ++i) {
        auto [it, inserted] = slot.try_emplace(sets.find(i), boxes.size());
        if (inserted) {
            boxes.push_back(items[i]);
        } else {
            auto& box = boxes[it->second];
            box.a = hull(box.a, items[i].a);
            box.b = hull(box.b, items[i].b);
            box.seeds += items[i].seeds;
        }
    }
    return boxes;
}

} // namespace

void AlignParams::validate() const {
    if (n_gram == 0) throw std::invalid_argument("n-gram size must be at least 1");
    if (overlap >= n_gram) throw std::invalid_argument("n-gram overlap must be smaller than the n-gram size");
    if (min_seeds == 0) throw std::invalid_argument("min_seeds must be at least 1");
}

std::uint64_t ngram_hash(std::span<const std::string> tokens) {
    std::string joined;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        if (i) joined.push_back(' ');
        joined += tokens[i];
    }
    return hash_bytes(joined);
}

std::vector<NGram> chunk_ngrams(const Document& doc, std::size_t n_gram, std::size_t overlap) {
    AlignParams{n_gram, overlap, 0, 1}.validate();
    std::vector<NGram> grams;
    const std::size_t count = doc.token_count();
    if (count < n_gram) return grams;
    const std::size_t stride = n_gram - overlap;
    grams.reserve((count - n_gram) / stride + 1);
    const std::span<const std::string> tokens(doc.tokens);
    for (std::size_t start = 0; start + n_gram <= count; start += stride) {
        grams.push_back({start,
                         {doc.token_spans[start].begin, doc.token_spans[start + n_gram - 1].end},
                         ngram_hash(tokens.subspan(start, n_gram))});
    }
    return grams;
}

std::vector<Seed> seed_matches(const Document& a, const Document& b, std::size_t n_gram, std::size_t overlap) {
    const auto grams_a = chunk_ngrams(a, n_gram, overlap);
    const auto grams_b = chunk_ngrams(b, n_gram, overlap);

    std::unordered_map<std::uint64_t, std::vector<std::uint32_t>> lookup;
    lookup.reserve(grams_b.size());
    for (std::size_t j = 0; j < grams_b.size(); ++j) {
        lookup[grams_b[j].hash].push_back(static_cast<std::uint32_t>(j));
    }

    std::vector<Seed> seeds;
    for (const auto& ga : grams_a) {
        auto it = lookup.find(ga.hash);
        if (it == lookup.end()) continue;
        for (auto j : it->second) {
            const auto& gb = grams_b[j];
            if (!tokens_equal(a, ga.start_token, b, gb.start_token, n_gram)) continue;
            seeds.push_back({ga.chars, gb.chars, ga.start_token, gb.start_token});
        }
    }
    std::sort(seeds.begin(), seeds.end());
    return seeds;
}

std::vector<SpanPair> extend(std::span<const Seed> seeds, std::size_t delta, std::size_t min_seeds) {
    if (seeds.empty()) return {};

    std::vector<SpanPair> items;
    items.reserve(seeds.size());
    std::size_t longest_a = 0;
    for (const auto& s : seeds) {
        items.push_back({s.a, s.b, 1});
        longest_a = std::max(longest_a, s.a.size());
    }
    std::sort(items.begin(), items.end());

    // A seed ending more than delta before items[i] begins cannot link, and
    // no seed is longer than longest_a, which bounds the backward scan.
    DisjointSets sets(items.size());
    for (std::size_t i = 1; i < items.size(); ++i) {
        for (std::size_t j = i; j-- > 0;) {
            if (items[i].a.begin - items[j].a.begin > delta + longest_a) break;
            if (gap(items[i].a, items[j].a) <= delta && gap(items[i].b, items[j].b) <= delta) {
                sets.unite(i, j);
            }
        }
    }
    std::vector<SpanPair> boxes = boxes_of(items, sets);

    // Merge clusters whose bounding spans overlap on both sides, to a fixpoint.
    for (;;) {
        std::sort(boxes.begin(), boxes.end());
        DisjointSets merged(boxes.size());
        bool changed = false;
        for (std::size_t i = 0; i < boxes.size(); ++i) {
            for (std::size_t j = i + 1; j < boxes.size() && boxes[j].a.begin < boxes[i].a.end; ++j) {
                if (overlaps(boxes[i].b, boxes[j].b)) changed |= merged.unite(i, j);
            }
        }
        if (!changed) break;
        boxes = boxes_of(boxes, merged);
    }

    std::erase_if(boxes, [&](const SpanPair& p) { return p.seeds < min_seeds; });
    std::sort(boxes.begin(), boxes.end());
    return boxes;
}

std::vector<SpanPair> align_spans(const Document& a, const Document& b, const AlignParams& params) {
    params.validate();
    const auto seeds = seed_matches(a, b, params.n_gram, params.overlap);
    return extend(seeds, params.delta, params.min_seeds);
}

std::string case_id(std::string_view run_namespace, std::string_view doi_a, std::string_view doi_b, CharSpan a,
                    CharSpan b) {
    const Uuid ns = uuid_v5(kRootNamespace, run_namespace);
    std::string name;
    name.reserve(doi_a.size() + doi_b.size() + 64);
    name.append(doi_a).push_back('\t');
    name.append(doi_b).push_back('\t');
    name += std::to_string(a.begin) + '\t' + std::to_string(a.end) + '\t' + std::to_string(b.begin) + '\t' +
            std::to_string(b.end);
    return to_string(uuid_v5(ns, name));
}

namespace {

CaseSide make_side(const Document& doc, CharSpan span) {
    CaseSide side;
    side.begin = span.begin;
    side.end = span.end;
    side.doc_length = doc.doc_length();
    side.text = doc.text(span);
    const std::size_t before = span.begin >= kContextLength ? span.begin - kContextLength : 0;
    side.before = doc.text({before, span.begin});
    side.after = doc.text({span.end, std::min(doc.doc_length(), span.end + kContextLength)});
    side.doi = doc.doi;
    side.metadata = doc.metadata;
    return side;
}

} // namespace

ReuseCase make_case(const Document& a, const Document& b, const SpanPair& spans, std::string_view run_namespace) {
    ReuseCase c;
    c.id = case_id(run_namespace, a.doi, b.doi, spans.a, spans.b);
    c.a = make_side(a, spans.a);
    c.b = make_side(b, spans.b);
    return c;
}

std::vector<ReuseCase> align_pair(const Document& a, const Document& b, const AlignParams& params,
                                  std::string_view run_namespace) {
    std::vector<ReuseCase> cases;
    for (const auto& spans : align_spans(a, b, params)) {
        cases.push_back(make_case(a, b, spans, run_namespace));
    }
    return cases;
}

} // namespace textreuse
