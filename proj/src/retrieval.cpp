#include "textreuse/retrieval.hpp"

#include <algorithm>
#include <istream>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <string_view>

#include "textreuse/hashing.hpp"
#include "textreuse/parallel.hpp"

namespace textreuse {

namespace {

std::uint64_t pair_key(std::uint32_t a, std::uint32_t b) noexcept {
    if (a > b) std::swap(a, b);
    return (std::uint64_t(a) << 32) | b;
}

std::vector<std::uint64_t> hash_salts(std::size_t m, std::uint64_t seed) {
    std::vector<std::uint64_t> salts(m);
    std::uint64_t state = seed;
    for (auto& s : salts) s = splitmix64(state);
    return salts;
}

using PairCounts = std::unordered_map<std::uint64_t, std::size_t>;

std::vector<CandidatePair> to_candidates(const PairCounts& counts, const std::vector<std::string>& dois) {
    std::vector<std::pair<std::uint64_t, std::size_t>> sorted(counts.begin(), counts.end());
    std::sort(sorted.begin(), sorted.end());
    std::vector<CandidatePair> out;
    out.reserve(sorted.size());
    for (const auto& [key, evidence] : sorted) {
        out.push_back({dois[key >> 32], dois[key & 0xffffffffu], evidence});
    }
    return out;
}

PairCounts merge_counts(std::vector<PairCounts>& partial) {
    PairCounts total;
    for (auto& part : partial) {
        if (total.empty()) {
            total = std::move(part);
            continue;
        }
        for (const auto& [key, n] : part) total[key] += n;
    }
    return total;
}

} // namespace

std::vector<Passage> chunk_passages(const Document& doc, std::size_t n_passage) {
    if (n_passage == 0) {
        throw std::invalid_argument("chunk_passages: n_passage must be at least 1");
    }
    std::vector<Passage> passages;
    const std::size_t count = doc.token_count();
    passages.reserve((count + n_passage - 1) / n_passage);
    for (std::size_t begin = 0, index = 0; begin < count; begin += n_passage, ++index) {
        const std::size_t end = std::min(count, begin + n_passage);
        Passage p;
        p.doi = doc.doi;
        p.index = index;
        p.token_range = {begin, end};
        p.term_set.assign(doc.tokens.begin() + static_cast<std::ptrdiff_t>(begin),
                          doc.tokens.begin() + static_cast<std::ptrdiff_t>(end));
        std::sort(p.term_set.begin(), p.term_set.end());
        p.term_set.erase(std::unique(p.term_set.begin(), p.term_set.end()), p.term_set.end());
        passages.push_back(std::move(p));
    }
    return passages;
}

std::vector<std::uint64_t> minhash_signature(std::span<const std::string> term_set, std::size_t m,
                                             std::uint64_t seed) {
    if (term_set.empty()) {
        throw std::invalid_argument("minhash_signature: empty term set");
    }
    if (m == 0) {
        throw std::invalid_argument("minhash_signature: m must be at least 1");
    }
    const auto salts = hash_salts(m, seed);
    std::vector<std::uint64_t> minima(m, std::numeric_limits<std::uint64_t>::max());
    for (const auto& term : term_set) {
        const std::uint64_t base = hash_bytes(term);
        for (std::size_t j = 0; j < m; ++j) {
            minima[j] = std::min(minima[j], mix64(base ^ salts[j]));
        }
    }
    return minima;
}

PassageSketch minhash_sketch(const Passage& passage, std::size_t m, std::uint64_t seed) {
    PassageSketch sketch;
    sketch.doi = passage.doi;
    sketch.passage_index = passage.index;
    sketch.hashes = minhash_signature(passage.term_set, m, seed);
    std::sort(sketch.hashes.begin(), sketch.hashes.end());
    sketch.hashes.erase(std::unique(sketch.hashes.begin(), sketch.hashes.end()), sketch.hashes.end());
    return sketch;
}

std::vector<PassageSketch> sketch_document(const Document& doc, const SketchParams& params) {
    std::vector<PassageSketch> sketches;
    for (const auto& passage : chunk_passages(doc, params.n_passage)) {
        if (passage.term_set.size() < 2) continue;
        sketches.push_back(minhash_sketch(passage, params.m, params.seed));
    }
    return sketches;
}

std::span<const Posting> InvertedIndex::postings(std::uint64_t hash) const {
    auto it = lists_.find(hash);
    if (it == lists_.end()) return {};
    return it->second;
}

std::size_t InvertedIndex::entry_count() const noexcept {
    std::size_t n = 0;
    for (const auto& [hash, list] : lists_) n += list.size();
    return n;
}

std::size_t InvertedIndex::multi_document_lists() const noexcept {
    std::size_t n = 0;
    for (const auto& [hash, list] : lists_) {
        if (!list.empty() && list.front().doc != list.back().doc) ++n;
    }
    return n;
}

InvertedIndex build_index(std::span<const PassageSketch> sketches, const IndexOptions& options) {
    InvertedIndex index;
    for (const auto& s : sketches) index.dois_.push_back(s.doi);
    std::sort(index.dois_.begin(), index.dois_.end());
    index.dois_.erase(std::unique(index.dois_.begin(), index.dois_.end()), index.dois_.end());
    if (index.dois_.size() > std::numeric_limits<std::uint32_t>::max()) {
        throw std::length_error("build_index: too many documents");
    }

    std::vector<std::uint32_t> doc_of(sketches.size());
    for (std::size_t i = 0; i < sketches.size(); ++i) {
        auto it = std::lower_bound(index.dois_.begin(), index.dois_.end(), sketches[i].doi);
        doc_of[i] = static_cast<std::uint32_t>(it - index.dois_.begin());
    }

    // Each shard owns the hashes with mix64(hash) % shards == shard, so the
    // partial indexes have disjoint keys and merge by concatenation.
    const std::size_t shards = resolve_workers(options.workers);
    std::vector<std::unordered_map<std::uint64_t, std::vector<Posting>>> partial(shards);
    std::vector<std::vector<DroppedPosting>> dropped(shards);
    parallel_for(shards, shards, [&](std::size_t, std::size_t shard) {
        auto& lists = partial[shard];
        for (std::size_t i = 0; i < sketches.size(); ++i) {
            for (std::uint64_t h : sketches[i].hashes) {
                if (mix64(h) % shards != shard) continue;
                lists[h].push_back({doc_of[i], static_cast<std::uint32_t>(sketches[i].passage_index)});
            }
        }
        for (auto it = lists.begin(); it != lists.end();) {
            auto& list = it->second;
            std::sort(list.begin(), list.end());
            list.erase(std::unique(list.begin(), list.end()), list.end());
            std::size_t df = 0;
            for (std::size_t k = 0; k < list.size(); ++k) {
                if (k == 0 || list[k].doc != list[k - 1].doc) ++df;
            }
            if (df > options.df_cap) {
                dropped[shard].push_back({it->first, df});
                it = lists.erase(it);
            } else {
                ++it;
            }
        }
    });

    for (std::size_t shard = 0; shard < shards; ++shard) {
        if (index.lists_.empty()) {
            index.lists_ = std::move(partial[shard]);
        } else {
            index.lists_.merge(partial[shard]);
        }
        index.dropped_.insert(index.dropped_.end(), dropped[shard].begin(), dropped[shard].end());
    }
    std::sort(index.dropped_.begin(), index.dropped_.end(),
              [](const DroppedPosting& x, const DroppedPosting& y) { return x.hash < y.hash; });
    return index;
}

std::vector<CandidatePair> retrieve_candidates(const InvertedIndex& index, std::size_t workers) {
    std::vector<std::span<const Posting>> lists;
    index.for_each_list([&](std::uint64_t, std::span<const Posting> list) {
        if (list.size() >= 2 && list.front().doc != list.back().doc) lists.push_back(list);
    });

    workers = resolve_workers(workers);
    std::vector<PairCounts> partial(workers);
    parallel_for(lists.size(), workers, [&](std::size_t w, std::size_t i) {
        const auto list = lists[i];
        auto& counts = partial[w];
        for (std::size_t x = 0; x < list.size(); ++x) {
            for (std::size_t y = x + 1; y < list.size(); ++y) {
                if (list[x].doc == list[y].doc) continue;
                ++counts[pair_key(list[x].doc, list[y].doc)];
            }
        }
    });
    return to_candidates(merge_counts(partial), index.dois());
}

std::vector<CandidatePair> retrieve_candidates_exact(std::span<const Document> docs, std::size_t n_passage,
                                                     std::size_t j_min, std::size_t workers) {
    if (j_min == 0) {
        throw std::invalid_argument("retrieve_candidates_exact: j_min must be at least 1");
    }
    std::vector<std::string> dois;
    dois.reserve(docs.size());
    for (const auto& d : docs) dois.push_back(d.doi);
    std::sort(dois.begin(), dois.end());
    dois.erase(std::unique(dois.begin(), dois.end()), dois.end());

    // Global passage table: owning document rank and distinct term ids.
    std::unordered_map<std::string_view, std::uint32_t> term_ids;
    std::vector<std::uint32_t> passage_doc;
    std::vector<std::vector<std::uint32_t>> passage_terms;
    for (const auto& doc : docs) {
        const auto rank = static_cast<std::uint32_t>(
            std::lower_bound(dois.begin(), dois.end(), doc.doi) - dois.begin());
        const std::size_t count = doc.token_count();
        for (std::size_t begin = 0; begin < count; begin += n_passage) {
            const std::size_t end = std::min(count, begin + n_passage);
            std::vector<std::uint32_t> terms;
            terms.reserve(end - begin);
            for (std::size_t t = begin; t < end; ++t) {
                auto [it, inserted] =
                    term_ids.try_emplace(doc.tokens[t], static_cast<std::uint32_t>(term_ids.size()));
                terms.push_back(it->second);
            }
            std::sort(terms.begin(), terms.end());
            terms.erase(std::unique(terms.begin(), terms.end()), terms.end());
            passage_doc.push_back(rank);
            passage_terms.push_back(std::move(terms));
        }
    }

    std::vector<std::vector<std::uint32_t>> term_postings(term_ids.size());
    for (std::uint32_t p = 0; p < passage_terms.size(); ++p) {
        for (auto t : passage_terms[p]) term_postings[t].push_back(p);
    }

    workers = resolve_workers(workers);
    std::vector<PairCounts> partial(workers);
    std::vector<std::vector<std::uint32_t>> overlap(workers);
    std::vector<std::vector<std::uint32_t>> touched(workers);
    parallel_for(passage_terms.size(), workers, [&](std::size_t w, std::size_t p) {
        auto& shared = overlap[w];
        auto& seen = touched[w];
        if (shared.empty()) shared.assign(passage_terms.size(), 0);
        for (auto t : passage_terms[p]) {
            const auto& list = term_postings[t];
            for (auto it = std::upper_bound(list.begin(), list.end(), static_cast<std::uint32_t>(p));
                 it != list.end(); ++it) {
                const std::uint32_t q = *it;
                if (passage_doc[q] == passage_doc[p]) continue;
                if (shared[q]++ == 0) seen.push_back(q);
                if (shared[q] == j_min) ++partial[w][pair_key(passage_doc[p], passage_doc[q])];
            }
        }
        for (auto q : seen) shared[q] = 0;
        seen.clear();
    });
    return to_candidates(merge_counts(partial), dois);
}

void write_candidates(std::ostream& out, std::span<const CandidatePair> pairs) {
    for (const auto& p : pairs) {
        out << p.doi_a << '\t' << p.doi_b << '\t' << p.evidence << '\n';
    }
}

std::vector<CandidatePair> read_candidates(std::istream& in) {
    std::vector<CandidatePair> pairs;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto t1 = line.find('\t');
        const auto t2 = t1 == std::string::npos ? t1 : line.find('\t', t1 + 1);
        if (t2 == std::string::npos) {
            throw std::runtime_error("candidate file line " + std::to_string(line_no) + ": expected 3 fields");
        }
        CandidatePair p{line.substr(0, t1), line.substr(t1 + 1, t2 - t1 - 1), 0};
        try {
            std::size_t used = 0;
            p.evidence = std::stoull(line.substr(t2 + 1), &used);
            if (used != line.size() - t2 - 1) throw std::invalid_argument("trailing characters");
        } catch (const std::exception&) {
            throw std::runtime_error("candidate file line " + std::to_string(line_no) + ": bad evidence count");
        }
        if (!(p.doi_a < p.doi_b) || p.evidence == 0) {
            throw std::runtime_error("candidate file line " + std::to_string(line_no) +
                                     ": pair is not canonical or has no evidence");
        }
        pairs.push_back(std::move(p));
    }
    return pairs;
}

} // namespace textreuse
