#include "textreuse/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>
#include <stdexcept>

#include <json.hpp>

#include "textreuse/hashing.hpp"

namespace textreuse {

namespace {

constexpr const char* kFields[] = {"biology", "chemistry", "computer science", "physics", "history", "medicine"};
constexpr const char* kAreas[] = {"life sciences", "natural sciences", "engineering sciences", "natural sciences",
                                  "humanities", "life sciences"};
constexpr const char* kDisciplines[] = {"life sciences", "natural sciences", "engineering sciences",
                                        "natural sciences", "humanities and social sciences", "life sciences"};

std::uint64_t rotl(std::uint64_t x, int k) noexcept { return (x << k) | (x >> (64 - k)); }

struct Range {
    std::size_t begin;
    std::size_t end;
};

struct Planted {
    std::size_t source;
    std::size_t target;
    Range source_range;      // background token indices in the source
    std::size_t insert_at;   // background token index in the target
    std::vector<std::string> tokens;
};

bool strictly_inside(std::size_t point, const Range& r) { return r.begin < point && point < r.end; }

std::string make_doi(std::uint64_t seed, std::size_t i) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "10.5555/synth-%llu.%06zu", static_cast<unsigned long long>(seed), i);
    return buf;
}

} // namespace

Rng::Rng(std::uint64_t seed) {
    for (auto& s : s_) s = splitmix64(seed);
}

std::uint64_t Rng::next() noexcept {
    const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
}

std::uint64_t Rng::below(std::uint64_t bound) noexcept {
    // Lemire's nearly divisionless method.
    unsigned __int128 m = static_cast<unsigned __int128>(next()) * bound;
    auto low = static_cast<std::uint64_t>(m);
    if (low < bound) {
        const std::uint64_t threshold = -bound % bound;
        while (low < threshold) {
            m = static_cast<unsigned __int128>(next()) * bound;
            low = static_cast<std::uint64_t>(m);
        }
    }
    return static_cast<std::uint64_t>(m >> 64);
}

double Rng::uniform() noexcept { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

Vocabulary::Vocabulary(std::size_t size) : size_(size), letters_(3), modulus_(26 * 26 * 26) {
    if (size == 0) throw std::invalid_argument("vocabulary size must be positive");
    while (modulus_ < size) {
        ++letters_;
        modulus_ *= 26;
    }
}

std::string Vocabulary::word(std::size_t id) const {
    // Affine bijection on [0, 26^letters) scatters consecutive ids; the
    // multiplier is coprime to 26.
    constexpr std::uint64_t multiplier = 0x9e3779b97f4a7c15ULL % 1'000'000'007ULL * 2 + 1; // odd
    static_assert(multiplier % 13 != 0);
    auto x = static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(id % size_) * multiplier + 12345) % modulus_);
    std::string w(letters_, 'a');
    for (std::size_t i = 0; i < letters_; ++i) {
        w[letters_ - 1 - i] = static_cast<char>('a' + x % 26);
        x /= 26;
    }
    return w;
}

void ObfuscationIntensity::validate() const {
    for (double p : {shuffle, add, remove, replace}) {
        if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("obfuscation probabilities must lie in [0, 1]");
    }
    if (total() > 1.0 + 1e-12) {
        throw std::invalid_argument("obfuscation probabilities must sum to at most 1");
    }
}

Obfuscated obfuscate_random(std::span<const std::string> tokens, const ObfuscationIntensity& intensity,
                            const Vocabulary& vocabulary, Rng& rng) {
    intensity.validate();
    Obfuscated out;
    out.tokens.reserve(tokens.size() + tokens.size() / 4);
    const std::size_t n = tokens.size();
    auto phrase = [&] { return static_cast<std::size_t>(rng.between(1, 3)); };
    auto append = [&](std::size_t from, std::size_t to) {
        out.tokens.insert(out.tokens.end(), tokens.begin() + static_cast<std::ptrdiff_t>(from),
                          tokens.begin() + static_cast<std::ptrdiff_t>(to));
    };

    std::size_t i = 0;
    while (i < n) {
        double u = rng.uniform();
        if (u < intensity.remove) {
            i = std::min(n, i + phrase());
            ++out.edits;
            continue;
        }
        u -= intensity.remove;
        if (u < intensity.replace) {
            const std::size_t len = phrase();
            for (std::size_t k = 0; k < len; ++k) out.tokens.push_back(vocabulary.sample(rng));
            i = std::min(n, i + len);
            ++out.edits;
            continue;
        }
        u -= intensity.replace;
        if (u < intensity.shuffle) {
            const std::size_t first_end = std::min(n, i + phrase());
            const std::size_t second_end = std::min(n, first_end + phrase());
            if (second_end > first_end) {
                append(first_end, second_end);
                append(i, first_end);
                ++out.edits;
            } else {
                append(i, first_end);
            }
            i = second_end;
            continue;
        }
        u -= intensity.shuffle;
        if (u < intensity.add) {
            const std::size_t len = phrase();
            for (std::size_t k = 0; k < len; ++k) out.tokens.push_back(vocabulary.sample(rng));
            ++out.edits;
        }
        out.tokens.push_back(tokens[i]);
        ++i;
    }
    return out;
}

void GenSpec::validate() const {
    if (documents == 0) throw std::invalid_argument("document count must be positive");
    if (min_tokens == 0 || min_tokens > max_tokens) throw std::invalid_argument("invalid tokens-per-document range");
    if (vocabulary < 2) throw std::invalid_argument("vocabulary needs at least two words");
    if (!(reuse_rate >= 0.0 && reuse_rate <= 1.0)) throw std::invalid_argument("reuse rate must lie in [0, 1]");
    if (min_passage == 0 || min_passage > max_passage) throw std::invalid_argument("invalid planted passage range");
    if (max_passage > min_tokens) {
        throw std::invalid_argument("planted passages may be longer than the shortest document");
    }
    intensity.validate();
    const std::size_t pairs = documents * (documents - 1) / 2;
    if (planted_cases() + negative_pairs > pairs) {
        throw std::invalid_argument("more planted and negative pairs than document pairs");
    }
}

std::size_t GenSpec::planted_cases() const {
    if (case_count) return *case_count;
    const double pairs = double(documents) * double(documents - 1) / 2.0;
    return static_cast<std::size_t>(std::llround(reuse_rate * pairs));
}

SynthCorpus generate(const GenSpec& spec) {
    spec.validate();
    Rng rng(spec.seed);
    const Vocabulary vocabulary(spec.vocabulary);
    const std::size_t n_docs = spec.documents;

    std::vector<std::vector<std::string>> background(n_docs);
    for (auto& doc : background) {
        doc.resize(rng.between(spec.min_tokens, spec.max_tokens));
        for (auto& w : doc) w = vocabulary.sample(rng);
    }

    std::vector<std::vector<Range>> sources(n_docs);
    std::vector<std::vector<std::size_t>> inserts(n_docs);
    std::set<std::pair<std::size_t, std::size_t>> used_pairs;
    std::vector<Planted> planted;
    const std::size_t wanted = spec.planted_cases();
    constexpr std::size_t kAttempts = 1000;

    for (std::size_t c = 0; c < wanted; ++c) {
        bool placed = false;
        for (std::size_t attempt = 0; attempt < kAttempts && !placed; ++attempt) {
            const std::size_t s = rng.below(n_docs);
            std::size_t t = rng.below(n_docs - 1);
            if (t >= s) ++t;
            const auto key = std::minmax(s, t);
            if (used_pairs.count(key)) continue;

            const std::size_t len = rng.between(spec.min_passage, spec.max_passage);
            const std::size_t start = rng.below(background[s].size() - len + 1);
            const Range range{start, start + len};
            const std::size_t at = rng.below(background[t].size() + 1);

            bool ok = true;
            for (const auto& r : sources[s]) ok &= range.end <= r.begin || r.end <= range.begin;
            for (auto p : inserts[s]) ok &= !strictly_inside(p, range);
            for (const auto& r : sources[t]) ok &= !strictly_inside(at, r);
            if (!ok) continue;

            std::vector<std::string> tokens(background[s].begin() + static_cast<std::ptrdiff_t>(range.begin),
                                            background[s].begin() + static_cast<std::ptrdiff_t>(range.end));
            if (spec.obfuscation == ObfuscationKind::random) {
                tokens = obfuscate_random(tokens, spec.intensity, vocabulary, rng).tokens;
                if (tokens.empty()) continue;
            }
            used_pairs.insert(key);
            sources[s].push_back(range);
            inserts[t].push_back(at);
            planted.push_back({s, t, range, at, std::move(tokens)});
            placed = true;
        }
        if (!placed) throw std::runtime_error("generate: cannot place planted case; lower the reuse rate");
    }

    // Assemble final token sequences; record where each background token and
    // each inserted block lands.
    std::vector<std::vector<std::string>> final_tokens(n_docs);
    std::vector<std::vector<std::size_t>> moved(n_docs);
    std::vector<Range> block(planted.size());
    for (std::size_t d = 0; d < n_docs; ++d) {
        std::vector<std::size_t> here;
        for (std::size_t c = 0; c < planted.size(); ++c) {
            if (planted[c].target == d) here.push_back(c);
        }
        std::stable_sort(here.begin(), here.end(),
                         [&](std::size_t x, std::size_t y) { return planted[x].insert_at < planted[y].insert_at; });
        auto& out = final_tokens[d];
        moved[d].resize(background[d].size());
        std::size_t next = 0;
        for (std::size_t i = 0; i <= background[d].size(); ++i) {
            while (next < here.size() && planted[here[next]].insert_at == i) {
                const auto& p = planted[here[next]];
                block[here[next]] = {out.size(), out.size() + p.tokens.size()};
                out.insert(out.end(), p.tokens.begin(), p.tokens.end());
                ++next;
            }
            if (i < background[d].size()) {
                moved[d][i] = out.size();
                out.push_back(background[d][i]);
            }
        }
    }

    SynthCorpus corpus;
    std::vector<std::vector<std::size_t>> offsets(n_docs);
    for (std::size_t d = 0; d < n_docs; ++d) {
        RawDocument doc;
        doc.doi = make_doi(spec.seed, d);
        auto& off = offsets[d];
        off.reserve(final_tokens[d].size());
        for (const auto& w : final_tokens[d]) {
            if (!doc.text.empty()) doc.text.push_back(' ');
            off.push_back(doc.text.size());
            doc.text += w;
        }
        const std::size_t f = rng.below(std::size(kFields));
        doc.metadata.year = static_cast<std::int64_t>(rng.between(1990, 2020));
        doc.metadata.field = std::vector<std::string>{kFields[f]};
        doc.metadata.area = std::vector<std::string>{kAreas[f]};
        doc.metadata.discipline = std::vector<std::string>{kDisciplines[f]};
        corpus.documents.push_back(std::move(doc));
    }

    auto char_span = [&](std::size_t d, std::size_t first, std::size_t last_exclusive) {
        const std::size_t last = last_exclusive - 1;
        return CharSpan{offsets[d][first], offsets[d][last] + final_tokens[d][last].size()};
    };

    std::size_t pair_no = 0;
    auto pair_id = [&] {
        char buf[32];
        std::snprintf(buf, sizeof buf, "pair-%06zu", ++pair_no);
        return std::string(buf);
    };

    const Strategy strategy = spec.obfuscation == ObfuscationKind::random ? Strategy::random : Strategy::none;
    for (std::size_t c = 0; c < planted.size(); ++c) {
        const auto& p = planted[c];
        const CharSpan src = char_span(p.source, moved[p.source][p.source_range.begin],
                                       moved[p.source][p.source_range.end - 1] + 1);
        const CharSpan dst = char_span(p.target, block[c].begin, block[c].end);
        GoldAnnotation g;
        g.pair_id = pair_id();
        g.strategy = strategy;
        if (p.source < p.target) {
            g.doi_a = corpus.documents[p.source].doi;
            g.doi_b = corpus.documents[p.target].doi;
            g.spans.push_back({src, dst});
        } else {
            g.doi_a = corpus.documents[p.target].doi;
            g.doi_b = corpus.documents[p.source].doi;
            g.spans.push_back({dst, src});
        }
        corpus.gold.push_back(std::move(g));
    }

    for (std::size_t added = 0; added < spec.negative_pairs;) {
        const std::size_t x = rng.below(n_docs);
        std::size_t y = rng.below(n_docs - 1);
        if (y >= x) ++y;
        if (!used_pairs.insert(std::minmax(x, y)).second) continue;
        GoldAnnotation g;
        g.pair_id = pair_id();
        g.doi_a = corpus.documents[std::min(x, y)].doi;
        g.doi_b = corpus.documents[std::max(x, y)].doi;
        g.strategy = Strategy::no_plagiarism;
        corpus.gold.push_back(std::move(g));
        ++added;
    }
    return corpus;
}

std::string to_json(const GenSpec& spec) {
    nlohmann::ordered_json j;
    j["documents"] = spec.documents;
    j["min_tokens"] = spec.min_tokens;
    j["max_tokens"] = spec.max_tokens;
    j["vocabulary"] = spec.vocabulary;
    j["reuse_rate"] = spec.reuse_rate;
    j["case_count"] = spec.case_count ? nlohmann::ordered_json(*spec.case_count) : nlohmann::ordered_json(nullptr);
    j["planted_cases"] = spec.planted_cases();
    j["min_passage"] = spec.min_passage;
    j["max_passage"] = spec.max_passage;
    j["obfuscation"] = spec.obfuscation == ObfuscationKind::random ? "random" : "none";
    j["intensity"] = {{"shuffle", spec.intensity.shuffle},
                      {"add", spec.intensity.add},
                      {"remove", spec.intensity.remove},
                      {"replace", spec.intensity.replace}};
    j["negative_pairs"] = spec.negative_pairs;
    j["seed"] = spec.seed;
    return j.dump(2);
}

} // namespace textreuse
