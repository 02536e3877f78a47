#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "textreuse/ingest.hpp"
#include "textreuse/metrics.hpp"

namespace textreuse {

// Deterministic xoshiro256** generator; identical streams on every platform.
class Rng {
public:
    explicit Rng(std::uint64_t seed);

    std::uint64_t next() noexcept;
    // Uniform in [0, bound); bound must be positive.
    std::uint64_t below(std::uint64_t bound) noexcept;
    // Uniform in [lo, hi].
    std::uint64_t between(std::uint64_t lo, std::uint64_t hi) noexcept { return lo + below(hi - lo + 1); }
    double uniform() noexcept; // [0, 1)

private:
    std::uint64_t s_[4];
};

/// A synthetic vocabulary of `size` distinct lowercase words. Word i is
/// computed on demand; nothing is stored.
class Vocabulary {
public:
    explicit Vocabulary(std::size_t size);

    std::size_t size() const noexcept { return size_; }
    std::string word(std::size_t id) const;
    std::string sample(Rng& rng) const { return word(rng.below(size_)); }

private:
    std::size_t size_;
    std::size_t letters_;
    std::uint64_t modulus_;
};

// Per-token probabilities of each random edit.
struct ObfuscationIntensity {
    double shuffle = 0;
    double add = 0;
    double remove = 0;
    double replace = 0;

    // Total edit rate x split evenly over the four edit kinds.
    static ObfuscationIntensity uniform(double x) noexcept { return {x / 4, x / 4, x / 4, x / 4}; }
    double total() const noexcept { return shuffle + add + remove + replace; }
    void validate() const;
};

struct Obfuscated {
    std::vector<std::string> tokens;
    std::size_t edits = 0; // edit operations applied
};

/// Walks the tokens once. At each position at most one edit fires, chosen
/// with the configured probabilities: delete a 1-3 token phrase, replace it
/// with random words, swap it with the following phrase, or insert 1-3
/// random words before it.
Obfuscated obfuscate_random(std::span<const std::string> tokens, const ObfuscationIntensity& intensity,
                            const Vocabulary& vocabulary, Rng& rng);

enum class ObfuscationKind { none, random };

struct GenSpec {
    std::size_t documents = 200;
    std::size_t min_tokens = 1000;
    std::size_t max_tokens = 2000;
    std::size_t vocabulary = 5'000'000;
    double reuse_rate = 0.0025; // fraction of document pairs with a planted case
    std::optional<std::size_t> case_count; // overrides reuse_rate
    std::size_t min_passage = 32;
    std::size_t max_passage = 64;
    ObfuscationKind obfuscation = ObfuscationKind::none;
    ObfuscationIntensity intensity;
    std::size_t negative_pairs = 0; // no-plagiarism pairs added to the gold set
    std::uint64_t seed = 1;

    // Throws std::invalid_argument for an inconsistent spec.
    void validate() const;
    std::size_t planted_cases() const;
};

struct SynthCorpus {
    std::vector<RawDocument> documents; // sorted by doi
    std::vector<GoldAnnotation> gold;   // planted pairs, then negative pairs
};

/// Documents of i.i.d. background words; each planted case copies a source
/// passage (obfuscated per spec) into a target document between two
/// background words. Gold spans are normalized-text character offsets.
SynthCorpus generate(const GenSpec& spec);

std::string to_json(const GenSpec& spec);

} // namespace textreuse
