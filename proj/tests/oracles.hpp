#pragma once

// Exhaustive reference implementations shared by the unit and acceptance
// tests.

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <vector>

#include "textreuse/alignment.hpp"

namespace textreuse::test {

// Every (window in a, window in b) pair compared token by token.
inline std::vector<Seed> brute_force_seeds(const Document& a, const Document& b, std::size_t n, std::size_t k) {
    std::vector<Seed> out;
    if (a.token_count() < n || b.token_count() < n) return out;
    const std::size_t stride = n - k;
    for (std::size_t i = 0; i + n <= a.token_count(); i += stride) {
        for (std::size_t j = 0; j + n <= b.token_count(); j += stride) {
            if (std::equal(a.tokens.begin() + i, a.tokens.begin() + i + n, b.tokens.begin() + j)) {
                out.push_back({{a.token_spans[i].begin, a.token_spans[i + n - 1].end},
                               {b.token_spans[j].begin, b.token_spans[j + n - 1].end},
                               i,
                               j});
            }
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

inline std::size_t span_gap(CharSpan x, CharSpan y) {
    if (x.end <= y.begin) return y.begin - x.end;
    if (y.end <= x.begin) return x.begin - y.end;
    return 0;
}

// Connected components over the full link relation, then repeated merging of
// components whose boxes intersect on both sides, all by exhaustive pairing.
inline std::vector<SpanPair> brute_force_extend(const std::vector<Seed>& seeds, std::size_t delta, std::size_t min_seeds) {
    const std::size_t n = seeds.size();
    std::vector<std::size_t> label(n);
    std::iota(label.begin(), label.end(), 0);
    bool changed = true;
    while (changed) {
        changed = false;
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                if (span_gap(seeds[i].a, seeds[j].a) <= delta && span_gap(seeds[i].b, seeds[j].b) <= delta &&
                    label[j] < label[i]) {
                    label[i] = label[j];
                    changed = true;
                }
            }
        }
    }
    std::vector<SpanPair> boxes;
    for (std::size_t l = 0; l < n; ++l) {
        SpanPair box{{SIZE_MAX, 0}, {SIZE_MAX, 0}, 0};
        for (std::size_t i = 0; i < n; ++i) {
            if (label[i] != l) continue;
            box.a = {std::min(box.a.begin, seeds[i].a.begin), std::max(box.a.end, seeds[i].a.end)};
            box.b = {std::min(box.b.begin, seeds[i].b.begin), std::max(box.b.end, seeds[i].b.end)};
            ++box.seeds;
        }
        if (box.seeds) boxes.push_back(box);
    }
    auto intersect = [](CharSpan x, CharSpan y) { return x.begin < y.end && y.begin < x.end; };
    for (bool merged = true; merged;) {
        merged = false;
        for (std::size_t i = 0; i < boxes.size() && !merged; ++i) {
            for (std::size_t j = i + 1; j < boxes.size() && !merged; ++j) {
                if (intersect(boxes[i].a, boxes[j].a) && intersect(boxes[i].b, boxes[j].b)) {
                    boxes[i].a = {std::min(boxes[i].a.begin, boxes[j].a.begin), std::max(boxes[i].a.end, boxes[j].a.end)};
                    boxes[i].b = {std::min(boxes[i].b.begin, boxes[j].b.begin), std::max(boxes[i].b.end, boxes[j].b.end)};
                    boxes[i].seeds += boxes[j].seeds;
                    boxes.erase(boxes.begin() + static_cast<std::ptrdiff_t>(j));
                    merged = true;
                }
            }
        }
    }
    std::erase_if(boxes, [&](const SpanPair& p) { return p.seeds < min_seeds; });
    std::sort(boxes.begin(), boxes.end());
    return boxes;
}

} // namespace textreuse::test
