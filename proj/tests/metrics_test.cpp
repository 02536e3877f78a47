#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include "test_support.hpp"
#include "textreuse/metrics.hpp"
#include "textreuse/synthgen.hpp"

using namespace textreuse;

namespace {

GoldAnnotation gold_pair(const std::string& id, std::vector<GoldSpan> spans, Strategy s = Strategy::none) {
    return {id, "a-" + id, "b-" + id, std::move(spans), s};
}

Detection detect(const GoldAnnotation& g, CharSpan a, CharSpan b) { return {g.doi_a, g.doi_b, a, b}; }

// Character sets per pair, scored by direct set arithmetic.
PrecisionRecall set_oracle(const std::vector<GoldAnnotation>& gold, const std::vector<Detection>& detected,
                           Averaging averaging) {
    using Chars = std::set<std::pair<int, std::size_t>>;
    std::map<std::string, std::pair<Chars, Chars>> pairs; // gold chars, detected chars
    for (const auto& g : gold) {
        auto& [gc, dc] = pairs[g.doi_a + "|" + g.doi_b];
        for (const auto& s : g.spans) {
            for (auto c = s.a.begin; c < s.a.end; ++c) gc.insert({0, c});
            for (auto c = s.b.begin; c < s.b.end; ++c) gc.insert({1, c});
        }
    }
    for (const auto& d : detected) {
        auto& [gc, dc] = pairs[d.doi_a + "|" + d.doi_b];
        for (auto c = d.a.begin; c < d.a.end; ++c) dc.insert({0, c});
        for (auto c = d.b.begin; c < d.b.end; ++c) dc.insert({1, c});
    }
    double p = 0, r = 0;
    std::size_t both_total = 0, gold_total = 0, det_total = 0;
    for (const auto& [key, sets] : pairs) {
        const auto& [gc, dc] = sets;
        std::size_t both = 0;
        for (const auto& c : dc) both += gc.count(c);
        p += dc.empty() ? 1.0 : double(both) / double(dc.size());
        r += gc.empty() ? 1.0 : double(both) / double(gc.size());
        both_total += both;
        gold_total += gc.size();
        det_total += dc.size();
    }
    if (averaging == Averaging::micro) {
        return {det_total ? double(both_total) / double(det_total) : 1.0,
                gold_total ? double(both_total) / double(gold_total) : 1.0};
    }
    return {p / double(pairs.size()), r / double(pairs.size())};
}

CharSpan random_span(std::mt19937_64& rng) {
    const std::size_t begin = rng() % 300;
    return {begin, begin + 1 + rng() % 80};
}

std::vector<Document> normalize_all(const std::vector<RawDocument>& raw) {
    std::vector<Document> docs;
    for (const auto& r : raw) docs.push_back(normalize(r));
    return docs;
}

} // namespace

TEST_CASE("f_beta reproduces the reference rows") {
    CHECK(std::abs(f_beta(0.93, 0.46) - 0.77) <= 0.005);
    CHECK(std::abs(f_beta(0.93, 0.46) - 0.772) < 0.0005);
    CHECK(std::abs(f_beta(0.90, 0.11) - 0.37) <= 0.005);
    CHECK(std::abs(f_beta(0.99, 0.10) - 0.36) <= 0.005);
    CHECK(std::abs(f_beta(0.88, 0.16) - 0.46) <= 0.005);
    CHECK(std::abs(f_beta(0.88, 0.90) - 0.88) <= 0.005);
    CHECK(f_beta(1, 1) == 1.0);
    CHECK(f_beta(1, 0) == 0.0);
    CHECK(f_beta(0, 0) == 0.0);
    CHECK(f_beta(0.5, 0.5, 1.0) == doctest::Approx(0.5));
}

TEST_CASE("character precision and recall on hand fixtures") {
    const auto g = gold_pair("p1", {{{0, 100}, {0, 100}}});
    const std::vector<GoldAnnotation> gold = {g};

    const std::vector<Detection> exact = {detect(g, {0, 100}, {0, 100})};
    auto pr = char_precision_recall(gold, exact);
    CHECK(pr.precision == 1.0);
    CHECK(pr.recall == 1.0);

    pr = char_precision_recall(gold, {});
    CHECK(pr.precision == 1.0);
    CHECK(pr.recall == 0.0);

    const std::vector<Detection> half = {detect(g, {50, 150}, {50, 150})};
    pr = char_precision_recall(gold, half);
    CHECK(pr.precision == doctest::Approx(0.5));
    CHECK(pr.recall == doctest::Approx(0.5));

    // A no-plagiarism pair with no detections is perfect on both counts.
    const std::vector<GoldAnnotation> negative = {gold_pair("n1", {}, Strategy::no_plagiarism)};
    pr = char_precision_recall(negative, {});
    CHECK(pr.precision == 1.0);
    CHECK(pr.recall == 1.0);
}

TEST_CASE("detections on unknown pairs are rejected unless scoring is requested") {
    const std::vector<GoldAnnotation> gold = {gold_pair("p1", {{{0, 10}, {0, 10}}})};
    const std::vector<Detection> stray = {{"x", "y", {0, 10}, {0, 10}}};
    CHECK_THROWS_AS(char_precision_recall(gold, stray), EvaluationError);
    EvalOptions options;
    options.score_unlisted_pairs = true;
    const auto pr = char_precision_recall(gold, stray, options);
    CHECK(pr.precision == doctest::Approx(0.5)); // gold pair 1.0, stray pair 0.0
    CHECK(pr.recall == doctest::Approx(0.5));
}

TEST_CASE("detections with swapped sides score the same") {
    const auto g = gold_pair("p1", {{{0, 100}, {200, 300}}});
    const std::vector<GoldAnnotation> gold = {g};
    const std::vector<Detection> swapped = {{g.doi_b, g.doi_a, {200, 300}, {0, 100}}};
    const auto pr = char_precision_recall(gold, swapped);
    CHECK(pr.precision == 1.0);
    CHECK(pr.recall == 1.0);
}

TEST_CASE("granularity counts detections per detected gold span") {
    const auto g = gold_pair("p1", {{{0, 100}, {0, 100}}, {{200, 300}, {200, 300}}, {{400, 500}, {400, 500}}});
    const std::vector<GoldAnnotation> gold = {g};
    CHECK(granularity(gold, std::vector<Detection>{detect(g, {0, 100}, {0, 100})}) == 1.0);
    const std::vector<Detection> split = {detect(g, {0, 50}, {0, 50}), detect(g, {50, 100}, {50, 100})};
    CHECK(granularity(gold, split) == 2.0);
    const std::vector<Detection> mixed = {detect(g, {0, 100}, {0, 100}), detect(g, {200, 300}, {200, 300}),
                                          detect(g, {400, 450}, {400, 450}), detect(g, {450, 500}, {450, 500})};
    CHECK(granularity(gold, mixed) == doctest::Approx(4.0 / 3.0));
    // Overlap on one side only does not count.
    CHECK(granularity(gold, std::vector<Detection>{detect(g, {0, 100}, {600, 700})}) == 1.0);
    CHECK(granularity(gold, {}) == 1.0);
}

TEST_CASE("precision and recall match the set oracle on random fixtures") {
    std::mt19937_64 rng(41);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<GoldAnnotation> gold;
        std::vector<Detection> detected;
        const std::size_t pairs = 1 + rng() % 5;
        for (std::size_t p = 0; p < pairs; ++p) {
            auto g = gold_pair("p" + std::to_string(p), {});
            const std::size_t spans = rng() % 3;
            for (std::size_t s = 0; s < spans; ++s) g.spans.push_back({random_span(rng), random_span(rng)});
            const std::size_t dets = rng() % 4;
            for (std::size_t d = 0; d < dets; ++d) detected.push_back(detect(g, random_span(rng), random_span(rng)));
            gold.push_back(std::move(g));
        }
        for (auto averaging : {Averaging::macro, Averaging::micro}) {
            EvalOptions options;
            options.averaging = averaging;
            const auto pr = char_precision_recall(gold, detected, options);
            const auto expected = set_oracle(gold, detected, averaging);
            CHECK(pr.precision == doctest::Approx(expected.precision));
            CHECK(pr.recall == doctest::Approx(expected.recall));

            // Swapping the roles of gold and detections exchanges P and R.
            std::vector<GoldAnnotation> as_gold;
            std::vector<Detection> as_detected;
            for (const auto& g : gold) {
                GoldAnnotation h = g;
                h.spans.clear();
                for (const auto& d : detected) {
                    if (d.doi_a == g.doi_a) h.spans.push_back({d.a, d.b});
                }
                for (const auto& s : g.spans) as_detected.push_back(detect(g, s.a, s.b));
                as_gold.push_back(std::move(h));
            }
            const auto flipped = char_precision_recall(as_gold, as_detected, options);
            CHECK(flipped.precision == doctest::Approx(pr.recall));
            CHECK(flipped.recall == doctest::Approx(pr.precision));

            // Order of detections and of pairs is irrelevant.
            std::shuffle(detected.begin(), detected.end(), rng);
            std::shuffle(gold.begin(), gold.end(), rng);
            const auto shuffled = char_precision_recall(gold, detected, options);
            CHECK(shuffled.precision == doctest::Approx(pr.precision));
            CHECK(shuffled.recall == doctest::Approx(pr.recall));
        }
    }
}

TEST_CASE("evaluate groups pairs by strategy") {
    const auto g1 = gold_pair("p1", {{{0, 100}, {0, 100}}});
    const auto g2 = gold_pair("p2", {{{0, 100}, {0, 100}}}, Strategy::random);
    const auto g3 = gold_pair("p3", {}, Strategy::no_plagiarism);
    const std::vector<GoldAnnotation> gold = {g1, g2, g3};
    const std::vector<Detection> detected = {detect(g1, {0, 100}, {0, 100}), detect(g2, {0, 50}, {0, 50})};
    EvalOptions options;
    options.fold_granularity = true;
    const auto report = evaluate(gold, detected, options);
    REQUIRE(report.strategies.size() == 3);
    CHECK(report.strategies[0].label == "No Obfuscation");
    CHECK(report.strategies[0].recall == 1.0);
    CHECK(report.strategies[1].label == "No Plagiarism");
    CHECK(report.strategies[2].label == "Random Obfuscation");
    CHECK(report.strategies[2].recall == doctest::Approx(0.5));
    CHECK(report.overall.label == "Entire Corpus");
    CHECK(report.overall.pairs == 3);
    CHECK(report.overall.recall == doctest::Approx(2.5 / 3));
    CHECK(report.overall.f_beta == doctest::Approx(f_beta(1.0, 2.5 / 3)));
    REQUIRE(report.overall.plagdet.has_value());
    CHECK(*report.overall.plagdet == doctest::Approx(f_beta(1.0, 2.5 / 3, 1.0)));

    const auto table = to_table(report);
    CHECK(table.find("Precision  Recall  F0.5") != std::string::npos);
    CHECK(table.find("Random Obfuscation") != std::string::npos);
    CHECK(table.find("Entire Corpus") != std::string::npos);
    const auto jsonl = to_jsonl(report);
    CHECK(std::count(jsonl.begin(), jsonl.end(), '\n') == 4);
}

TEST_CASE("gold records round-trip and are validated") {
    const auto g = gold_pair("p1", {{{0, 10}, {5, 15}}}, Strategy::random);
    CHECK(parse_gold_record(to_gold_record(g)) == g);

    // Reversed pair order is canonicalized along with the spans.
    GoldAnnotation reversed{"p2", "z", "a", {{{1, 2}, {3, 4}}}, Strategy::none};
    const auto parsed = parse_gold_record(to_gold_record(reversed));
    CHECK(parsed.doi_a == "a");
    CHECK(parsed.spans[0].a == CharSpan{3, 4});

    CHECK_THROWS_AS(parse_gold_record(to_gold_record(gold_pair("n", {{{0, 1}, {0, 1}}}, Strategy::no_plagiarism))),
                    EvaluationError);
    CHECK_THROWS_AS(parse_gold_record(R"({"pair_id":"x","doi_a":"a","doi_b":"b","spans":[],"strategy":"bogus"})"),
                    EvaluationError);
    CHECK_THROWS_AS(parse_gold_record("{}"), EvaluationError);

    std::istringstream in(to_gold_record(g) + "\n\n" + to_gold_record(gold_pair("p3", {})) + "\n");
    CHECK(read_gold(in).size() == 2);
    std::istringstream bad(to_gold_record(g) + "\nnot json\n");
    CHECK_THROWS_AS(read_gold(bad), EvaluationError);
}

TEST_CASE("grid_search with singleton ranges equals a direct evaluation") {
    GenSpec spec;
    spec.documents = 20;
    spec.min_tokens = 200;
    spec.max_tokens = 300;
    spec.case_count = 6;
    spec.obfuscation = ObfuscationKind::random;
    spec.intensity = ObfuscationIntensity::uniform(0.2);
    spec.seed = 8;
    const auto corpus = generate(spec);
    const auto docs = normalize_all(corpus.documents);

    const auto rows = grid_search(docs, corpus.gold, {{8}, {7}, {250}});
    REQUIRE(rows.size() == 1);

    std::vector<Detection> detected;
    for (const auto& g : corpus.gold) {
        const auto& a = *std::find_if(docs.begin(), docs.end(), [&](const Document& d) { return d.doi == g.doi_a; });
        const auto& b = *std::find_if(docs.begin(), docs.end(), [&](const Document& d) { return d.doi == g.doi_b; });
        for (const auto& s : align_spans(a, b)) detected.push_back({a.doi, b.doi, s.a, s.b});
    }
    const auto pr = char_precision_recall(corpus.gold, detected);
    CHECK(rows[0].precision == pr.precision);
    CHECK(rows[0].recall == pr.recall);
    CHECK(rows[0].f_beta == f_beta(pr.precision, pr.recall));
    CHECK(rows[0].detections == detected.size());

    CHECK_THROWS(grid_search(docs, corpus.gold, {{}, {7}, {250}}));
    CHECK_THROWS(grid_search(docs, corpus.gold, {{4}, {4, 5}, {250}}));
    CHECK(to_table(rows).find("f_beta") != std::string::npos);
}

TEST_CASE("the default parameters rank in the top quartile on a synthetic corpus") {
    GenSpec spec;
    spec.documents = 40;
    spec.min_tokens = 300;
    spec.max_tokens = 600;
    spec.case_count = 20;
    spec.negative_pairs = 10;
    spec.seed = 12;
    const auto corpus = generate(spec);
    const auto docs = normalize_all(corpus.documents);
    const auto rows = grid_search(docs, corpus.gold, {{4, 6, 8, 10, 12}, {0, 3, 5, 7}, {50, 250, 1000}}, kMinSeeds,
                                  {}, 2);
    const auto it = std::find_if(rows.begin(), rows.end(), [](const GridRow& r) {
        return r.params.n_gram == 8 && r.params.overlap == 7 && r.params.delta == 250;
    });
    REQUIRE(it != rows.end());
    // Ties share a rank: count rows strictly better.
    const auto better = std::count_if(rows.begin(), rows.end(), [&](const GridRow& r) { return r.f_beta > it->f_beta; });
    CHECK(static_cast<std::size_t>(better) < (rows.size() + 3) / 4);
    CHECK(std::is_sorted(rows.begin(), rows.end(), [](const GridRow& x, const GridRow& y) { return x.f_beta > y.f_beta; }));
}

TEST_CASE("widening delta past the gap between adjacent cases lowers precision") {
    // Two distinct planted chunks separated by 30 filler words on both sides.
    auto words = [](std::size_t n, const std::string& p) {
        std::vector<std::string> out;
        for (std::size_t i = 0; i < n; ++i) out.push_back(p + std::string(1, char('a' + i % 26)) + std::string(1, char('a' + i / 26)));
        return out;
    };
    auto concat = [](std::initializer_list<std::vector<std::string>> parts) {
        std::vector<std::string> out;
        for (const auto& p : parts) out.insert(out.end(), p.begin(), p.end());
        return out;
    };
    const auto one = words(40, "one"), two = words(40, "two");
    const Document a = test::make_doc("a", concat({words(20, "pa"), one, words(30, "ga"), two, words(20, "sa")}));
    const Document b = test::make_doc("b", concat({words(10, "pb"), one, words(30, "gb"), two, words(10, "sb")}));
    auto span_of = [](const Document& d, std::size_t first, std::size_t count) {
        return CharSpan{d.token_spans[first].begin, d.token_spans[first + count - 1].end};
    };
    const std::vector<GoldAnnotation> gold = {
        {"p", "a", "b", {{span_of(a, 20, 40), span_of(b, 10, 40)}, {span_of(a, 90, 40), span_of(b, 80, 40)}}, Strategy::none}};
    const std::vector<Document> docs = {a, b};
    const auto gap = span_of(a, 90, 40).begin - span_of(a, 20, 40).end;

    double previous = 2.0;
    bool dropped = false;
    for (std::size_t delta : std::vector<std::size_t>{10, 50, 100, gap - 1, gap, gap + 100, 1000}) {
        const auto rows = grid_search(docs, gold, {{8}, {7}, {delta}});
        CHECK(rows[0].precision <= previous);
        if (delta < gap) CHECK(rows[0].precision == 1.0);
        if (delta >= gap) dropped |= rows[0].precision < 1.0;
        previous = rows[0].precision;
    }
    CHECK(dropped);
}
