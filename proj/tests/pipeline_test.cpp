#include <doctest.h>

#include <atomic>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>

#include <json.hpp>

#include "test_support.hpp"
#include "textreuse/pipeline.hpp"
#include "textreuse/synthgen.hpp"

using namespace textreuse;

namespace {

std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

void write_corpus(const std::filesystem::path& p, const std::vector<RawDocument>& docs) {
    std::ofstream out(p);
    for (const auto& d : docs) out << to_document_record(d) << '\n';
}

std::string join(const std::vector<std::string>& words) {
    std::string s;
    for (const auto& w : words) s += (s.empty() ? "" : " ") + w;
    return s;
}

std::vector<std::string> words(std::size_t n, const std::string& prefix) {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < n; ++i) {
        std::string w = prefix + "q";
        for (std::size_t v = i;; v /= 26) {
            w.push_back(static_cast<char>('a' + v % 26));
            if (v < 26) break;
        }
        out.push_back(w);
    }
    return out;
}

RunConfig small_config(const std::filesystem::path& input, const std::filesystem::path& output) {
    RunConfig c;
    c.input = input;
    c.output = output;
    c.min_words = 1;
    c.workers = 1;
    return c;
}

SynthCorpus synth(std::uint64_t seed, std::size_t documents = 60) {
    GenSpec spec;
    spec.documents = documents;
    spec.min_tokens = 200;
    spec.max_tokens = 400;
    spec.case_count = 12;
    spec.seed = seed;
    return generate(spec);
}

} // namespace

TEST_CASE("pipeline finds a shared paragraph with exact offsets and contexts") {
    test::TempDir dir("pipeline");
    const auto shared = words(80, "shared");
    const auto pre_a = words(300, "pa"), post_a = words(200, "sa");
    const auto pre_b = words(150, "pb"), post_b = words(300, "sb");
    auto cat = [](std::vector<std::string> x, const std::vector<std::string>& y) {
        x.insert(x.end(), y.begin(), y.end());
        return x;
    };
    RawDocument a{"10.1/a", "Intro, 1. " + join(cat(cat(pre_a, shared), post_a)), {}};
    a.metadata.year = 2010;
    a.metadata.field = std::vector<std::string>{"biology"};
    RawDocument b{"10.1/b", join(cat(cat(pre_b, shared), post_b)), {}};
    write_corpus(dir / "corpus.jsonl", {b, a});

    const auto summary = run_pipeline(small_config(dir / "corpus.jsonl", dir / "out"));
    CHECK(summary.documents_kept == 2);
    CHECK(summary.candidate_pairs == 1);
    REQUIRE(summary.cases == 1);

    std::ifstream in(dir / "out" / "cases.jsonl");
    std::string line;
    REQUIRE(std::getline(in, line));
    const auto c = parse_case_record(line);
    const Document da = normalize(a), db = normalize(b);
    const auto shared_text = normalize("s", join(shared)).text();
    // "intro " precedes the prefix words in a.
    const std::size_t begin_a = join(pre_a).size() + 1 + 6;
    CHECK(c.a.doi == "10.1/a");
    CHECK(c.a.begin == begin_a);
    CHECK(c.a.end == begin_a + shared_text.size());
    CHECK(c.b.begin == join(pre_b).size() + 1);
    CHECK(c.a.text == shared_text);
    CHECK(c.b.text == shared_text);
    CHECK(c.a.before == da.text({begin_a - 100, begin_a}));
    CHECK(c.a.after == da.text({c.a.end, c.a.end + 100}));
    CHECK(c.b.before.size() == 100);
    CHECK(c.a.metadata.year == 2010);
    CHECK(c.a.doc_length == da.doc_length());
    CHECK(c.b.doc_length == db.doc_length());

    const auto manifest = nlohmann::json::parse(read_file(dir / "out" / "manifest.json"));
    CHECK(manifest["counts"]["cases"] == 1);
    CHECK(manifest["config"]["n_gram"] == 8);
    CHECK(manifest["config"]["seed"] == 42);
    CHECK(read_file(dir / "out" / "publications.jsonl").find("\"doi\":\"10.1/b\"") != std::string::npos);
}

TEST_CASE("pipeline on disjoint documents yields nothing") {
    test::TempDir dir("pipeline");
    std::vector<RawDocument> docs;
    for (int i = 0; i < 5; ++i) docs.push_back({"d" + std::to_string(i), join(words(300, "x" + std::string(1, char('a' + i)))), {}});
    write_corpus(dir / "corpus.jsonl", docs);
    for (auto mode : {RetrievalMode::minhash, RetrievalMode::exact}) {
        auto config = small_config(dir / "corpus.jsonl", dir / "out");
        config.retrieval = mode;
        config.j_min = 1;
        const auto summary = run_pipeline(config);
        CHECK(summary.candidate_pairs == 0);
        CHECK(summary.cases == 0);
        CHECK(summary.pruning_ratio == 1.0);
        CHECK(read_file(dir / "out" / "cases.jsonl").empty());
    }
}

TEST_CASE("length filter and load diagnostics are reported") {
    test::TempDir dir("pipeline");
    {
        std::ofstream out(dir / "corpus.jsonl");
        out << to_document_record({"short", "too short", {}}) << '\n'
            << "{broken\n"
            << to_document_record({"long", join(words(1200, "w")), {}}) << '\n';
    }
    RunConfig config = small_config(dir / "corpus.jsonl", dir / "out");
    config.min_words = kMinWords;
    const auto summary = run_pipeline(config);
    CHECK(summary.documents_in == 2);
    CHECK(summary.documents_filtered == 1);
    CHECK(summary.documents_kept == 1);
    CHECK(summary.load_diagnostics == 1);
}

TEST_CASE("output is byte-identical across worker counts") {
    test::TempDir dir("pipeline");
    write_corpus(dir / "corpus.jsonl", synth(3).documents);
    std::string cases, publications;
    for (std::size_t workers : {1, 2, 3, 8}) {
        auto config = small_config(dir / "corpus.jsonl", dir / "out");
        config.workers = workers;
        const auto summary = run_pipeline(config);
        CHECK(summary.cases >= 12);
        const auto c = read_file(dir / "out" / "cases.jsonl");
        const auto p = read_file(dir / "out" / "publications.jsonl");
        if (workers == 1) {
            cases = c;
            publications = p;
        }
        CHECK(c == cases);
        CHECK(p == publications);
    }
}

TEST_CASE("metadata-only output is the full output without text fields") {
    test::TempDir dir("pipeline");
    write_corpus(dir / "corpus.jsonl", synth(4).documents);
    auto config = small_config(dir / "corpus.jsonl", dir / "full");
    run_pipeline(config);
    config.output = dir / "meta";
    config.mode = OutputMode::metadata_only;
    run_pipeline(config);

    std::ifstream full(dir / "full" / "cases.jsonl"), meta(dir / "meta" / "cases.jsonl");
    std::string f, m;
    std::size_t lines = 0;
    while (std::getline(full, f)) {
        REQUIRE(std::getline(meta, m));
        auto stripped = nlohmann::ordered_json::parse(f);
        for (const char* k : {"text_a", "before_a", "after_a", "text_b", "before_b", "after_b"}) stripped.erase(k);
        CHECK(stripped.dump() == m);
        ++lines;
    }
    CHECK_FALSE(std::getline(meta, m));
    CHECK(lines > 0);
}

TEST_CASE("a run resumed from its retrieval checkpoint matches an uninterrupted run") {
    test::TempDir dir("pipeline");
    write_corpus(dir / "corpus.jsonl", synth(5).documents);

    auto direct = small_config(dir / "corpus.jsonl", dir / "direct");
    run_pipeline(direct);

    auto first = small_config(dir / "corpus.jsonl", dir / "resumed");
    first.checkpoint_dir = dir / "ckpt";
    first.stop_after_retrieval = true;
    const auto stopped = run_pipeline(first);
    CHECK_FALSE(stopped.completed);
    CHECK(std::filesystem::exists(dir / "ckpt" / "candidates.tsv"));
    CHECK_FALSE(std::filesystem::exists(dir / "resumed" / "cases.jsonl"));

    auto second = first;
    second.stop_after_retrieval = false;
    const auto resumed = run_pipeline(second);
    CHECK(resumed.resumed);
    CHECK(resumed.completed);
    CHECK(read_file(dir / "resumed" / "cases.jsonl") == read_file(dir / "direct" / "cases.jsonl"));
    CHECK(read_file(dir / "resumed" / "publications.jsonl") == read_file(dir / "direct" / "publications.jsonl"));

    // Changing retrieval settings or the corpus invalidates the checkpoint.
    auto changed = second;
    changed.m = 12;
    CHECK_THROWS_AS(run_pipeline(changed), PipelineError);
    write_corpus(dir / "corpus.jsonl", synth(6).documents);
    CHECK_THROWS_AS(run_pipeline(second), PipelineError);
    // Alignment settings are not part of the checkpoint key.
    write_corpus(dir / "corpus.jsonl", synth(5).documents);
    auto realign = second;
    realign.align.delta = 100;
    CHECK_NOTHROW(run_pipeline(realign));
}

TEST_CASE("failing alignment batches are retried, then reported with their pair range") {
    const auto corpus = synth(7);
    RunConfig config;
    config.min_words = 1;
    config.workers = 2;
    const auto docs = prepare_documents(corpus.documents, config);
    // Every pair among the first twelve documents, planted or not.
    std::vector<CandidatePair> candidates;
    for (std::size_t i = 0; i < 12; ++i) {
        for (std::size_t j = i + 1; j < 12; ++j) candidates.push_back({docs[i].doi, docs[j].doi, 1});
    }
    const auto expected = align_candidates(docs, candidates, config);

    // The first pair of each 16-pair batch fails once: one retry recovers.
    std::set<std::string> leaders;
    for (std::size_t i = 0; i < candidates.size(); i += 16) leaders.insert(candidates[i].doi_a + candidates[i].doi_b);
    std::mutex mutex;
    std::set<std::string> failed_once;
    auto flaky = [&](const Document& a, const Document& b) {
        {
            std::lock_guard lock(mutex);
            const auto key = a.doi + b.doi;
            if (leaders.count(key) && failed_once.insert(key).second) throw std::runtime_error("transient");
        }
        return align_pair(a, b, config.align, config.run_namespace);
    };
    CHECK(align_candidates(docs, candidates, config, flaky) == expected);
    CHECK(failed_once.size() == leaders.size());

    // Fails on one pair every time: fatal, naming the range.
    const auto& bad = candidates[17];
    std::atomic<int> attempts{0};
    auto broken = [&](const Document& a, const Document& b) {
        if (a.doi == bad.doi_a && b.doi == bad.doi_b) {
            ++attempts;
            throw std::runtime_error("disk on fire");
        }
        return align_pair(a, b, config.align, config.run_namespace);
    };
    config.retries = 2;
    try {
        align_candidates(docs, candidates, config, broken);
        FAIL("expected a pipeline error");
    } catch (const PipelineError& e) {
        const std::string what = e.what();
        CHECK(what.find("[16, 32)") != std::string::npos);
        CHECK(what.find("disk on fire") != std::string::npos);
        CHECK(what.find(candidates[16].doi_a) != std::string::npos);
    }
    CHECK(attempts == 3);
}

TEST_CASE("run configuration validation") {
    RunConfig c;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c.input = "in";
    c.output = "out";
    CHECK_NOTHROW(c.validate());
    auto bad = c;
    bad.align.overlap = 8;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = c;
    bad.m = 0;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = c;
    bad.min_words = 10;
    bad.max_words = 5;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = c;
    bad.stop_after_retrieval = true;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    CHECK(parse_retrieval_mode("exact") == RetrievalMode::exact);
    CHECK_THROWS(parse_retrieval_mode("fuzzy"));
    const auto j = nlohmann::json::parse(c.to_json());
    CHECK(j["delta"] == 250);
    CHECK(j["mode"] == "full");
}

TEST_CASE("stats on an empty file are zero") {
    std::istringstream in("");
    const auto s = compute_stats(in);
    CHECK(s.records == 0);
    CHECK(s.cases == 0);
    CHECK(s.by_field.empty());
    CHECK(s.partners_per_document.empty());
}

TEST_CASE("stats count cases per field and skip malformed records") {
    auto make = [](const std::string& da, const std::string& fa, const std::string& db, const std::string& fb,
                   std::size_t len) {
        ReuseCase c;
        c.id = "id";
        c.a = {"", "", "", 0, len, 1000, da, {2001, std::vector<std::string>{fa}, std::nullopt, std::nullopt}};
        c.b = {"", "", "", 10, 10 + len, 1000, db, {2002, std::vector<std::string>{fb}, std::nullopt, std::nullopt}};
        return to_case_record(c, OutputMode::metadata_only);
    };
    std::stringstream in;
    in << make("x", "biology", "y", "biology", 50) << '\n'
       << make("x", "biology", "z", "physics", 150) << '\n'
       << "{\"id\":1}\n"
       << make("y", "physics", "z", "physics", 250) << '\n';
    const auto s = compute_stats(in);
    CHECK(s.records == 4);
    CHECK(s.malformed == 1);
    CHECK(s.cases == s.records - s.malformed);
    REQUIRE(s.diagnostics.size() == 1);
    CHECK(s.diagnostics[0].line == 3);
    CHECK(s.by_field.at("biology") == 2);
    CHECK(s.by_field.at("physics") == 2);
    CHECK(s.by_year.at("2001") == 3);
    CHECK(s.length_histogram.at(0) == 2);
    CHECK(s.length_histogram.at(100) == 2);
    CHECK(s.length_histogram.at(200) == 2);
    CHECK(s.partners_per_document.at(2) == 3);
    CHECK(nlohmann::json::parse(to_json(s))["by_field"]["physics"] == 2);
}
