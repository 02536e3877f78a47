#include "textreuse/pipeline.hpp"

#include <algorithm>
#include <fstream>
#include <ostream>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

#include "textreuse/hashing.hpp"
#include "textreuse/parallel.hpp"

namespace textreuse {

namespace fs = std::filesystem;

namespace {

using ojson = nlohmann::ordered_json;

constexpr std::size_t kAlignBatch = 16;
constexpr const char* kCheckpointFile = "checkpoint.json";
constexpr const char* kCandidateFile = "candidates.tsv";

// Writes via a temporary sibling and renames, so readers never observe a
// partial file.
void write_file(const fs::path& path, const std::function<void(std::ostream&)>& body) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    const fs::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw PipelineError("cannot write " + tmp.string());
        body(out);
        out.flush();
        if (!out) throw PipelineError("write failed for " + tmp.string());
    }
    fs::rename(tmp, path);
}

std::string hex64(std::uint64_t v) {
    static constexpr char digits[] = "0123456789abcdef";
    std::string s(16, '0');
    for (int i = 15; i >= 0; --i, v >>= 4) s[static_cast<std::size_t>(i)] = digits[v & 0xf];
    return s;
}

ojson retrieval_settings(const RunConfig& c) {
    ojson j;
    j["retrieval"] = to_string(c.retrieval);
    j["n_passage"] = c.n_passage;
    j["m"] = c.m;
    j["j_min"] = c.j_min;
    j["df_cap"] = c.df_cap;
    j["seed"] = c.seed;
    j["min_words"] = c.min_words;
    j["max_words"] = c.max_words;
    return j;
}

std::string corpus_fingerprint(std::span<const Document> docs) {
    std::uint64_t h = 0x7465787472657573ULL;
    for (const auto& d : docs) {
        h = hash_bytes(d.doi, h);
        for (const auto& t : d.tokens) h = hash_bytes(t, h);
        h = mix64(h ^ d.token_count());
    }
    return hex64(h);
}

std::size_t pair_count(std::size_t n) { return n < 2 ? 0 : n * (n - 1) / 2; }

} // namespace

std::string_view to_string(RetrievalMode mode) noexcept { return mode == RetrievalMode::exact ? "exact" : "minhash"; }

RetrievalMode parse_retrieval_mode(std::string_view name) {
    if (name == "minhash") return RetrievalMode::minhash;
    if (name == "exact") return RetrievalMode::exact;
    throw ConfigError("unknown retrieval mode '" + std::string(name) + "'");
}

void RunConfig::validate() const {
    if (input.empty()) throw ConfigError("input path is required");
    if (output.empty() && !stop_after_retrieval) throw ConfigError("output directory is required");
    if (stop_after_retrieval && checkpoint_dir.empty()) {
        throw ConfigError("stopping after retrieval requires a checkpoint directory");
    }
    if (n_passage == 0) throw ConfigError("n_passage must be at least 1");
    if (m == 0) throw ConfigError("m must be at least 1");
    if (j_min == 0) throw ConfigError("j_min must be at least 1");
    if (df_cap == 0) throw ConfigError("df_cap must be at least 1");
    if (min_words > max_words) throw ConfigError("min_words exceeds max_words");
    if (run_namespace.empty()) throw ConfigError("run namespace must not be empty");
    try {
        align.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
}

std::string RunConfig::to_json() const {
    ojson j;
    j["input"] = input.string();
    j["output"] = output.string();
    j["checkpoint_dir"] = checkpoint_dir.string();
    j["retrieval"] = to_string(retrieval);
    j["n_passage"] = n_passage;
    j["m"] = m;
    j["j_min"] = j_min;
    j["df_cap"] = df_cap;
    j["n_gram"] = align.n_gram;
    j["k"] = align.overlap;
    j["delta"] = align.delta;
    j["min_seeds"] = align.min_seeds;
    j["mode"] = textreuse::to_string(mode);
    j["min_words"] = min_words;
    j["max_words"] = max_words;
    j["workers"] = resolve_workers(workers);
    j["seed"] = seed;
    j["run_namespace"] = run_namespace;
    j["retries"] = retries;
    return j.dump(2);
}

std::vector<Document> prepare_documents(std::span<const RawDocument> raw, const RunConfig& config,
                                        std::size_t* filtered) {
    std::vector<Document> docs(raw.size());
    parallel_for(raw.size(), config.workers, [&](std::size_t, std::size_t i) { docs[i] = normalize(raw[i]); });
    const auto before = docs.size();
    std::erase_if(docs, [&](const Document& d) { return !length_filter(d, config.min_words, config.max_words); });
    if (filtered) *filtered = before - docs.size();
    std::sort(docs.begin(), docs.end(), [](const Document& x, const Document& y) { return x.doi < y.doi; });
    return docs;
}

RetrievalResult retrieve(std::span<const Document> docs, const RunConfig& config) {
    RetrievalResult result;
    if (config.retrieval == RetrievalMode::exact) {
        result.candidates = retrieve_candidates_exact(docs, config.n_passage, config.j_min, config.workers);
        return result;
    }
    const SketchParams params{config.n_passage, config.m, config.seed};
    std::vector<std::vector<PassageSketch>> per_doc(docs.size());
    parallel_for(docs.size(), config.workers,
                 [&](std::size_t, std::size_t i) { per_doc[i] = sketch_document(docs[i], params); });
    std::vector<PassageSketch> sketches;
    for (auto& s : per_doc) std::move(s.begin(), s.end(), std::back_inserter(sketches));

    const auto index = build_index(sketches, {config.df_cap, config.workers});
    result.dropped_hashes = index.dropped().size();
    result.candidates = retrieve_candidates(index, config.workers);
    return result;
}

std::vector<ReuseCase> align_candidates(std::span<const Document> docs, std::span<const CandidatePair> candidates,
                                        const RunConfig& config, const AlignFn& align_fn) {
    std::unordered_map<std::string_view, const Document*> by_doi;
    for (const auto& d : docs) by_doi.emplace(d.doi, &d);
    auto find = [&](const std::string& doi) {
        auto it = by_doi.find(doi);
        if (it == by_doi.end()) throw PipelineError("candidate pair references unknown document " + doi);
        return it->second;
    };

    std::vector<std::vector<ReuseCase>> slots(candidates.size());
    try {
        run_batches(candidates.size(), kAlignBatch, config.workers, config.retries,
                    [&](std::size_t begin, std::size_t end) {
                        for (std::size_t i = begin; i < end; ++i) {
                            const auto& p = candidates[i];
                            const Document& a = *find(p.doi_a);
                            const Document& b = *find(p.doi_b);
                            slots[i] = align_fn ? align_fn(a, b)
                                                : align_pair(a, b, config.align, config.run_namespace);
                        }
                    });
    } catch (const BatchFailure& e) {
        throw PipelineError(std::string("alignment failed after retries: ") + e.what() + " (" +
                            candidates[e.begin()].doi_a + " / " + candidates[e.begin()].doi_b + " .. " +
                            candidates[e.end() - 1].doi_a + " / " + candidates[e.end() - 1].doi_b + ")");
    }

    std::vector<ReuseCase> cases;
    for (auto& s : slots) std::move(s.begin(), s.end(), std::back_inserter(cases));
    std::sort(cases.begin(), cases.end(), [](const ReuseCase& x, const ReuseCase& y) {
        return std::tie(x.a.doi, x.b.doi, x.a.begin, x.b.begin, x.a.end, x.b.end) <
               std::tie(y.a.doi, y.b.doi, y.a.begin, y.b.begin, y.a.end, y.b.end);
    });
    return cases;
}

RunSummary run_pipeline(const RunConfig& config, std::ostream* log) {
    config.validate();
    RunSummary summary;

    auto load = load_corpus(config.input);
    summary.documents_in = load.documents.size();
    summary.load_diagnostics = load.diagnostics.size();
    if (log) {
        for (const auto& d : load.diagnostics) *log << d.source << ':' << d.line << ": " << d.message << '\n';
    }

    const auto docs = prepare_documents(load.documents, config, &summary.documents_filtered);
    summary.documents_kept = docs.size();
    summary.total_pairs = pair_count(docs.size());

    ojson settings = retrieval_settings(config);
    settings["corpus"] = corpus_fingerprint(docs);

    std::vector<CandidatePair> candidates;
    bool have_candidates = false;
    if (!config.checkpoint_dir.empty()) {
        const fs::path marker = config.checkpoint_dir / kCheckpointFile;
        if (fs::exists(marker)) {
            std::ifstream in(marker);
            ojson stored;
            try {
                stored = ojson::parse(in);
            } catch (const std::exception& e) {
                throw PipelineError("unreadable checkpoint " + marker.string() + ": " + e.what());
            }
            if (stored != settings) {
                throw PipelineError("checkpoint mismatch in " + config.checkpoint_dir.string() +
                                    ": corpus or retrieval settings differ; refusing to resume");
            }
            std::ifstream cin(config.checkpoint_dir / kCandidateFile);
            if (!cin) throw PipelineError("checkpoint is missing " + std::string(kCandidateFile));
            candidates = read_candidates(cin);
            summary.resumed = true;
            have_candidates = true;
            if (log) *log << "resumed " << candidates.size() << " candidate pairs from checkpoint\n";
        }
    }

    if (!have_candidates) {
        auto retrieved = retrieve(docs, config);
        candidates = std::move(retrieved.candidates);
        summary.dropped_hashes = retrieved.dropped_hashes;
        if (log && summary.dropped_hashes) {
            *log << "dropped " << summary.dropped_hashes << " hash postings above df cap " << config.df_cap << '\n';
        }
        if (!config.checkpoint_dir.empty()) {
            write_file(config.checkpoint_dir / kCandidateFile,
                       [&](std::ostream& out) { write_candidates(out, candidates); });
            write_file(config.checkpoint_dir / kCheckpointFile,
                       [&](std::ostream& out) { out << settings.dump(2) << '\n'; });
        }
    }
    summary.candidate_pairs = candidates.size();
    summary.pruning_ratio =
        summary.total_pairs ? 1.0 - double(candidates.size()) / double(summary.total_pairs) : 1.0;
    if (config.stop_after_retrieval) return summary;

    const auto cases = align_candidates(docs, candidates, config);
    summary.cases = cases.size();
    summary.completed = true;

    write_file(config.output / "cases.jsonl", [&](std::ostream& out) {
        for (const auto& c : cases) out << to_case_record(c, config.mode) << '\n';
    });
    write_file(config.output / "publications.jsonl", [&](std::ostream& out) {
        for (const auto& d : docs) out << to_publication_record(d) << '\n';
    });
    write_file(config.output / "manifest.json", [&](std::ostream& out) {
        ojson manifest;
        manifest["config"] = ojson::parse(config.to_json());
        manifest["corpus_fingerprint"] = settings["corpus"];
        manifest["counts"] = {{"documents_in", summary.documents_in},
                              {"documents_filtered", summary.documents_filtered},
                              {"documents_kept", summary.documents_kept},
                              {"load_diagnostics", summary.load_diagnostics},
                              {"candidate_pairs", summary.candidate_pairs},
                              {"total_pairs", summary.total_pairs},
                              {"pruning_ratio", summary.pruning_ratio},
                              {"dropped_hashes", summary.dropped_hashes},
                              {"cases", summary.cases}};
        manifest["resumed"] = summary.resumed;
        out << manifest.dump(2) << '\n';
    });
    return summary;
}

} // namespace textreuse
