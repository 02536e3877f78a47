// textreuse: batch text reuse detection (retrieval + alignment), evaluation,
// synthetic corpus generation and case statistics.

#include <algorithm>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "textreuse/alignment.hpp"
#include "textreuse/ingest.hpp"
#include "textreuse/metrics.hpp"
#include "textreuse/pipeline.hpp"
#include "textreuse/records.hpp"
#include "textreuse/retrieval.hpp"
#include "textreuse/synthgen.hpp"

namespace fs = std::filesystem;
using namespace textreuse;

namespace {

std::ofstream open_out(const fs::path& path) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    return out;
}

std::ifstream open_in(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    return in;
}

void report_diagnostics(const std::vector<Diagnostic>& diagnostics) {
    for (const auto& d : diagnostics) std::cerr << d.source << ':' << d.line << ": " << d.message << '\n';
}

struct Options {
    RunConfig config;
    std::string retrieval_mode = "minhash";
    std::string output_mode = "full";

    void finish() {
        config.retrieval = parse_retrieval_mode(retrieval_mode);
        config.mode = parse_output_mode(output_mode);
    }
};

void add_common(CLI::App* app, Options& o) {
    app->add_option("--workers", o.config.workers, "Worker threads (0: hardware concurrency)");
    app->add_option("--min-words", o.config.min_words, "Minimum document length in words")->capture_default_str();
    app->add_option("--max-words", o.config.max_words, "Maximum document length in words")->capture_default_str();
}

void add_retrieval(CLI::App* app, Options& o) {
    app->add_option("--n-passage", o.config.n_passage, "Passage length in words")->capture_default_str();
    app->add_option("--m", o.config.m, "MinHash values per passage")->capture_default_str();
    app->add_option("--j-min", o.config.j_min, "Shared distinct terms (exact mode)")->capture_default_str();
    app->add_option("--retrieval", o.retrieval_mode, "minhash | exact")->capture_default_str();
    app->add_option("--df-cap", o.config.df_cap, "Drop hashes shared by more documents")->capture_default_str();
    app->add_option("--seed", o.config.seed, "Hash seed")->capture_default_str();
}

void add_alignment(CLI::App* app, Options& o) {
    app->add_option("--n-gram", o.config.align.n_gram, "N-gram size")->capture_default_str();
    app->add_option("--k", o.config.align.overlap, "N-gram overlap")->capture_default_str();
    app->add_option("--delta", o.config.align.delta, "Extension range in characters")->capture_default_str();
    app->add_option("--min-seeds", o.config.align.min_seeds, "Seeds required per case")->capture_default_str();
    app->add_option("--mode", o.output_mode, "full | metadata-only")->capture_default_str();
    app->add_option("--namespace", o.config.run_namespace, "Run namespace for case ids")->capture_default_str();
}

std::vector<Document> load_documents(const Options& o) {
    auto load = load_corpus(o.config.input);
    report_diagnostics(load.diagnostics);
    return prepare_documents(load.documents, o.config);
}

std::vector<std::size_t> parse_list(const std::string& s) {
    std::vector<std::size_t> out;
    std::stringstream in(s);
    std::string item;
    while (std::getline(in, item, ',')) {
        if (!item.empty()) out.push_back(std::stoul(item));
    }
    return out;
}

// CLI11 does not read config files attached to subcommands, so each
// `--config FILE` is expanded in place into the flags it stands for. Flags
// given later on the command line override the file. Section headers are
// ignored; keys may use '_' or '-'.
// A config key that belongs to another subcommand is skipped, so one file can
// serve retrieve, align and pipeline. Keys no subcommand knows still fail.
bool foreign_key(const CLI::App& app, const std::string& sub, const std::string& flag) {
    const CLI::App* own = nullptr;
    bool known = false;
    for (const CLI::App* cmd : app.get_subcommands([](const CLI::App*) { return true; })) {
        if (cmd->get_name() == sub) own = cmd;
        if (cmd->get_option_no_throw(flag) != nullptr) known = true;
    }
    return own != nullptr && known && own->get_option_no_throw(flag) == nullptr;
}

std::vector<std::string> expand_config_files(const CLI::App& app, int argc, char** argv) {
    std::vector<std::string> args;
    const std::string sub = argc > 1 ? argv[1] : "";
    for (int i = 1; i < argc; ++i) {
        const std::string arg = argv[i];
        std::string file;
        if (arg == "--config" && i + 1 < argc) {
            file = argv[++i];
        } else if (arg.rfind("--config=", 0) == 0) {
            file = arg.substr(9);
        } else {
            args.push_back(arg);
            continue;
        }
        for (const auto& item : CLI::ConfigINI().from_file(file)) {
            if (item.name == "++" || item.name == "--") continue; // section markers
            std::string name = item.name;
            std::replace(name.begin(), name.end(), '_', '-');
            if (foreign_key(app, sub, "--" + name)) continue;
            if (item.inputs.empty()) {
                args.push_back("--" + name);
            } else {
                for (const auto& value : item.inputs) args.push_back("--" + name + "=" + value);
            }
        }
    }
    return args;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Text reuse detection over plain-text document collections"};
    app.require_subcommand(1);
    app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

    // normalize
    Options norm;
    fs::path norm_publications;
    bool norm_filter = false;
    auto* normalize_cmd = app.add_subcommand("normalize", "Normalize a corpus and emit publication records");
    normalize_cmd->add_option("--input,-i", norm.config.input, "Corpus file or directory")->required();
    normalize_cmd->add_option("--output,-o", norm.config.output, "Normalized corpus (JSONL)")->required();
    normalize_cmd->add_option("--publications", norm_publications, "Publication records (JSONL)");
    normalize_cmd->add_flag("--filter", norm_filter, "Apply the word-count filter");
    add_common(normalize_cmd, norm);

    // retrieve
    Options ret;
    auto* retrieve_cmd = app.add_subcommand("retrieve", "Source retrieval: write candidate pairs");
    retrieve_cmd->add_option("--input,-i", ret.config.input, "Corpus file or directory")->required();
    retrieve_cmd->add_option("--output,-o", ret.config.output, "Candidate file (TSV)")->required();
    add_common(retrieve_cmd, ret);
    add_retrieval(retrieve_cmd, ret);

    // align
    Options aln;
    fs::path aln_candidates;
    auto* align_cmd = app.add_subcommand("align", "Text alignment over candidate pairs");
    align_cmd->add_option("--input,-i", aln.config.input, "Corpus file or directory")->required();
    align_cmd->add_option("--candidates,-c", aln_candidates, "Candidate file (TSV)")->required();
    align_cmd->add_option("--output,-o", aln.config.output, "Case file (JSONL)")->required();
    add_common(align_cmd, aln);
    add_alignment(align_cmd, aln);

    // pipeline
    Options pipe;
    auto* pipeline_cmd = app.add_subcommand("pipeline", "Run retrieval and alignment end to end");
    pipeline_cmd->add_option("--input,-i", pipe.config.input, "Corpus file or directory")->required();
    pipeline_cmd->add_option("--output,-o", pipe.config.output, "Output directory");
    pipeline_cmd->add_option("--checkpoint", pipe.config.checkpoint_dir, "Checkpoint directory");
    pipeline_cmd->add_flag("--stop-after-retrieval", pipe.config.stop_after_retrieval,
                           "Write the retrieval checkpoint and stop");
    pipeline_cmd->add_option("--retries", pipe.config.retries, "Retries per failed alignment batch")
        ->capture_default_str();
    add_common(pipeline_cmd, pipe);
    add_retrieval(pipeline_cmd, pipe);
    add_alignment(pipeline_cmd, pipe);

    // evaluate
    fs::path ev_gold, ev_cases, ev_corpus, ev_report;
    std::string ev_averaging = "macro", grid_n, grid_k, grid_delta;
    bool ev_granularity = false, ev_unlisted = false;
    std::size_t ev_min_seeds = kMinSeeds, ev_workers = 0;
    auto* evaluate_cmd = app.add_subcommand("evaluate", "Character-level precision/recall against gold spans");
    evaluate_cmd->add_option("--gold,-g", ev_gold, "Gold annotations (JSONL)")->required();
    evaluate_cmd->add_option("--cases,-c", ev_cases, "Case file to score");
    evaluate_cmd->add_option("--corpus", ev_corpus, "Corpus, required for grid search");
    evaluate_cmd->add_option("--report", ev_report, "Write the report as JSONL");
    evaluate_cmd->add_option("--averaging", ev_averaging, "macro | micro")->capture_default_str();
    evaluate_cmd->add_flag("--granularity", ev_granularity, "Report plagdet with granularity folded in");
    evaluate_cmd->add_flag("--score-unlisted-pairs", ev_unlisted, "Score detections on pairs absent from gold");
    evaluate_cmd->add_option("--grid-n", grid_n, "Grid search n-gram sizes, comma separated");
    evaluate_cmd->add_option("--grid-k", grid_k, "Grid search overlaps, comma separated");
    evaluate_cmd->add_option("--grid-delta", grid_delta, "Grid search extension ranges, comma separated");
    evaluate_cmd->add_option("--min-seeds", ev_min_seeds, "Seeds per case during grid search")->capture_default_str();
    evaluate_cmd->add_option("--workers", ev_workers, "Worker threads for grid search");

    // gen-corpus
    GenSpec gen;
    fs::path gen_out;
    std::string gen_obfuscation = "none";
    double gen_intensity = 0.0;
    std::size_t gen_cases = 0;
    auto* gen_cmd = app.add_subcommand("gen-corpus", "Generate a synthetic corpus with gold annotations");
    gen_cmd->add_option("--output,-o", gen_out, "Output directory")->required();
    gen_cmd->add_option("--documents", gen.documents)->capture_default_str();
    gen_cmd->add_option("--min-tokens", gen.min_tokens)->capture_default_str();
    gen_cmd->add_option("--max-tokens", gen.max_tokens)->capture_default_str();
    gen_cmd->add_option("--vocabulary", gen.vocabulary)->capture_default_str();
    gen_cmd->add_option("--reuse-rate", gen.reuse_rate)->capture_default_str();
    gen_cmd->add_option("--cases", gen_cases, "Planted case count (overrides --reuse-rate)");
    gen_cmd->add_option("--min-passage", gen.min_passage)->capture_default_str();
    gen_cmd->add_option("--max-passage", gen.max_passage)->capture_default_str();
    gen_cmd->add_option("--obfuscation", gen_obfuscation, "none | random")->capture_default_str();
    gen_cmd->add_option("--intensity", gen_intensity, "Uniform random-obfuscation edit rate")->capture_default_str();
    gen_cmd->add_option("--negative-pairs", gen.negative_pairs)->capture_default_str();
    gen_cmd->add_option("--seed", gen.seed)->capture_default_str();

    // stats
    fs::path stats_in;
    auto* stats_cmd = app.add_subcommand("stats", "Summary statistics over a case file");
    stats_cmd->add_option("--input,-i", stats_in, "Case file (JSONL)")->required();

    for (auto* sub : {retrieve_cmd, align_cmd, pipeline_cmd}) {
        sub->add_option("--config", "key=value file of options (expanded before parsing)");
    }

    try {
        auto args = expand_config_files(app, argc, argv);
        std::reverse(args.begin(), args.end());
        app.parse(std::move(args));
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (*normalize_cmd) {
            norm.finish();
            auto load = load_corpus(norm.config.input);
            report_diagnostics(load.diagnostics);
            auto out = open_out(norm.config.output);
            std::ofstream pubs;
            if (!norm_publications.empty()) pubs = open_out(norm_publications);
            for (const auto& raw : load.documents) {
                const Document doc = normalize(raw);
                if (norm_filter && !length_filter(doc, norm.config.min_words, norm.config.max_words)) continue;
                out << to_document_record({doc.doi, doc.text(), doc.metadata}) << '\n';
                if (pubs.is_open()) pubs << to_publication_record(doc) << '\n';
            }
        } else if (*retrieve_cmd) {
            ret.finish();
            const auto docs = load_documents(ret);
            const auto result = retrieve(docs, ret.config);
            auto out = open_out(ret.config.output);
            write_candidates(out, result.candidates);
            std::cerr << docs.size() << " documents, " << result.candidates.size() << " candidate pairs\n";
        } else if (*align_cmd) {
            aln.finish();
            aln.config.align.validate();
            const auto docs = load_documents(aln);
            auto in = open_in(aln_candidates);
            const auto candidates = read_candidates(in);
            const auto cases = align_candidates(docs, candidates, aln.config);
            auto out = open_out(aln.config.output);
            for (const auto& c : cases) out << to_case_record(c, aln.config.mode) << '\n';
            std::cerr << candidates.size() << " candidate pairs, " << cases.size() << " cases\n";
        } else if (*pipeline_cmd) {
            pipe.finish();
            const auto s = run_pipeline(pipe.config, &std::cerr);
            std::cerr << s.documents_kept << " documents (" << s.documents_filtered << " filtered), "
                      << s.candidate_pairs << " candidate pairs, pruning ratio " << s.pruning_ratio;
            if (s.completed) std::cerr << ", " << s.cases << " cases";
            std::cerr << '\n';
        } else if (*evaluate_cmd) {
            EvalOptions options;
            if (ev_averaging == "micro") {
                options.averaging = Averaging::micro;
            } else if (ev_averaging != "macro") {
                throw std::invalid_argument("unknown averaging '" + ev_averaging + "'");
            }
            options.fold_granularity = ev_granularity;
            options.score_unlisted_pairs = ev_unlisted;
            auto gin = open_in(ev_gold);
            const auto gold = read_gold(gin);

            if (!grid_n.empty() || !grid_k.empty() || !grid_delta.empty()) {
                if (ev_corpus.empty()) throw std::invalid_argument("grid search needs --corpus");
                Options o;
                o.config.input = ev_corpus;
                o.config.min_words = 0;
                o.config.max_words = std::numeric_limits<std::size_t>::max();
                o.config.workers = ev_workers;
                const auto docs = load_documents(o);
                const GridRanges ranges{parse_list(grid_n.empty() ? "8" : grid_n),
                                        parse_list(grid_k.empty() ? "7" : grid_k),
                                        parse_list(grid_delta.empty() ? "250" : grid_delta)};
                const auto rows = grid_search(docs, gold, ranges, ev_min_seeds, options, ev_workers);
                std::cout << to_table(rows);
            } else {
                if (ev_cases.empty()) throw std::invalid_argument("evaluate needs --cases or grid options");
                auto cin = open_in(ev_cases);
                std::vector<Detection> detected;
                std::string line;
                while (std::getline(cin, line)) {
                    if (!line.empty()) detected.push_back(to_detection(parse_case_record(line)));
                }
                const auto report = evaluate(gold, detected, options);
                std::cout << to_table(report);
                if (!ev_report.empty()) {
                    auto out = open_out(ev_report);
                    out << to_jsonl(report);
                }
            }
        } else if (*gen_cmd) {
            if (gen_obfuscation == "random") {
                gen.obfuscation = ObfuscationKind::random;
            } else if (gen_obfuscation != "none") {
                throw std::invalid_argument("unknown obfuscation '" + gen_obfuscation + "'");
            }
            gen.intensity = ObfuscationIntensity::uniform(gen_intensity);
            if (gen_cases > 0) gen.case_count = gen_cases;
            const auto corpus = generate(gen);
            auto docs = open_out(gen_out / "corpus.jsonl");
            for (const auto& d : corpus.documents) docs << to_document_record(d) << '\n';
            auto gold = open_out(gen_out / "gold.jsonl");
            for (const auto& g : corpus.gold) gold << to_gold_record(g) << '\n';
            auto manifest = open_out(gen_out / "manifest.json");
            manifest << to_json(gen) << '\n';
            std::cerr << corpus.documents.size() << " documents, " << corpus.gold.size() << " gold pairs\n";
        } else if (*stats_cmd) {
            auto in = open_in(stats_in);
            const auto stats = compute_stats(in, stats_in.string());
            report_diagnostics(stats.diagnostics);
            std::cout << to_json(stats) << '\n';
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
