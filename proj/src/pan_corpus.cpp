#include "textreuse/pan_corpus.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <regex>
#include <sstream>

namespace textreuse {

namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IngestError("cannot read " + path.string());
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

std::string attribute(const std::string& tag, const std::string& name) {
    const std::regex re(name + R"(\s*=\s*"([^"]*)\")");
    std::smatch m;
    return std::regex_search(tag, m, re) ? m[1].str() : std::string();
}

Strategy strategy_of(const std::string& dir) {
    if (dir.find("no-plagiarism") != std::string::npos) return Strategy::no_plagiarism;
    if (dir.find("no-obfuscation") != std::string::npos) return Strategy::none;
    if (dir.find("random") != std::string::npos) return Strategy::random;
    if (dir.find("translation") != std::string::npos) return Strategy::translation;
    if (dir.find("summary") != std::string::npos) return Strategy::summary;
    throw IngestError("unrecognized PAN strategy directory " + dir);
}

} // namespace

PanCorpus load_pan13(const fs::path& root) {
    if (!fs::is_directory(root / "susp") || !fs::is_directory(root / "src")) {
        throw IngestError("not a PAN-13 corpus directory: " + root.string());
    }

    std::map<std::string, Document> docs;
    auto doc = [&](const std::string& dir, const std::string& name) -> const Document& {
        auto it = docs.find(name);
        if (it == docs.end()) {
            it = docs.emplace(name, normalize(name, slurp(root / dir / name))).first;
        }
        return it->second;
    };

    std::vector<fs::path> dirs;
    for (const auto& e : fs::directory_iterator(root)) {
        const auto name = e.path().filename().string();
        if (e.is_directory() && name.size() > 3 && std::isdigit(static_cast<unsigned char>(name[0]))) {
            dirs.push_back(e.path());
        }
    }
    std::sort(dirs.begin(), dirs.end());

    PanCorpus corpus;
    const std::regex feature_re(R"(<feature\b[^>]*>)");
    for (const auto& dir : dirs) {
        const Strategy strategy = strategy_of(dir.filename().string());
        std::vector<fs::path> files;
        for (const auto& e : fs::directory_iterator(dir)) {
            if (e.path().extension() == ".xml") files.push_back(e.path());
        }
        std::sort(files.begin(), files.end());
        for (const auto& file : files) {
            const std::string xml = slurp(file);
            // suspicious-documentXXXXX-source-documentYYYYY.xml
            const std::string stem = file.stem().string();
            const auto cut = stem.find("-source-document");
            if (cut == std::string::npos) throw IngestError("unexpected annotation file name " + stem);
            const std::string susp_name = stem.substr(0, cut) + ".txt";
            const std::string src_name = stem.substr(cut + 1) + ".txt";
            const Document& susp = doc("susp", susp_name);
            const Document& src = doc("src", src_name);

            GoldAnnotation g;
            g.pair_id = stem;
            g.strategy = strategy;
            g.doi_a = src.doi; // "source-..." sorts before "suspicious-..."
            g.doi_b = susp.doi;
            for (auto it = std::sregex_iterator(xml.begin(), xml.end(), feature_re); it != std::sregex_iterator();
                 ++it) {
                const std::string tag = it->str();
                if (attribute(tag, "name") != "plagiarism") continue;
                const std::size_t this_offset = std::stoul(attribute(tag, "this_offset"));
                const std::size_t this_length = std::stoul(attribute(tag, "this_length"));
                const std::size_t source_offset = std::stoul(attribute(tag, "source_offset"));
                const std::size_t source_length = std::stoul(attribute(tag, "source_length"));
                const CharSpan a = src.to_normalized({source_offset, source_offset + source_length});
                const CharSpan b = susp.to_normalized({this_offset, this_offset + this_length});
                if (!a.empty() && !b.empty()) g.spans.push_back({a, b});
            }
            if (strategy == Strategy::no_plagiarism) g.spans.clear();
            corpus.gold.push_back(std::move(g));
        }
    }
    for (auto& [name, d] : docs) corpus.documents.push_back(std::move(d));
    return corpus;
}

} // namespace textreuse
