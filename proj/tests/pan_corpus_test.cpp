#include <doctest.h>

#include <fstream>

#include "test_support.hpp"
#include "textreuse/pan_corpus.hpp"

using namespace textreuse;
using textreuse::test::TempDir;

namespace {

void write(const std::filesystem::path& path, const std::string& content) {
    std::filesystem::create_directories(path.parent_path());
    std::ofstream(path, std::ios::binary) << content;
}

std::string feature(std::size_t this_offset, std::size_t this_length, std::size_t source_offset,
                    std::size_t source_length) {
    return "<feature name=\"plagiarism\" this_offset=\"" + std::to_string(this_offset) + "\" this_length=\"" +
           std::to_string(this_length) + "\" source_offset=\"" + std::to_string(source_offset) +
           "\" source_length=\"" + std::to_string(source_length) + "\" />\n";
}

} // namespace

TEST_CASE("pan loader maps raw annotations onto normalized text") {
    TempDir dir("pan");
    const std::string phrase = "Quiet Rivers carry Ancient Stones";
    const std::string src = "Preface.  " + phrase + " downstream.";
    const std::string susp = "We note that \"" + phrase + "\" here.";
    write(dir / "src/source-document00001.txt", src);
    write(dir / "susp/suspicious-document00001.txt", susp);
    write(dir / "src/source-document00002.txt", "Nothing shared at all.");
    write(dir / "02-no-obfuscation/suspicious-document00001-source-document00001.xml",
          "<document>\n" + feature(susp.find(phrase), phrase.size(), src.find(phrase), phrase.size()) +
              "<feature name=\"about\" this_offset=\"0\" />\n</document>\n");
    write(dir / "01-no-plagiarism/suspicious-document00001-source-document00002.xml",
          "<document>\n</document>\n");

    const PanCorpus corpus = load_pan13(dir.path());
    REQUIRE(corpus.documents.size() == 3);
    CHECK(corpus.documents[0].doi == "source-document00001.txt");
    CHECK(corpus.documents[2].doi == "suspicious-document00001.txt");

    REQUIRE(corpus.gold.size() == 2);
    const GoldAnnotation& none = corpus.gold[0];
    CHECK(none.strategy == Strategy::no_plagiarism);
    CHECK(none.spans.empty());

    const GoldAnnotation& g = corpus.gold[1];
    CHECK(g.strategy == Strategy::none);
    CHECK(g.doi_a == "source-document00001.txt");
    CHECK(g.doi_b == "suspicious-document00001.txt");
    REQUIRE(g.spans.size() == 1);
    CHECK(corpus.documents[0].text(g.spans[0].a) == "quiet rivers carry ancient stones");
    CHECK(corpus.documents[2].text(g.spans[0].b) == "quiet rivers carry ancient stones");
}

TEST_CASE("pan loader rejects foreign layouts") {
    TempDir dir("pan-bad");
    CHECK_THROWS_AS(load_pan13(dir.path()), IngestError);
    write(dir / "src/source-document00001.txt", "a b c");
    write(dir / "susp/suspicious-document00001.txt", "a b c");
    write(dir / "09-mystery/suspicious-document00001-source-document00001.xml", "<document/>");
    CHECK_THROWS_AS(load_pan13(dir.path()), IngestError);
}
