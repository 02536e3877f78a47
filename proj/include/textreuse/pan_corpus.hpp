#pragma once

#include <filesystem>
#include <vector>

#include "textreuse/ingest.hpp"
#include "textreuse/metrics.hpp"

namespace textreuse {

struct PanCorpus {
    std::vector<Document> documents; // sorted by doi (the file name)
    std::vector<GoldAnnotation> gold; // raw annotation offsets mapped to normalized text
};

/// Loads a PAN-13 text alignment corpus laid out as susp/, src/ and one
/// directory of XML annotations per obfuscation strategy
/// (01-no-plagiarism, 02-no-obfuscation, 03-random-obfuscation,
/// 04-translation-obfuscation, 05-summary-obfuscation).
PanCorpus load_pan13(const std::filesystem::path& root);

} // namespace textreuse
