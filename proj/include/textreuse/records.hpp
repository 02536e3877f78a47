#pragma once

#include <string>
#include <string_view>

#include "textreuse/alignment.hpp"
#include "textreuse/ingest.hpp"

namespace textreuse {

enum class OutputMode { full, metadata_only };

std::string_view to_string(OutputMode mode) noexcept;
OutputMode parse_output_mode(std::string_view name);

/// One case record, keys in the dataset order: id, then text_a, before_a,
/// after_a (full mode only), begin_a, end_a, doc_length_a, doi_a, year_a,
/// field_a, area_a, discipline_a, and the same for side b. Absent metadata
/// is written as null. No trailing newline.
std::string to_case_record(const ReuseCase& c, OutputMode mode = OutputMode::full);

/// Parses either mode; text fields missing in metadata-only records are left
/// empty. Throws std::runtime_error on a malformed record.
ReuseCase parse_case_record(std::string_view line);

// Publication record: doi, doc_length, year, field, area, discipline.
std::string to_publication_record(const Document& doc);

} // namespace textreuse
