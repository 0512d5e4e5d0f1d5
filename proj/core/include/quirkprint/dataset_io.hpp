#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "quirkprint/signature.hpp"

namespace quirkprint {

inline constexpr double kDefaultMinConfidence = 0.90;

// Fixed leading columns; attribute columns follow in test-case order.
inline constexpr std::string_view kMetadataColumns[] = {"browser", "family", "release_date"};

struct Exclusion {
    std::size_t row_index = 0;  // 0-based data row
    Fraction confidence;
};

struct ImportResult {
    SignatureDataset dataset;
    std::vector<Exclusion> excluded;
};

// Comma-separated, RFC 4180 quoting for metadata cells, values P/S/N, LF line endings.
void write_signatures(std::ostream& out, const SignatureDataset& ds);
std::string signatures_to_string(const SignatureDataset& ds);
void export_signatures(const SignatureDataset& ds, const std::filesystem::path& path);

// Rows with confidence below `min_confidence` are left out and listed in `excluded`.
// Malformed input throws ParseError naming the offending line.
ImportResult read_signatures(std::istream& in, double min_confidence = kDefaultMinConfidence,
                             const std::string& source_name = "<signatures>");
ImportResult parse_signatures(std::string_view text, double min_confidence = kDefaultMinConfidence,
                              const std::string& source_name = "<signatures>");
ImportResult import_signatures(const std::filesystem::path& path, double min_confidence = kDefaultMinConfidence);

// "row_index,confidence" per line, confidence as a decimal with six places.
void write_exclusion_report(std::ostream& out, const std::vector<Exclusion>& excluded);

// CSV helpers shared with the report writers.
std::string csv_escape(std::string_view field);

}  // namespace quirkprint
