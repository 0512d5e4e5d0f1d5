#include "quirkprint/dataset_io.hpp"

#include <cstdio>
#include <fstream>
#include <istream>
#include <iterator>
#include <ostream>
#include <sstream>

#include "quirkprint/error.hpp"

namespace quirkprint {

std::string csv_escape(std::string_view field) {
    if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

void write_signatures(std::ostream& out, const SignatureDataset& ds) {
    out << "browser,family,release_date";
    for (const auto& name : ds.attributes()->names()) out << ',' << csv_escape(name);
    out << '\n';
    for (const auto& sig : ds) {
        out << csv_escape(sig.label) << ',';
        if (sig.family) out << to_string(*sig.family);
        out << ',';
        if (sig.release_date) out << format_date(*sig.release_date);
        for (Outcome o : sig.outcomes) out << ',' << to_file_char(o);
        out << '\n';
    }
}

std::string signatures_to_string(const SignatureDataset& ds) {
    std::ostringstream out;
    write_signatures(out, ds);
    return out.str();
}

void export_signatures(const SignatureDataset& ds, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open " + path.string() + " for writing");
    write_signatures(out, ds);
    out.flush();
    if (!out) throw Error("write failed: " + path.string());
}

namespace {

// Minimal RFC 4180 record reader over an in-memory buffer.
class CsvReader {
public:
    CsvReader(std::string_view text, const std::string& source) : text_(text), source_(source) {}

    bool next(std::vector<std::string>& fields) {
        fields.clear();
        if (pos_ >= text_.size()) return false;
        record_line_ = line_;
        std::string field;
        bool quoted = false;
        bool was_quoted = false;
        while (pos_ < text_.size()) {
            char c = text_[pos_++];
            if (quoted) {
                if (c == '"') {
                    if (pos_ < text_.size() && text_[pos_] == '"') {
                        field += '"';
                        ++pos_;
                    } else {
                        quoted = false;
                    }
                } else {
                    if (c == '\n') ++line_;
                    field += c;
                }
                continue;
            }
            if (c == '"') {
                if (!field.empty() || was_quoted) throw ParseError(source_, line_, "stray quote inside a field");
                quoted = was_quoted = true;
            } else if (c == ',') {
                fields.push_back(std::move(field));
                field.clear();
                was_quoted = false;
            } else if (c == '\n' || c == '\r') {
                if (c == '\r' && pos_ < text_.size() && text_[pos_] == '\n') ++pos_;
                ++line_;
                fields.push_back(std::move(field));
                return true;
            } else {
                if (was_quoted) throw ParseError(source_, line_, "text after closing quote");
                field += c;
            }
        }
        if (quoted) throw ParseError(source_, record_line_, "unterminated quoted field");
        fields.push_back(std::move(field));
        return true;
    }

    std::size_t record_line() const noexcept { return record_line_; }

private:
    std::string_view text_;
    std::string source_;
    std::size_t pos_ = 0;
    std::size_t line_ = 1;
    std::size_t record_line_ = 1;
};

}  // namespace

ImportResult parse_signatures(std::string_view text, double min_confidence, const std::string& source_name) {
    CsvReader reader(text, source_name);
    std::vector<std::string> fields;
    if (!reader.next(fields)) throw ParseError(source_name, 1, "missing header");

    constexpr std::size_t meta = std::size(kMetadataColumns);
    if (fields.size() < meta) throw ParseError(source_name, 1, "header must start with browser,family,release_date");
    for (std::size_t i = 0; i < meta; ++i) {
        if (fields[i] != kMetadataColumns[i]) {
            throw ParseError(source_name, 1, "header column " + std::to_string(i + 1) + " must be '" +
                                                 std::string(kMetadataColumns[i]) + "', got '" + fields[i] + "'");
        }
    }
    Schema schema;
    try {
        schema = make_schema(std::vector<std::string>(fields.begin() + meta, fields.end()));
    } catch (const ValidationError& e) {
        throw ParseError(source_name, 1, e.what());
    }

    ImportResult result{SignatureDataset(schema), {}};
    std::size_t row_index = 0;
    while (reader.next(fields)) {
        const auto line = reader.record_line();
        if (fields.size() == 1 && fields[0].empty()) continue;  // blank line
        if (fields.size() != meta + schema->size()) {
            throw ParseError(source_name, line, "expected " + std::to_string(meta + schema->size()) +
                                                    " columns, got " + std::to_string(fields.size()));
        }
        BrowserSignature sig;
        sig.attributes = schema;
        sig.label = fields[0];
        if (!fields[1].empty()) {
            sig.family = family_from_string(fields[1]);
            if (!sig.family) throw ParseError(source_name, line, "unknown family '" + fields[1] + "'");
        }
        if (!fields[2].empty()) {
            sig.release_date = parse_date(fields[2]);
            if (!sig.release_date) throw ParseError(source_name, line, "bad release_date '" + fields[2] + "'");
        }
        sig.outcomes.reserve(schema->size());
        for (std::size_t i = meta; i < fields.size(); ++i) {
            const auto& cell = fields[i];
            auto o = cell.size() == 1 && cell[0] >= 'A' && cell[0] <= 'Z' ? outcome_from_char(cell[0]) : std::nullopt;
            if (!o) {
                throw ParseError(source_name, line, "column '" + (*schema)[i - meta] + "': value '" + cell +
                                                        "' is not one of P, S, N");
            }
            sig.outcomes.push_back(*o);
        }

        Fraction conf{sig.size() - sig.count(Outcome::NA), sig.size()};
        bool keep = sig.size() == 0 ? min_confidence <= 0.0 : conf.value() >= min_confidence - 1e-12;
        if (keep) {
            result.dataset.add(std::move(sig));
        } else {
            result.excluded.push_back({row_index, conf});
        }
        ++row_index;
    }
    return result;
}

ImportResult read_signatures(std::istream& in, double min_confidence, const std::string& source_name) {
    std::string text{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
    return parse_signatures(text, min_confidence, source_name);
}

ImportResult import_signatures(const std::filesystem::path& path, double min_confidence) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open signature file " + path.string());
    return read_signatures(in, min_confidence, path.string());
}

void write_exclusion_report(std::ostream& out, const std::vector<Exclusion>& excluded) {
    char buf[32];
    for (const auto& e : excluded) {
        std::snprintf(buf, sizeof buf, "%.6f", e.confidence.value());
        out << e.row_index << ',' << buf << '\n';
    }
}

}  // namespace quirkprint
