#include "quirkprint/corpus.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "quirkprint/error.hpp"

namespace quirkprint {

using nlohmann::json;

std::string_view to_string(VectorSource s) noexcept {
    switch (s) {
        case VectorSource::RSnake: return "rsnake";
        case VectorSource::Html5Sec: return "html5sec";
        case VectorSource::Shazzer: return "shazzer";
    }
    return "?";
}

std::string_view to_string(PayloadFormat f) noexcept {
    switch (f) {
        case PayloadFormat::Identity: return "identity";
        case PayloadFormat::Base64: return "base64";
        case PayloadFormat::ExternalJsUrl: return "external_js_url";
    }
    return "?";
}

std::vector<WebContext> default_contexts() {
    return {
        {1, "quirks", "", "text/html"},
        {2, "html5", "<!DOCTYPE html>\n", "text/html"},
    };
}

std::vector<Encoding> default_encodings() { return {{1, "utf-8"}}; }

std::string TestCase::attribute_name() const {
    return std::to_string(vector_id) + "-" + std::to_string(context_id) + "-" + std::to_string(encoding_id);
}

TestCase TestCase::parse(std::string_view name) {
    int parts[3] = {0, 0, 0};
    const char* p = name.data();
    const char* end = name.data() + name.size();
    for (int i = 0; i < 3; ++i) {
        auto [next, ec] = std::from_chars(p, end, parts[i]);
        if (ec != std::errc() || parts[i] <= 0) {
            throw ValidationError("malformed test-case attribute '" + std::string(name) + "'");
        }
        p = next;
        if (i < 2) {
            if (p == end || *p != '-') throw ValidationError("malformed test-case attribute '" + std::string(name) + "'");
            ++p;
        }
    }
    if (p != end) throw ValidationError("malformed test-case attribute '" + std::string(name) + "'");
    return {parts[0], parts[1], parts[2]};
}

namespace {

std::size_t count_occurrences(std::string_view hay, std::string_view needle) {
    std::size_t n = 0;
    for (auto pos = hay.find(needle); pos != std::string_view::npos; pos = hay.find(needle, pos + needle.size())) ++n;
    return n;
}

void check_vector(const QuirkVector& v) {
    if (v.id <= 0) throw ValidationError("vector id must be positive, got " + std::to_string(v.id));
    if (count_occurrences(v.template_text, kPayloadPlaceholder) != 1) {
        throw PlaceholderError("vector " + std::to_string(v.id) + ": template must contain " +
                               std::string(kPayloadPlaceholder) + " exactly once");
    }
}

template <typename T>
void check_unique_ids(const std::vector<T>& items, const char* what) {
    std::unordered_set<int> seen;
    for (const auto& item : items) {
        if (!seen.insert(item.id).second) {
            throw DuplicateIdError(std::string("duplicate ") + what + " id " + std::to_string(item.id));
        }
    }
}

VectorSource parse_source(std::string_view s) {
    for (auto v : {VectorSource::RSnake, VectorSource::Html5Sec, VectorSource::Shazzer}) {
        if (s == to_string(v)) return v;
    }
    throw ValidationError("unknown vector source '" + std::string(s) + "'");
}

PayloadFormat parse_format(std::string_view s) {
    for (auto f : {PayloadFormat::Identity, PayloadFormat::Base64, PayloadFormat::ExternalJsUrl}) {
        if (s == to_string(f)) return f;
    }
    throw ValidationError("unknown payload format '" + std::string(s) + "'");
}

}  // namespace

Corpus::Corpus(std::vector<QuirkVector> vectors, std::vector<WebContext> contexts, std::vector<Encoding> encodings)
    : vectors_(std::move(vectors)), contexts_(std::move(contexts)), encodings_(std::move(encodings)) {
    check_unique_ids(vectors_, "vector");
    check_unique_ids(contexts_, "context");
    check_unique_ids(encodings_, "encoding");
    for (const auto& c : contexts_) {
        if (c.id <= 0) throw ValidationError("context id must be positive");
    }
    for (const auto& e : encodings_) {
        if (e.id <= 0) throw ValidationError("encoding id must be positive");
    }
    for (std::size_t i = 0; i < vectors_.size(); ++i) {
        check_vector(vectors_[i]);
        vector_index_.emplace(vectors_[i].id, i);
        ++per_source_[static_cast<std::size_t>(vectors_[i].source)];
    }
}

const QuirkVector* Corpus::find_vector(int id) const {
    auto it = vector_index_.find(id);
    return it == vector_index_.end() ? nullptr : &vectors_[it->second];
}

const WebContext* Corpus::find_context(int id) const {
    for (const auto& c : contexts_) {
        if (c.id == id) return &c;
    }
    return nullptr;
}

const Encoding* Corpus::find_encoding(int id) const {
    for (const auto& e : encodings_) {
        if (e.id == id) return &e;
    }
    return nullptr;
}

Corpus parse_corpus(std::istream& in, const std::string& source_name, std::vector<WebContext> contexts,
                    std::vector<Encoding> encodings) {
    std::vector<QuirkVector> vectors;
    std::unordered_map<int, std::size_t> first_line;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        auto first = line.find_first_not_of(" \t");
        if (first == std::string::npos || line[first] == '#') continue;

        QuirkVector v;
        try {
            json rec = json::parse(line);
            if (!rec.is_object()) throw ParseError(source_name, lineno, "record is not an object");
            v.id = rec.at("id").get<int>();
            v.source = parse_source(rec.at("source").get<std::string>());
            v.payload_format = parse_format(rec.at("payload_format").get<std::string>());
            v.template_text = rec.at("template").get<std::string>();
            v.description = rec.value("description", std::string{});
            check_vector(v);
        } catch (const json::exception& e) {
            throw ParseError(source_name, lineno, e.what());
        } catch (const PlaceholderError& e) {
            throw PlaceholderError(source_name + ":" + std::to_string(lineno) + ": " + e.what());
        } catch (const ParseError&) {
            throw;
        } catch (const ValidationError& e) {
            throw ParseError(source_name, lineno, e.what());
        }
        auto [it, fresh] = first_line.emplace(v.id, lineno);
        if (!fresh) {
            throw DuplicateIdError(source_name + ":" + std::to_string(lineno) + ": duplicate vector id " +
                                   std::to_string(v.id) + " (first seen on line " + std::to_string(it->second) + ")");
        }
        vectors.push_back(std::move(v));
    }
    return Corpus(std::move(vectors), std::move(contexts), std::move(encodings));
}

Corpus load_corpus(const std::filesystem::path& path, std::vector<WebContext> contexts,
                   std::vector<Encoding> encodings) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open corpus file " + path.string());
    return parse_corpus(in, path.string(), std::move(contexts), std::move(encodings));
}

void write_corpus(std::ostream& out, const Corpus& corpus) {
    for (const auto& v : corpus.vectors()) {
        json rec = {{"id", v.id},
                    {"source", std::string(to_string(v.source))},
                    {"payload_format", std::string(to_string(v.payload_format))},
                    {"template", v.template_text},
                    {"description", v.description}};
        out << rec.dump() << '\n';
    }
}

std::vector<TestCase> expand_test_cases(const Corpus& corpus) {
    std::vector<TestCase> cases;
    cases.reserve(corpus.vectors().size() * corpus.contexts().size() * corpus.encodings().size());
    for (const auto& v : corpus.vectors()) {
        for (const auto& c : corpus.contexts()) {
            for (const auto& e : corpus.encodings()) cases.push_back({v.id, c.id, e.id});
        }
    }
    return cases;
}

RenderedPage render_test_page(const TestCase& tc, const Corpus& corpus, std::string_view payload) {
    const auto* vector = corpus.find_vector(tc.vector_id);
    const auto* context = corpus.find_context(tc.context_id);
    const auto* encoding = corpus.find_encoding(tc.encoding_id);
    if (!vector || !context || !encoding) throw NotFound("unknown test case " + tc.attribute_name());

    const std::string& tpl = vector->template_text;
    auto pos = tpl.find(kPayloadPlaceholder);
    if (pos == std::string::npos) throw PlaceholderError("vector " + std::to_string(vector->id) + " has no placeholder");

    RenderedPage page;
    page.html.reserve(context->doctype_preamble.size() + tpl.size() + payload.size());
    page.html.append(context->doctype_preamble);
    page.html.append(tpl, 0, pos);
    page.html.append(payload);
    page.html.append(tpl, pos + kPayloadPlaceholder.size());
    page.mime_type = context->mime_type;
    page.charset = encoding->charset;
    return page;
}

std::string base64_encode(std::string_view bytes) {
    static constexpr char kAlphabet[] = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
    std::string out;
    out.reserve((bytes.size() + 2) / 3 * 4);
    std::size_t i = 0;
    for (; i + 2 < bytes.size(); i += 3) {
        auto n = (static_cast<unsigned char>(bytes[i]) << 16) | (static_cast<unsigned char>(bytes[i + 1]) << 8) |
                 static_cast<unsigned char>(bytes[i + 2]);
        out += kAlphabet[(n >> 18) & 63];
        out += kAlphabet[(n >> 12) & 63];
        out += kAlphabet[(n >> 6) & 63];
        out += kAlphabet[n & 63];
    }
    if (std::size_t rest = bytes.size() - i; rest > 0) {
        unsigned n = static_cast<unsigned char>(bytes[i]) << 16;
        if (rest == 2) n |= static_cast<unsigned char>(bytes[i + 1]) << 8;
        out += kAlphabet[(n >> 18) & 63];
        out += kAlphabet[(n >> 12) & 63];
        out += rest == 2 ? kAlphabet[(n >> 6) & 63] : '=';
        out += '=';
    }
    return out;
}

}  // namespace quirkprint
