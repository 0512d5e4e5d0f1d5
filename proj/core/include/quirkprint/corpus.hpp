#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace quirkprint {

enum class VectorSource { RSnake, Html5Sec, Shazzer };
inline constexpr std::size_t kVectorSourceCount = 3;

// How the vector expects its payload: raw script, base64 text, or a URL to a script file.
enum class PayloadFormat { Identity, Base64, ExternalJsUrl };

std::string_view to_string(VectorSource s) noexcept;
std::string_view to_string(PayloadFormat f) noexcept;

inline constexpr std::string_view kPayloadPlaceholder = "{{PAYLOAD}}";

struct QuirkVector {
    int id = 0;
    VectorSource source = VectorSource::RSnake;
    PayloadFormat payload_format = PayloadFormat::Identity;
    std::string template_text;
    std::string description;
};

struct WebContext {
    int id = 0;
    std::string name;
    std::string doctype_preamble;
    std::string mime_type;
};

struct Encoding {
    int id = 0;
    std::string charset;
};

// quirks (no doctype) and html5, both text/html.
std::vector<WebContext> default_contexts();
// utf-8 only.
std::vector<Encoding> default_encodings();

// One (vector, context, encoding) triple. Its attribute name is "V-C-E", e.g. "90-2-1".
struct TestCase {
    int vector_id = 0;
    int context_id = 0;
    int encoding_id = 0;

    std::string attribute_name() const;
    // Throws ValidationError on anything but three dash-separated positive integers.
    static TestCase parse(std::string_view attribute_name);

    friend bool operator==(const TestCase&, const TestCase&) = default;
};

// Immutable after construction; the constructor validates every invariant.
class Corpus {
public:
    Corpus(std::vector<QuirkVector> vectors, std::vector<WebContext> contexts = default_contexts(),
           std::vector<Encoding> encodings = default_encodings());

    const std::vector<QuirkVector>& vectors() const noexcept { return vectors_; }
    const std::vector<WebContext>& contexts() const noexcept { return contexts_; }
    const std::vector<Encoding>& encodings() const noexcept { return encodings_; }

    const QuirkVector* find_vector(int id) const;
    const WebContext* find_context(int id) const;
    const Encoding* find_encoding(int id) const;

    std::size_t count(VectorSource s) const noexcept { return per_source_[static_cast<std::size_t>(s)]; }
    std::size_t size() const noexcept { return vectors_.size(); }

private:
    std::vector<QuirkVector> vectors_;
    std::vector<WebContext> contexts_;
    std::vector<Encoding> encodings_;
    std::unordered_map<int, std::size_t> vector_index_;
    std::array<std::size_t, kVectorSourceCount> per_source_{};
};

// One JSON object per line with keys id, source, payload_format, template, description.
// Blank lines and lines starting with '#' are skipped.
Corpus parse_corpus(std::istream& in, const std::string& source_name = "<corpus>",
                    std::vector<WebContext> contexts = default_contexts(),
                    std::vector<Encoding> encodings = default_encodings());
Corpus load_corpus(const std::filesystem::path& path, std::vector<WebContext> contexts = default_contexts(),
                   std::vector<Encoding> encodings = default_encodings());
void write_corpus(std::ostream& out, const Corpus& corpus);

// Vector-major, then context, then encoding.
std::vector<TestCase> expand_test_cases(const Corpus& corpus);

struct RenderedPage {
    std::string html;
    std::string mime_type;
    std::string charset;
};

// Context preamble followed by the vector template with the placeholder replaced by `payload`,
// which must already be encoded for the vector's payload format.
RenderedPage render_test_page(const TestCase& tc, const Corpus& corpus, std::string_view payload);

std::string base64_encode(std::string_view bytes);

}  // namespace quirkprint
