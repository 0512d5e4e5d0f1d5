#pragma once

#include <chrono>
#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "quirkprint/outcome.hpp"

namespace quirkprint {

enum class Family : std::uint8_t { Android, Chrome, Firefox, IE, Opera, Safari, Other };

inline constexpr Family kAllFamilies[] = {Family::Android, Family::Chrome, Family::Firefox, Family::IE,
                                          Family::Opera,   Family::Safari, Family::Other};
inline constexpr std::size_t kFamilyCount = std::size(kAllFamilies);

std::string_view to_string(Family f) noexcept;
// Case-insensitive; also accepts "Internet Explorer".
std::optional<Family> family_from_string(std::string_view s) noexcept;

using Date = std::chrono::year_month_day;

// ISO-8601 calendar date, YYYY-MM-DD.
std::optional<Date> parse_date(std::string_view s);
std::string format_date(const Date& d);

// Ordered, duplicate-free list of test-case attribute names with O(1) lookup.
class AttributeSchema {
public:
    explicit AttributeSchema(std::vector<std::string> names);

    const std::vector<std::string>& names() const noexcept { return names_; }
    std::size_t size() const noexcept { return names_.size(); }
    const std::string& operator[](std::size_t i) const { return names_[i]; }
    std::optional<std::size_t> find(std::string_view name) const;

    friend bool operator==(const AttributeSchema& a, const AttributeSchema& b) { return a.names_ == b.names_; }

private:
    std::vector<std::string> names_;
    std::unordered_map<std::string, std::size_t> index_;
};

using Schema = std::shared_ptr<const AttributeSchema>;

Schema make_schema(std::vector<std::string> names);
// Schema named "1".."n"; handy for hand-written signatures.
Schema numbered_schema(std::size_t n);
bool same_schema(const Schema& a, const Schema& b) noexcept;

// Exact non-negative ratio.
struct Fraction {
    std::size_t num = 0;
    std::size_t den = 1;

    double value() const noexcept { return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den); }

    friend bool operator==(const Fraction& a, const Fraction& b) noexcept { return a.num * b.den == b.num * a.den; }
};

struct BrowserSignature {
    Schema attributes;
    std::vector<Outcome> outcomes;
    std::string label;
    std::optional<Family> family;
    std::optional<Date> release_date;

    std::size_t size() const noexcept { return outcomes.size(); }
    // Throws NotFound when the attribute is not part of the schema.
    Outcome at(std::string_view attribute) const;
    std::size_t count(Outcome o) const noexcept;
};

// Parses compact notation such as "pns" or "p,n,s".
std::vector<Outcome> parse_outcomes(std::string_view compact);
std::string compact_string(std::span<const Outcome> outcomes);

// Signature over numbered_schema(n) from compact notation.
BrowserSignature make_signature(std::string_view compact, std::string label = {},
                                std::optional<Family> family = std::nullopt);
BrowserSignature make_signature(Schema schema, std::vector<Outcome> outcomes, std::string label = {},
                                std::optional<Family> family = std::nullopt);

// Share of non-NA outcomes: (#PASS + #SENT) / total. Throws ValidationError on an empty signature.
Fraction confidence(const BrowserSignature& sig);

class SignatureDataset {
public:
    SignatureDataset() : attributes_(make_schema({})) {}
    explicit SignatureDataset(Schema attributes) : attributes_(std::move(attributes)) {}

    // Throws SchemaMismatch unless sig shares this dataset's attribute list.
    void add(BrowserSignature sig);

    const Schema& attributes() const noexcept { return attributes_; }
    const std::vector<BrowserSignature>& signatures() const noexcept { return signatures_; }
    const BrowserSignature& operator[](std::size_t i) const { return signatures_[i]; }
    std::size_t size() const noexcept { return signatures_.size(); }
    bool empty() const noexcept { return signatures_.empty(); }

    auto begin() const noexcept { return signatures_.begin(); }
    auto end() const noexcept { return signatures_.end(); }

private:
    Schema attributes_;
    std::vector<BrowserSignature> signatures_;
};

bool operator==(const BrowserSignature& a, const BrowserSignature& b);
bool operator==(const SignatureDataset& a, const SignatureDataset& b);

}  // namespace quirkprint
