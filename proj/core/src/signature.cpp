#include "quirkprint/signature.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>

#include "quirkprint/error.hpp"

namespace quirkprint {

namespace {

char lower(char c) { return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c; }

bool iequals(std::string_view a, std::string_view b) {
    return a.size() == b.size() &&
           std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) { return lower(x) == lower(y); });
}

template <typename T>
bool parse_int(std::string_view s, T& out) {
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc() && p == s.data() + s.size();
}

}  // namespace

std::string_view to_string(Family f) noexcept {
    switch (f) {
        case Family::Android: return "Android";
        case Family::Chrome: return "Chrome";
        case Family::Firefox: return "Firefox";
        case Family::IE: return "IE";
        case Family::Opera: return "Opera";
        case Family::Safari: return "Safari";
        case Family::Other: return "other";
    }
    return "other";
}

std::optional<Family> family_from_string(std::string_view s) noexcept {
    for (Family f : kAllFamilies) {
        if (iequals(s, to_string(f))) return f;
    }
    if (iequals(s, "Internet Explorer")) return Family::IE;
    return std::nullopt;
}

std::optional<Date> parse_date(std::string_view s) {
    if (s.size() != 10 || s[4] != '-' || s[7] != '-') return std::nullopt;
    int y = 0;
    unsigned m = 0, d = 0;
    if (!parse_int(s.substr(0, 4), y) || !parse_int(s.substr(5, 2), m) || !parse_int(s.substr(8, 2), d)) {
        return std::nullopt;
    }
    Date date{std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}};
    if (!date.ok()) return std::nullopt;
    return date;
}

std::string format_date(const Date& d) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(d.year()), static_cast<unsigned>(d.month()),
                  static_cast<unsigned>(d.day()));
    return buf;
}

AttributeSchema::AttributeSchema(std::vector<std::string> names) : names_(std::move(names)) {
    index_.reserve(names_.size());
    for (std::size_t i = 0; i < names_.size(); ++i) {
        if (!index_.emplace(names_[i], i).second) {
            throw ValidationError("duplicate attribute name '" + names_[i] + "'");
        }
    }
}

std::optional<std::size_t> AttributeSchema::find(std::string_view name) const {
    auto it = index_.find(std::string(name));
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

Schema make_schema(std::vector<std::string> names) {
    return std::make_shared<const AttributeSchema>(std::move(names));
}

Schema numbered_schema(std::size_t n) {
    std::vector<std::string> names;
    names.reserve(n);
    for (std::size_t i = 1; i <= n; ++i) names.push_back(std::to_string(i));
    return make_schema(std::move(names));
}

bool same_schema(const Schema& a, const Schema& b) noexcept {
    if (a == b) return true;
    if (!a || !b) return false;
    return *a == *b;
}

Outcome BrowserSignature::at(std::string_view attribute) const {
    auto i = attributes ? attributes->find(attribute) : std::nullopt;
    if (!i) throw NotFound("signature '" + label + "' has no attribute '" + std::string(attribute) + "'");
    return outcomes[*i];
}

std::size_t BrowserSignature::count(Outcome o) const noexcept {
    return static_cast<std::size_t>(std::count(outcomes.begin(), outcomes.end(), o));
}

std::vector<Outcome> parse_outcomes(std::string_view compact) {
    std::vector<Outcome> out;
    out.reserve(compact.size());
    for (char c : compact) {
        if (c == ',' || c == ' ') continue;
        auto o = outcome_from_char(c);
        if (!o) throw ValidationError(std::string("invalid outcome character '") + c + "'");
        out.push_back(*o);
    }
    return out;
}

std::string compact_string(std::span<const Outcome> outcomes) {
    std::string s;
    s.reserve(outcomes.size());
    for (Outcome o : outcomes) s.push_back(to_char(o));
    return s;
}

BrowserSignature make_signature(std::string_view compact, std::string label, std::optional<Family> family) {
    auto outcomes = parse_outcomes(compact);
    auto schema = numbered_schema(outcomes.size());
    return make_signature(std::move(schema), std::move(outcomes), std::move(label), family);
}

BrowserSignature make_signature(Schema schema, std::vector<Outcome> outcomes, std::string label,
                                std::optional<Family> family) {
    if (!schema || schema->size() != outcomes.size()) {
        throw SchemaMismatch("outcome count does not match the attribute list");
    }
    return BrowserSignature{std::move(schema), std::move(outcomes), std::move(label), family, std::nullopt};
}

Fraction confidence(const BrowserSignature& sig) {
    if (sig.outcomes.empty()) throw ValidationError("confidence of an empty signature");
    return Fraction{sig.outcomes.size() - sig.count(Outcome::NA), sig.outcomes.size()};
}

void SignatureDataset::add(BrowserSignature sig) {
    if (!same_schema(sig.attributes, attributes_) || sig.outcomes.size() != attributes_->size()) {
        throw SchemaMismatch("signature '" + sig.label + "' does not share the dataset attribute list");
    }
    sig.attributes = attributes_;
    signatures_.push_back(std::move(sig));
}

bool operator==(const BrowserSignature& a, const BrowserSignature& b) {
    return same_schema(a.attributes, b.attributes) && a.outcomes == b.outcomes && a.label == b.label &&
           a.family == b.family && a.release_date == b.release_date;
}

bool operator==(const SignatureDataset& a, const SignatureDataset& b) {
    return same_schema(a.attributes(), b.attributes()) && a.signatures() == b.signatures();
}

}  // namespace quirkprint
