#pragma once

#include <cstdint>
#include <optional>
#include <string_view>

namespace quirkprint {

// Result of one test case for one browser.
//   Sent: the page was served but the payload never called back.
//   Pass: the payload executed and validated.
//   NA:   the test was never served.
enum class Outcome : std::uint8_t { Sent, Pass, NA };

inline constexpr Outcome kAllOutcomes[] = {Outcome::Pass, Outcome::Sent, Outcome::NA};

// Lowercase signature alphabet: s, p, n.
constexpr char to_char(Outcome o) noexcept {
    switch (o) {
        case Outcome::Sent: return 's';
        case Outcome::Pass: return 'p';
        case Outcome::NA: return 'n';
    }
    return '?';
}

// Uppercase file alphabet: S, P, N.
constexpr char to_file_char(Outcome o) noexcept {
    return static_cast<char>(to_char(o) - 'a' + 'A');
}

constexpr std::string_view to_string(Outcome o) noexcept {
    switch (o) {
        case Outcome::Sent: return "SENT";
        case Outcome::Pass: return "PASS";
        case Outcome::NA: return "NA";
    }
    return "?";
}

// Accepts s/p/n in either case. Anything else is rejected, never coerced.
constexpr std::optional<Outcome> outcome_from_char(char c) noexcept {
    switch (c) {
        case 's': case 'S': return Outcome::Sent;
        case 'p': case 'P': return Outcome::Pass;
        case 'n': case 'N': return Outcome::NA;
        default: return std::nullopt;
    }
}

constexpr std::optional<Outcome> outcome_from_string(std::string_view s) noexcept {
    if (s.size() == 1) return outcome_from_char(s.front());
    if (s == "SENT") return Outcome::Sent;
    if (s == "PASS") return Outcome::Pass;
    if (s == "NA") return Outcome::NA;
    return std::nullopt;
}

}  // namespace quirkprint
