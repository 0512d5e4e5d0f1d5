#pragma once

#include <chrono>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "quirkprint/driver.hpp"
#include "quirkprint/signature.hpp"

namespace quirkprint {

// What a simulated browser does with one test page.
enum class Behavior {
    Executes,    // fetch the page, then fire a callback -> PASS
    ParsesOnly,  // fetch the page only                 -> SENT
    Skips,       // never fetch it                      -> NA
};

Outcome expected_outcome(Behavior b) noexcept;
Behavior behavior_for(Outcome o) noexcept;

struct QuirkProfile {
    std::string label;
    std::string ua_string;
    std::map<std::string, Behavior, std::less<>> behavior;
};

// P/S/N cells read as executes/parses_only/skips; the browser column is both label and UA.
QuirkProfile profile_from_signature(const BrowserSignature& sig);
std::vector<QuirkProfile> load_profiles(const std::filesystem::path& path);

// The signature a faithful replay must produce, computed without any HTTP.
// Throws ValidationError if the profile does not cover every attribute.
std::vector<Outcome> expected_outcomes(const QuirkProfile& profile, const AttributeSchema& attributes);

struct Endpoint {
    std::string host = "127.0.0.1";
    int port = 8080;
};

// "http://host:port", "host:port" or ":port".
Endpoint parse_endpoint(std::string_view s);

struct AgentOptions {
    CallbackMechanism mechanism = CallbackMechanism::ImgBeacon;
    std::chrono::milliseconds timeout{5000};
};

// Walks the server's redirect chain as the profile dictates and returns the finalized
// signature fetched from the server. Throws ProtocolError on unexpected responses.
BrowserSignature replay(const QuirkProfile& profile, const Endpoint& server, const AgentOptions& options = {});

}  // namespace quirkprint
