#include "quirkprint/sim_agent.hpp"

#include <charconv>

#include <httplib.h>

#include "quirkprint/dataset_io.hpp"
#include "quirkprint/error.hpp"

namespace quirkprint {

Outcome expected_outcome(Behavior b) noexcept {
    switch (b) {
        case Behavior::Executes: return Outcome::Pass;
        case Behavior::ParsesOnly: return Outcome::Sent;
        case Behavior::Skips: return Outcome::NA;
    }
    return Outcome::NA;
}

Behavior behavior_for(Outcome o) noexcept {
    switch (o) {
        case Outcome::Pass: return Behavior::Executes;
        case Outcome::Sent: return Behavior::ParsesOnly;
        case Outcome::NA: return Behavior::Skips;
    }
    return Behavior::Skips;
}

QuirkProfile profile_from_signature(const BrowserSignature& sig) {
    QuirkProfile p{sig.label, sig.label, {}};
    for (std::size_t i = 0; i < sig.size(); ++i) p.behavior.emplace((*sig.attributes)[i], behavior_for(sig.outcomes[i]));
    return p;
}

std::vector<QuirkProfile> load_profiles(const std::filesystem::path& path) {
    auto imported = import_signatures(path, 0.0);
    std::vector<QuirkProfile> out;
    for (const auto& sig : imported.dataset) out.push_back(profile_from_signature(sig));
    return out;
}

std::vector<Outcome> expected_outcomes(const QuirkProfile& profile, const AttributeSchema& attributes) {
    std::vector<Outcome> out;
    out.reserve(attributes.size());
    for (const auto& name : attributes.names()) {
        auto it = profile.behavior.find(name);
        if (it == profile.behavior.end()) {
            throw ValidationError("profile '" + profile.label + "' does not cover test case " + name);
        }
        out.push_back(expected_outcome(it->second));
    }
    return out;
}

Endpoint parse_endpoint(std::string_view s) {
    if (s.starts_with("http://")) s.remove_prefix(7);
    while (!s.empty() && s.back() == '/') s.remove_suffix(1);
    Endpoint ep;
    auto colon = s.rfind(':');
    if (colon == std::string_view::npos) throw ValidationError("endpoint needs a port: '" + std::string(s) + "'");
    if (colon > 0) ep.host = std::string(s.substr(0, colon));
    auto port = s.substr(colon + 1);
    auto [p, ec] = std::from_chars(port.data(), port.data() + port.size(), ep.port);
    if (ec != std::errc() || p != port.data() + port.size()) throw ValidationError("bad port in '" + std::string(s) + "'");
    return ep;
}

namespace {

class Agent {
public:
    Agent(const Endpoint& server, const AgentOptions& options, std::string ua)
        : client_(server.host, server.port), options_(options) {
        auto secs = std::chrono::duration_cast<std::chrono::seconds>(options.timeout);
        auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(options.timeout - secs);
        client_.set_connection_timeout(secs.count(), usecs.count());
        client_.set_read_timeout(secs.count(), usecs.count());
        client_.set_follow_location(false);
        headers_.emplace("User-Agent", std::move(ua));
    }

    httplib::Result get(const std::string& path, const httplib::Headers& extra = {}) {
        auto h = headers_;
        h.insert(extra.begin(), extra.end());
        auto res = client_.Get(path, h);
        if (!res) throw ProtocolError("GET " + path + ": " + httplib::to_string(res.error()));
        return res;
    }

    httplib::Result post(const std::string& path) {
        auto res = client_.Post(path, headers_, "", "text/plain");
        if (!res) throw ProtocolError("POST " + path + ": " + httplib::to_string(res.error()));
        return res;
    }

    static void expect(const httplib::Result& res, int status, const std::string& what) {
        if (res->status != status) {
            throw ProtocolError(what + ": expected HTTP " + std::to_string(status) + ", got " +
                                std::to_string(res->status));
        }
    }

    const AgentOptions& options() const { return options_; }

private:
    httplib::Client client_;
    httplib::Headers headers_;
    AgentOptions options_;
};

std::vector<std::string> split_lines(const std::string& body) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (start < body.size()) {
        auto nl = body.find('\n', start);
        if (nl == std::string::npos) nl = body.size();
        if (nl > start) out.push_back(body.substr(start, nl - start));
        start = nl + 1;
    }
    return out;
}

std::optional<std::size_t> index_from_test_path(std::string_view location, std::string_view token) {
    const std::string prefix = "/t/" + std::string(token) + "/";
    if (!location.starts_with(prefix)) return std::nullopt;
    location.remove_prefix(prefix.size());
    std::size_t idx = 0;
    auto [p, ec] = std::from_chars(location.data(), location.data() + location.size(), idx);
    if (ec != std::errc() || p != location.data() + location.size()) return std::nullopt;
    return idx;
}

}  // namespace

BrowserSignature replay(const QuirkProfile& profile, const Endpoint& server, const AgentOptions& options) {
    Agent agent(server, options, profile.ua_string);

    auto cases = agent.get("/cases");
    Agent::expect(cases, 200, "GET /cases");
    const auto names = split_lines(cases->body);
    std::vector<Behavior> plan;
    plan.reserve(names.size());
    for (const auto& name : names) {
        auto it = profile.behavior.find(name);
        if (it == profile.behavior.end()) {
            throw ValidationError("profile '" + profile.label + "' does not cover test case " + name);
        }
        plan.push_back(it->second);
    }

    auto created = agent.post("/session");
    Agent::expect(created, 201, "POST /session");
    const std::string token = created->body;
    const std::string done = done_path(token);

    std::string location = created->get_header_value("Location");
    if (names.empty()) location = done;
    httplib::Headers pending_cookie;
    std::size_t steps = 0;
    while (location != done) {
        auto idx = index_from_test_path(location, token);
        if (!idx || *idx >= plan.size()) throw ProtocolError("unexpected redirect target '" + location + "'");
        if (++steps > plan.size()) throw ProtocolError("redirect chain longer than the test suite");

        Behavior b = plan[*idx];
        if (b != Behavior::Skips) {
            auto page = agent.get(location);
            Agent::expect(page, 200, "GET " + location);
        }
        if (b == Behavior::Executes) {
            if (options.mechanism == CallbackMechanism::Cookie) {
                pending_cookie = {{"Cookie", validation_cookie_name(token, *idx) + "=1"}};
            } else {
                auto v = agent.get(validation_path(token, *idx, options.mechanism));
                Agent::expect(v, 200, "validation callback");
            }
        }

        auto next = agent.get(next_path(token), pending_cookie);
        pending_cookie.clear();
        Agent::expect(next, 302, "GET " + next_path(token));
        location = next->get_header_value("Location");
    }

    auto finished = agent.get(done);
    Agent::expect(finished, 200, "GET " + done);
    auto sig = agent.get("/sig/" + token);
    Agent::expect(sig, 200, "GET /sig");
    auto imported = parse_signatures(sig->body, 0.0, "/sig/" + token);
    if (imported.dataset.size() != 1) throw ProtocolError("signature response must hold exactly one row");
    return imported.dataset[0];
}

}  // namespace quirkprint
