#include "quirkprint/driver.hpp"

#include <cstdio>
#include <fstream>
#include <mutex>

#include <nlohmann/json.hpp>

#include "quirkprint/error.hpp"

namespace quirkprint {

using nlohmann::json;

std::string_view to_string(CallbackMechanism m) noexcept {
    switch (m) {
        case CallbackMechanism::LocationRedirect: return "location_redirect";
        case CallbackMechanism::Cookie: return "cookie";
        case CallbackMechanism::Xhr: return "xhr";
        case CallbackMechanism::ImgBeacon: return "img_beacon";
    }
    return "?";
}

std::optional<CallbackMechanism> mechanism_from_string(std::string_view s) noexcept {
    for (auto m : kAllMechanisms) {
        if (s == to_string(m)) return m;
    }
    return std::nullopt;
}

std::string_view to_string(TestState s) noexcept {
    switch (s) {
        case TestState::Unserved: return "UNSERVED";
        case TestState::Sent: return "SENT";
        case TestState::Pass: return "PASS";
    }
    return "?";
}

std::string_view to_string(EventKind k) noexcept {
    switch (k) {
        case EventKind::Created: return "created";
        case EventKind::Served: return "served";
        case EventKind::Passed: return "passed";
        case EventKind::DuplicateCallback: return "duplicate_callback";
        case EventKind::Anomaly: return "anomaly";
        case EventKind::Advanced: return "advanced";
        case EventKind::Finalized: return "finalized";
    }
    return "?";
}

std::string event_to_json(const SessionEvent& e) {
    json j = {{"seq", e.seq}, {"unix_ms", e.unix_ms}, {"kind", std::string(to_string(e.kind))}};
    if (e.test_index) j["test"] = *e.test_index;
    if (e.mechanism) j["mechanism"] = std::string(to_string(*e.mechanism));
    if (!e.detail.empty()) j["detail"] = e.detail;
    return j.dump();
}

SessionEvent event_from_json(std::string_view line) {
    try {
        json j = json::parse(line);
        SessionEvent e;
        e.seq = j.at("seq").get<std::uint64_t>();
        e.unix_ms = j.at("unix_ms").get<std::int64_t>();
        auto kind = j.at("kind").get<std::string>();
        bool known = false;
        for (auto k : {EventKind::Created, EventKind::Served, EventKind::Passed, EventKind::DuplicateCallback,
                       EventKind::Anomaly, EventKind::Advanced, EventKind::Finalized}) {
            if (kind == to_string(k)) {
                e.kind = k;
                known = true;
            }
        }
        if (!known) throw ValidationError("unknown event kind '" + kind + "'");
        if (j.contains("test")) e.test_index = j["test"].get<std::size_t>();
        if (j.contains("mechanism")) {
            e.mechanism = mechanism_from_string(j["mechanism"].get<std::string>());
            if (!e.mechanism) throw ValidationError("unknown mechanism in event log");
        }
        e.detail = j.value("detail", std::string{});
        return e;
    } catch (const json::exception& ex) {
        throw ValidationError(std::string("bad event record: ") + ex.what());
    }
}

bool pass_follows_sent(std::span<const SessionEvent> events) {
    std::unordered_map<std::size_t, bool> served;
    for (const auto& e : events) {
        if (!e.test_index) continue;
        if (e.kind == EventKind::Served) served[*e.test_index] = true;
        if (e.kind == EventKind::Passed && !served[*e.test_index]) return false;
    }
    return true;
}

std::string test_path(std::string_view token, std::size_t index) {
    return "/t/" + std::string(token) + "/" + std::to_string(index);
}

std::string validation_path(std::string_view token, std::size_t index, CallbackMechanism m) {
    return "/v/" + std::string(token) + "/" + std::to_string(index) + "/" + std::string(to_string(m));
}

std::string next_path(std::string_view token) { return "/n/" + std::string(token); }
std::string done_path(std::string_view token) { return "/done/" + std::string(token); }

std::string script_path(std::string_view token, std::size_t index) {
    return "/js/" + std::string(token) + "/" + std::to_string(index);
}

std::string validation_cookie_name(std::string_view token, std::size_t index) {
    return "qpv_" + std::string(token) + "_" + std::to_string(index);
}

struct TestDriver::Session {
    std::string token;
    std::string ua;
    std::vector<TestState> states;
    std::size_t cursor = 0;
    std::int64_t created_ms = 0;
    std::int64_t finalized_ms = 0;
    std::optional<BrowserSignature> signature;
    std::vector<SessionEvent> events;
    std::ofstream log;

    mutable std::mutex mutex;

    void append(EventKind kind, std::optional<std::size_t> index = std::nullopt,
                std::optional<CallbackMechanism> mechanism = std::nullopt, std::string detail = {}) {
        SessionEvent e{events.size(), now_ms(), kind, index, mechanism, std::move(detail)};
        if (log.is_open()) {
            log << event_to_json(e) << '\n';
            log.flush();
        }
        events.push_back(std::move(e));
    }

    static std::int64_t now_ms() {
        using namespace std::chrono;
        return duration_cast<milliseconds>(system_clock::now().time_since_epoch()).count();
    }
};

namespace {

std::vector<std::string> attribute_names(const std::vector<TestCase>& cases) {
    std::vector<std::string> names;
    names.reserve(cases.size());
    for (const auto& tc : cases) names.push_back(tc.attribute_name());
    return names;
}

}  // namespace

TestDriver::TestDriver(Corpus corpus, DriverOptions options)
    : corpus_(std::move(corpus)),
      cases_(expand_test_cases(corpus_)),
      attributes_(make_schema(attribute_names(cases_))),
      options_(std::move(options)),
      rng_(std::random_device{}()) {
    if (options_.event_log_dir) std::filesystem::create_directories(*options_.event_log_dir);
}

TestDriver::~TestDriver() = default;

std::string TestDriver::new_token() {
    std::lock_guard lock(rng_mutex_);
    char buf[33];
    std::snprintf(buf, sizeof buf, "%016llx%016llx", static_cast<unsigned long long>(rng_()),
                  static_cast<unsigned long long>(rng_()));
    return buf;
}

std::string TestDriver::create_session(std::string ua_string) {
    auto s = std::make_shared<Session>();
    s->ua = std::move(ua_string);
    s->states.assign(cases_.size(), TestState::Unserved);
    s->created_ms = Session::now_ms();

    std::unique_lock lock(sessions_mutex_);
    do {
        s->token = new_token();
    } while (sessions_.contains(s->token));
    if (options_.event_log_dir) {
        s->log.open(*options_.event_log_dir / (s->token + ".jsonl"), std::ios::app);
        if (!s->log) throw Error("cannot open event log for session " + s->token);
    }
    s->append(EventKind::Created, std::nullopt, std::nullopt, s->ua);
    sessions_.emplace(s->token, s);
    return s->token;
}

std::shared_ptr<TestDriver::Session> TestDriver::find(const std::string& token) const {
    std::shared_lock lock(sessions_mutex_);
    auto it = sessions_.find(token);
    if (it == sessions_.end()) throw NotFound("unknown session '" + token + "'");
    return it->second;
}

void TestDriver::check_index(std::size_t index) const {
    if (index >= cases_.size()) {
        throw NotFound("test index " + std::to_string(index) + " out of range (" + std::to_string(cases_.size()) +
                       " test cases)");
    }
}

RenderedPage TestDriver::serve_test(const std::string& token, std::size_t index) {
    auto s = find(token);
    check_index(index);
    auto page = render_test_page(cases_[index], corpus_, encoded_payload(token, index));

    std::lock_guard lock(s->mutex);
    if (!s->signature) {
        if (s->states[index] == TestState::Unserved) s->states[index] = TestState::Sent;
        s->cursor = std::max(s->cursor, index);
        s->append(EventKind::Served, index);
    }
    return page;
}

CallbackResult TestDriver::record_pass(const std::string& token, std::size_t index, CallbackMechanism mechanism) {
    auto s = find(token);
    check_index(index);

    std::lock_guard lock(s->mutex);
    if (s->signature) return CallbackResult::SessionClosed;
    switch (s->states[index]) {
        case TestState::Unserved:
            s->append(EventKind::Anomaly, index, mechanism, "callback for a test that was never served");
            return CallbackResult::Anomaly;
        case TestState::Sent:
            s->states[index] = TestState::Pass;
            s->append(EventKind::Passed, index, mechanism);
            return CallbackResult::Recorded;
        case TestState::Pass:
            s->append(EventKind::DuplicateCallback, index, mechanism);
            return CallbackResult::AlreadyPassed;
    }
    return CallbackResult::Anomaly;
}

NextStep TestDriver::next(const std::string& token) {
    auto s = find(token);
    std::lock_guard lock(s->mutex);
    if (s->cursor < cases_.size()) ++s->cursor;
    if (!s->signature) s->append(EventKind::Advanced, s->cursor);
    if (s->cursor >= cases_.size()) return {true, 0};
    return {false, s->cursor};
}

BrowserSignature TestDriver::finalize(const std::string& token) {
    auto s = find(token);
    std::lock_guard lock(s->mutex);
    if (s->signature) return *s->signature;

    BrowserSignature sig;
    sig.attributes = attributes_;
    sig.label = s->ua;
    sig.outcomes.reserve(s->states.size());
    for (auto st : s->states) {
        switch (st) {
            case TestState::Pass: sig.outcomes.push_back(Outcome::Pass); break;
            case TestState::Sent: sig.outcomes.push_back(Outcome::Sent); break;
            case TestState::Unserved: sig.outcomes.push_back(Outcome::NA); break;
        }
    }
    s->finalized_ms = Session::now_ms();
    s->append(EventKind::Finalized, std::nullopt, std::nullopt, compact_string(sig.outcomes));
    s->signature = sig;
    return sig;
}

std::optional<BrowserSignature> TestDriver::signature(const std::string& token) const {
    auto s = find(token);
    std::lock_guard lock(s->mutex);
    return s->signature;
}

TestState TestDriver::state(const std::string& token, std::size_t index) const {
    auto s = find(token);
    check_index(index);
    std::lock_guard lock(s->mutex);
    return s->states[index];
}

std::size_t TestDriver::cursor(const std::string& token) const {
    auto s = find(token);
    std::lock_guard lock(s->mutex);
    return s->cursor;
}

std::string TestDriver::ua_string(const std::string& token) const {
    auto s = find(token);
    std::lock_guard lock(s->mutex);
    return s->ua;
}

std::vector<SessionEvent> TestDriver::events(const std::string& token) const {
    auto s = find(token);
    std::lock_guard lock(s->mutex);
    return s->events;
}

std::vector<std::string> TestDriver::tokens() const {
    std::shared_lock lock(sessions_mutex_);
    std::vector<std::string> out;
    out.reserve(sessions_.size());
    for (const auto& [token, _] : sessions_) out.push_back(token);
    return out;
}

// Single quotes only: payloads are spliced into double-quoted attributes.
std::string TestDriver::payload_script(const std::string& token, std::size_t index) const {
    auto url = [&](CallbackMechanism m) { return "'" + validation_path(token, index, m) + "'"; };
    std::string js = "(function(){";
    js += "try{window.location=" + url(CallbackMechanism::LocationRedirect) + ";}catch(e){}";
    js += "try{document.cookie='" + validation_cookie_name(token, index) + "=1; path=/';}catch(e){}";
    js += "try{var x=new XMLHttpRequest();x.open('GET'," + url(CallbackMechanism::Xhr) + ",true);x.send();}catch(e){}";
    js += "try{var i=new Image();i.src=" + url(CallbackMechanism::ImgBeacon) +
          ";(document.body||document.documentElement).appendChild(i);}catch(e){}";
    js += "})();";
    return js;
}

std::string TestDriver::encoded_payload(const std::string& token, std::size_t index) const {
    check_index(index);
    const auto* vector = corpus_.find_vector(cases_[index].vector_id);
    switch (vector->payload_format) {
        case PayloadFormat::Identity: return payload_script(token, index);
        case PayloadFormat::Base64: return base64_encode(payload_script(token, index));
        case PayloadFormat::ExternalJsUrl: return script_path(token, index);
    }
    return payload_script(token, index);
}

}  // namespace quirkprint
