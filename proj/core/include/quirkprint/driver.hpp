#pragma once

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <shared_mutex>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "quirkprint/corpus.hpp"
#include "quirkprint/signature.hpp"

namespace quirkprint {

enum class CallbackMechanism { LocationRedirect, Cookie, Xhr, ImgBeacon };

inline constexpr CallbackMechanism kAllMechanisms[] = {CallbackMechanism::LocationRedirect, CallbackMechanism::Cookie,
                                                       CallbackMechanism::Xhr, CallbackMechanism::ImgBeacon};

std::string_view to_string(CallbackMechanism m) noexcept;
std::optional<CallbackMechanism> mechanism_from_string(std::string_view s) noexcept;

// UNSERVED -> SENT -> PASS; PASS is absorbing.
enum class TestState { Unserved, Sent, Pass };
std::string_view to_string(TestState s) noexcept;

enum class EventKind { Created, Served, Passed, DuplicateCallback, Anomaly, Advanced, Finalized };
std::string_view to_string(EventKind k) noexcept;

struct SessionEvent {
    std::uint64_t seq = 0;
    std::int64_t unix_ms = 0;
    EventKind kind = EventKind::Created;
    std::optional<std::size_t> test_index;
    std::optional<CallbackMechanism> mechanism;
    std::string detail;
};

std::string event_to_json(const SessionEvent& e);
SessionEvent event_from_json(std::string_view line);

// True when every Passed event for a test is preceded by a Served event for it.
bool pass_follows_sent(std::span<const SessionEvent> events);

enum class CallbackResult { Recorded, AlreadyPassed, Anomaly, SessionClosed };

struct NextStep {
    bool done = false;
    std::size_t index = 0;  // meaningful when !done
};

struct DriverOptions {
    // When set, every session appends its events to <dir>/<token>.jsonl.
    std::optional<std::filesystem::path> event_log_dir;
};

// URL layout shared by the service, the payloads and the agents.
std::string test_path(std::string_view token, std::size_t index);
std::string validation_path(std::string_view token, std::size_t index, CallbackMechanism m);
std::string next_path(std::string_view token);
std::string done_path(std::string_view token);
std::string script_path(std::string_view token, std::size_t index);
std::string validation_cookie_name(std::string_view token, std::size_t index);

// Server-side protocol state for every browser session. Thread-safe: sessions are
// independent and each one is updated under its own lock.
class TestDriver {
public:
    explicit TestDriver(Corpus corpus, DriverOptions options = {});
    ~TestDriver();

    TestDriver(const TestDriver&) = delete;
    TestDriver& operator=(const TestDriver&) = delete;

    const Corpus& corpus() const noexcept { return corpus_; }
    const std::vector<TestCase>& test_cases() const noexcept { return cases_; }
    const Schema& attributes() const noexcept { return attributes_; }
    std::size_t test_count() const noexcept { return cases_.size(); }

    std::string create_session(std::string ua_string);

    // Page for one test with the validation payload embedded; marks the test SENT
    // unless it already passed. Throws NotFound for an unknown token or index.
    RenderedPage serve_test(const std::string& token, std::size_t index);

    CallbackResult record_pass(const std::string& token, std::size_t index, CallbackMechanism mechanism);

    // Advances the cursor and returns the following test, or done past the last one.
    NextStep next(const std::string& token);

    // Idempotent: later calls return the stored signature.
    BrowserSignature finalize(const std::string& token);

    std::optional<BrowserSignature> signature(const std::string& token) const;
    TestState state(const std::string& token, std::size_t index) const;
    std::size_t cursor(const std::string& token) const;
    std::string ua_string(const std::string& token) const;
    std::vector<SessionEvent> events(const std::string& token) const;
    std::vector<std::string> tokens() const;

    // Validation routine for one test: location redirect, cookie, XHR and image beacon.
    std::string payload_script(const std::string& token, std::size_t index) const;
    // payload_script encoded for the vector's payload format.
    std::string encoded_payload(const std::string& token, std::size_t index) const;

private:
    struct Session;

    std::shared_ptr<Session> find(const std::string& token) const;
    void check_index(std::size_t index) const;
    std::string new_token();

    Corpus corpus_;
    std::vector<TestCase> cases_;
    Schema attributes_;
    DriverOptions options_;

    mutable std::shared_mutex sessions_mutex_;
    std::unordered_map<std::string, std::shared_ptr<Session>> sessions_;

    std::mutex rng_mutex_;
    std::mt19937_64 rng_;
};

}  // namespace quirkprint
