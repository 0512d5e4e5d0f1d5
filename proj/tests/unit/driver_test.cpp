#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <thread>

#include "quirkprint/driver.hpp"
#include "quirkprint/error.hpp"

namespace qp = quirkprint;
using qp::CallbackMechanism;
using qp::CallbackResult;
using qp::TestState;

namespace {

qp::Corpus three_vector_corpus() {
    return qp::Corpus({{1, qp::VectorSource::RSnake, qp::PayloadFormat::Identity, "<script>{{PAYLOAD}}</script>", ""},
                       {2, qp::VectorSource::Html5Sec, qp::PayloadFormat::Base64,
                        "<script src=\"data:text/javascript;base64,{{PAYLOAD}}\"></script>", ""},
                       {3, qp::VectorSource::Shazzer, qp::PayloadFormat::ExternalJsUrl,
                        "<script src=\"{{PAYLOAD}}\"></script>", ""}},
                      {{2, "html5", "<!DOCTYPE html>\n", "text/html"}});
}

std::size_t count_kind(const std::vector<qp::SessionEvent>& ev, qp::EventKind k) {
    return static_cast<std::size_t>(std::count_if(ev.begin(), ev.end(), [k](const auto& e) { return e.kind == k; }));
}

}  // namespace

TEST(Paths, Layout) {
    EXPECT_EQ(qp::test_path("abc", 3), "/t/abc/3");
    EXPECT_EQ(qp::validation_path("abc", 3, CallbackMechanism::Xhr), "/v/abc/3/xhr");
    EXPECT_EQ(qp::next_path("abc"), "/n/abc");
    EXPECT_EQ(qp::done_path("abc"), "/done/abc");
    EXPECT_EQ(qp::script_path("abc", 0), "/js/abc/0");
    EXPECT_EQ(qp::validation_cookie_name("abc", 7), "qpv_abc_7");
    for (auto m : qp::kAllMechanisms) EXPECT_EQ(qp::mechanism_from_string(qp::to_string(m)), m);
    EXPECT_FALSE(qp::mechanism_from_string("carrier_pigeon"));
}

TEST(TestDriver, SessionStartsUnserved) {
    qp::TestDriver d(three_vector_corpus());
    EXPECT_EQ(d.test_count(), 3u);
    EXPECT_EQ(d.attributes()->names(), (std::vector<std::string>{"1-2-1", "2-2-1", "3-2-1"}));
    auto tok = d.create_session("UA/1");
    EXPECT_EQ(tok.size(), 32u);
    EXPECT_NE(d.create_session("UA/2"), tok);
    EXPECT_EQ(d.cursor(tok), 0u);
    EXPECT_EQ(d.ua_string(tok), "UA/1");
    for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(d.state(tok, i), TestState::Unserved);
    auto ev = d.events(tok);
    ASSERT_EQ(ev.size(), 1u);
    EXPECT_EQ(ev[0].kind, qp::EventKind::Created);
    EXPECT_EQ(d.tokens().size(), 2u);
}

TEST(TestDriver, ServeMarksSentAndPassIsAbsorbing) {
    qp::TestDriver d(three_vector_corpus());
    auto tok = d.create_session("UA");
    auto page = d.serve_test(tok, 0);
    EXPECT_TRUE(page.html.starts_with("<!DOCTYPE html>\n<script>"));
    EXPECT_NE(page.html.find(qp::validation_path(tok, 0, CallbackMechanism::ImgBeacon)), std::string::npos);
    EXPECT_EQ(d.state(tok, 0), TestState::Sent);
    EXPECT_EQ(d.record_pass(tok, 0, CallbackMechanism::ImgBeacon), CallbackResult::Recorded);
    EXPECT_EQ(d.state(tok, 0), TestState::Pass);
    EXPECT_EQ(d.record_pass(tok, 0, CallbackMechanism::Xhr), CallbackResult::AlreadyPassed);
    d.serve_test(tok, 0);  // a reload never demotes
    EXPECT_EQ(d.state(tok, 0), TestState::Pass);
    EXPECT_EQ(count_kind(d.events(tok), qp::EventKind::DuplicateCallback), 1u);
}

TEST(TestDriver, UnknownTokenOrIndex) {
    qp::TestDriver d(three_vector_corpus());
    auto tok = d.create_session("UA");
    EXPECT_THROW(d.serve_test(tok, 3), qp::NotFound);
    EXPECT_THROW(d.serve_test("nope", 0), qp::NotFound);
    EXPECT_THROW(d.record_pass(tok, 99, CallbackMechanism::Cookie), qp::NotFound);
    EXPECT_THROW(d.next("nope"), qp::NotFound);
    EXPECT_THROW(d.finalize("nope"), qp::NotFound);
    EXPECT_NO_THROW(d.serve_test(tok, 2));
}

TEST(TestDriver, CallbackBeforeServeIsAnAnomaly) {
    qp::TestDriver d(three_vector_corpus());
    auto tok = d.create_session("UA");
    EXPECT_EQ(d.record_pass(tok, 1, CallbackMechanism::LocationRedirect), CallbackResult::Anomaly);
    EXPECT_EQ(d.state(tok, 1), TestState::Unserved);
    EXPECT_EQ(count_kind(d.events(tok), qp::EventKind::Anomaly), 1u);
    EXPECT_TRUE(qp::pass_follows_sent(d.events(tok)));
}

TEST(TestDriver, NextWalksTheCursor) {
    qp::TestDriver d(three_vector_corpus());
    auto tok = d.create_session("UA");
    auto s = d.next(tok);
    EXPECT_FALSE(s.done);
    EXPECT_EQ(s.index, 1u);
    EXPECT_EQ(d.next(tok).index, 2u);
    EXPECT_TRUE(d.next(tok).done);
    EXPECT_TRUE(d.next(tok).done);
    EXPECT_EQ(d.cursor(tok), 3u);
}

TEST(TestDriver, ServingAheadMovesTheCursor) {
    qp::TestDriver d(three_vector_corpus());
    auto tok = d.create_session("UA");
    d.serve_test(tok, 1);
    EXPECT_EQ(d.cursor(tok), 1u);
    d.serve_test(tok, 0);
    EXPECT_EQ(d.cursor(tok), 1u);
    EXPECT_EQ(d.next(tok).index, 2u);
}

TEST(TestDriver, FinalizeBuildsTheSignature) {
    qp::TestDriver d(three_vector_corpus());
    auto tok = d.create_session("Mozilla/5.0 test");
    d.serve_test(tok, 0);
    d.record_pass(tok, 0, CallbackMechanism::Cookie);
    d.serve_test(tok, 1);
    EXPECT_FALSE(d.signature(tok));
    auto sig = d.finalize(tok);
    EXPECT_EQ(qp::compact_string(sig.outcomes), "psn");
    EXPECT_EQ(sig.label, "Mozilla/5.0 test");
    EXPECT_EQ(d.signature(tok), sig);

    // Closed: late traffic changes nothing and finalize is idempotent.
    EXPECT_EQ(d.record_pass(tok, 1, CallbackMechanism::Xhr), CallbackResult::SessionClosed);
    d.serve_test(tok, 2);
    EXPECT_EQ(d.finalize(tok), sig);
    EXPECT_EQ(count_kind(d.events(tok), qp::EventKind::Finalized), 1u);
}

TEST(TestDriver, UntouchedSessionIsAllNa) {
    qp::TestDriver d(three_vector_corpus());
    auto tok = d.create_session("UA");
    EXPECT_EQ(qp::compact_string(d.finalize(tok).outcomes), "nnn");
}

TEST(TestDriver, PayloadsPerFormat) {
    qp::TestDriver d(three_vector_corpus());
    auto tok = d.create_session("UA");
    auto script = d.payload_script(tok, 1);
    EXPECT_EQ(script.find('"'), std::string::npos);
    for (auto m : qp::kAllMechanisms) {
        if (m != CallbackMechanism::Cookie) EXPECT_NE(script.find(qp::validation_path(tok, 1, m)), std::string::npos);
    }
    EXPECT_NE(script.find(qp::validation_cookie_name(tok, 1)), std::string::npos);
    EXPECT_EQ(d.encoded_payload(tok, 0), d.payload_script(tok, 0));
    EXPECT_EQ(d.encoded_payload(tok, 1), qp::base64_encode(script));
    EXPECT_EQ(d.encoded_payload(tok, 2), qp::script_path(tok, 2));
    EXPECT_NE(d.serve_test(tok, 2).html.find("src=\"" + qp::script_path(tok, 2) + "\""), std::string::npos);
}

TEST(TestDriver, EventJsonRoundTrip) {
    qp::SessionEvent e{7, 1334000000000, qp::EventKind::Passed, 12, CallbackMechanism::Xhr, "x \"y\""};
    auto back = qp::event_from_json(qp::event_to_json(e));
    EXPECT_EQ(back.seq, 7u);
    EXPECT_EQ(back.unix_ms, 1334000000000);
    EXPECT_EQ(back.kind, qp::EventKind::Passed);
    EXPECT_EQ(back.test_index, 12u);
    EXPECT_EQ(back.mechanism, CallbackMechanism::Xhr);
    EXPECT_EQ(back.detail, "x \"y\"");
    EXPECT_EQ(qp::event_to_json(e).find('\n'), std::string::npos);
}

TEST(PassFollowsSent, DetectsOrderViolations) {
    using K = qp::EventKind;
    std::vector<qp::SessionEvent> ok{{0, 0, K::Created, {}, {}, ""}, {1, 0, K::Served, 0, {}, ""},
                                     {2, 0, K::Passed, 0, CallbackMechanism::Xhr, ""}};
    EXPECT_TRUE(qp::pass_follows_sent(ok));
    std::vector<qp::SessionEvent> bad{{0, 0, K::Served, 1, {}, ""}, {1, 0, K::Passed, 0, CallbackMechanism::Xhr, ""}};
    EXPECT_FALSE(qp::pass_follows_sent(bad));
    EXPECT_TRUE(qp::pass_follows_sent(std::vector<qp::SessionEvent>{}));
}

TEST(TestDriver, InterleavedSessionsMatchAModel) {
    // Random operation sequences over several sessions, checked against a plain state model.
    qp::TestDriver d(three_vector_corpus());
    std::mt19937_64 rng(523);
    std::vector<std::string> toks;
    std::vector<std::vector<TestState>> model;
    for (int i = 0; i < 5; ++i) {
        toks.push_back(d.create_session("UA" + std::to_string(i)));
        model.emplace_back(3, TestState::Unserved);
    }
    for (int step = 0; step < 2000; ++step) {
        std::size_t s = rng() % toks.size();
        std::size_t idx = rng() % 3;
        if (rng() % 2 == 0) {
            d.serve_test(toks[s], idx);
            if (model[s][idx] == TestState::Unserved) model[s][idx] = TestState::Sent;
        } else {
            auto r = d.record_pass(toks[s], idx, qp::kAllMechanisms[rng() % 4]);
            switch (model[s][idx]) {
                case TestState::Unserved: EXPECT_EQ(r, CallbackResult::Anomaly); break;
                case TestState::Sent:
                    EXPECT_EQ(r, CallbackResult::Recorded);
                    model[s][idx] = TestState::Pass;
                    break;
                case TestState::Pass: EXPECT_EQ(r, CallbackResult::AlreadyPassed); break;
            }
        }
        for (std::size_t i = 0; i < 3; ++i) ASSERT_EQ(d.state(toks[s], i), model[s][i]);
    }
    for (const auto& t : toks) EXPECT_TRUE(qp::pass_follows_sent(d.events(t)));
}

TEST(TestDriver, ConcurrentSessionsAreIndependent) {
    qp::TestDriver d(three_vector_corpus());
    std::vector<std::string> toks;
    for (int i = 0; i < 8; ++i) toks.push_back(d.create_session("UA"));
    {
        std::vector<std::jthread> workers;
        for (std::size_t w = 0; w < toks.size(); ++w) {
            workers.emplace_back([&, w] {
                for (int rep = 0; rep < 200; ++rep) {
                    d.serve_test(toks[w], w % 3);
                    d.record_pass(toks[w], w % 3, CallbackMechanism::ImgBeacon);
                }
            });
        }
    }
    for (std::size_t w = 0; w < toks.size(); ++w) {
        auto sig = d.finalize(toks[w]);
        std::string expected = "nnn";
        expected[w % 3] = 'p';
        EXPECT_EQ(qp::compact_string(sig.outcomes), expected);
        EXPECT_TRUE(qp::pass_follows_sent(d.events(toks[w])));
    }
}

TEST(TestDriver, PersistsEventLogs) {
    auto dir = std::filesystem::temp_directory_path() / "quirkprint_driver_logs";
    std::filesystem::remove_all(dir);
    qp::TestDriver d(three_vector_corpus(), {dir});
    auto tok = d.create_session("UA");
    d.serve_test(tok, 0);
    d.record_pass(tok, 0, CallbackMechanism::Xhr);
    d.finalize(tok);

    std::ifstream in(dir / (tok + ".jsonl"));
    ASSERT_TRUE(in);
    std::vector<qp::SessionEvent> on_disk;
    for (std::string line; std::getline(in, line);) on_disk.push_back(qp::event_from_json(line));
    auto mem = d.events(tok);
    ASSERT_EQ(on_disk.size(), mem.size());
    for (std::size_t i = 0; i < mem.size(); ++i) {
        EXPECT_EQ(on_disk[i].seq, mem[i].seq);
        EXPECT_EQ(on_disk[i].kind, mem[i].kind);
    }
    std::filesystem::remove_all(dir);
}
