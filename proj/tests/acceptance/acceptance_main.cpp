// Acceptance checks: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <functional>
#include <future>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>

#include "quirkprint/analysis.hpp"
#include "quirkprint/classifier.hpp"
#include "quirkprint/corpus.hpp"
#include "quirkprint/dataset_io.hpp"
#include "quirkprint/distance.hpp"
#include "quirkprint/http_service.hpp"
#include "quirkprint/sim_agent.hpp"
#include "support/fixtures.hpp"
#include "support/gain_oracle.hpp"

namespace qp = quirkprint;
using Clock = std::chrono::steady_clock;

namespace {

// Each check returns an empty string on success, otherwise a reason.
using Check = std::function<std::string()>;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string mhd_example() {
    auto d1 = qp::mhd(qp::make_signature("pps"), qp::make_signature("pns"));
    auto d2 = qp::mhd(qp::make_signature("pps"), qp::make_signature("pnp"));
    if (d1.distance != 0) return "mhd(pps,pns) = " + std::to_string(d1.distance);
    if (d2.distance != 1) return "mhd(pps,pnp) = " + std::to_string(d2.distance);
    return {};
}

std::string confidence_gate() {
    auto sig = qp::make_signature("pns");
    if (qp::confidence(sig) != qp::Fraction{2, 3}) return "confidence is not 2/3";
    qp::SignatureDataset ds(sig.attributes);
    ds.add(sig);
    auto text = qp::signatures_to_string(ds);
    auto strict = qp::parse_signatures(text, 0.90);
    auto loose = qp::parse_signatures(text, 0.5);
    if (!strict.dataset.empty() || strict.excluded.size() != 1) return "threshold 0.90 did not exclude the row";
    if (loose.dataset.size() != 1) return "threshold 0.5 did not include the row";
    return {};
}

std::string fixture_tree() {
    auto tree = qp::testing::figure_tree();
    for (const auto& p : qp::testing::kPathProbes) {
        auto got = qp::classify(tree, qp::testing::probe_signature(p));
        if (got != p.family) return "probe " + std::string(p.outcomes) + " -> " + std::string(qp::to_string(got));
    }
    return {};
}

std::string induction_accuracy() {
    auto ds = qp::testing::family_fixture_dataset();
    auto t0 = Clock::now();
    auto tree = qp::induce_tree(ds);
    auto m = qp::evaluate(tree, ds);
    double elapsed = seconds_since(t0);
    if (ds.size() != 72) return "fixture has " + std::to_string(ds.size()) + " rows";
    if (m.correct() != 71 || m.total() != 72) return "accuracy " + std::to_string(m.correct()) + "/72";
    const std::map<qp::Family, std::size_t> diagonal{
        {qp::Family::Safari, 11}, {qp::Family::Firefox, 15}, {qp::Family::IE, 6},
        {qp::Family::Opera, 6},   {qp::Family::Android, 14}, {qp::Family::Chrome, 19},
    };
    for (auto a : qp::kAllFamilies) {
        for (auto p : qp::kAllFamilies) {
            std::size_t expected = 0;
            if (a == p && diagonal.contains(a)) expected = diagonal.at(a);
            if (a == qp::Family::Android && p == qp::Family::Chrome) expected = 1;
            if (m.at(a, p) != expected) {
                return "confusion cell " + std::string(qp::to_string(a)) + "->" + std::string(qp::to_string(p)) + " = " +
                       std::to_string(m.at(a, p));
            }
        }
    }
    if (elapsed >= 1.0) return "took " + std::to_string(elapsed) + " s";
    return {};
}

std::string gain_ratio_oracle() {
    std::mt19937_64 rng(20120424);
    for (int trial = 0; trial < 200; ++trial) {
        std::size_t attrs = 1 + rng() % 4, n = 1 + rng() % 8, classes = 2 + rng() % 2;
        qp::LabeledDataset ds(qp::numbered_schema(attrs));
        std::vector<std::vector<qp::Outcome>> rows;
        std::vector<int> labels;
        for (std::size_t i = 0; i < n; ++i) {
            rows.push_back(qp::testing::random_outcomes(rng, attrs));
            labels.push_back(static_cast<int>(rng() % classes));
            ds.add(rows.back(), qp::kAllFamilies[labels.back()]);
        }
        auto expected = qp::testing::oracle_best(rows, labels, attrs, qp::SplitScheme::Binary);
        auto tree = qp::induce_tree(ds);
        bool pure = std::all_of(labels.begin(), labels.end(), [&](int l) { return l == labels[0]; });
        bool expect_leaf = pure || std::llround(expected->score * 1e12) <= 0;
        if (expect_leaf != tree.is_leaf()) return "trial " + std::to_string(trial) + ": leaf/internal mismatch";
        if (expect_leaf) continue;
        const auto& root = tree.internal();
        if (root.attribute != std::to_string(expected->attribute + 1) || root.branches.front().predicate.value != expected->split.value) {
            return "trial " + std::to_string(trial) + ": root " + root.attribute + " differs from oracle";
        }
    }
    return {};
}

std::string efficiency() {
    auto e = qp::fingerprint_efficiency(qp::testing::efficiency_fixture());
    if (e.duplicates != 22 || e.total != 77) return "duplicates " + std::to_string(e.duplicates) + "/" + std::to_string(e.total);
    if (std::abs(e.fp_rate() * 100 - 28.57) > 0.01) return "FP rate " + std::to_string(e.fp_rate() * 100);
    if (std::abs(e.well_fingerprinted_rate * 100 - 71.42) > 0.01) return "rate " + std::to_string(e.well_fingerprinted_rate * 100);
    return {};
}

std::string end_to_end() {
    auto corpus = qp::load_corpus(std::string(QUIRKPRINT_DATA_DIR) + "/sample_corpus.jsonl");
    auto driver = std::make_shared<qp::TestDriver>(std::move(corpus));
    if (driver->test_count() != 40) return "corpus expands to " + std::to_string(driver->test_count()) + " cases";
    qp::HttpService service(driver);
    qp::Endpoint ep{"127.0.0.1", service.bind("127.0.0.1", 0)};
    service.start();

    std::mt19937_64 rng(10);
    std::vector<qp::QuirkProfile> profiles;
    std::set<std::vector<qp::Behavior>> seen;
    while (profiles.size() < 10) {
        std::vector<qp::Behavior> plan;
        for (std::size_t i = 0; i < driver->test_count(); ++i) plan.push_back(static_cast<qp::Behavior>(rng() % 3));
        if (!seen.insert(plan).second) continue;
        qp::QuirkProfile p{"agent " + std::to_string(profiles.size()), "SimAgent/" + std::to_string(profiles.size()), {}};
        for (std::size_t i = 0; i < plan.size(); ++i) p.behavior.emplace((*driver->attributes())[i], plan[i]);
        profiles.push_back(std::move(p));
    }

    auto t0 = Clock::now();
    std::vector<std::future<qp::BrowserSignature>> runs;
    for (std::size_t i = 0; i < profiles.size(); ++i) {
        runs.push_back(std::async(std::launch::async, [&, i] {
            return qp::replay(profiles[i], ep, {qp::kAllMechanisms[i % 4]});
        }));
    }
    std::string failure;
    for (std::size_t i = 0; i < runs.size(); ++i) {
        auto sig = runs[i].get();
        if (failure.empty() && sig.outcomes != qp::expected_outcomes(profiles[i], *driver->attributes())) {
            failure = profiles[i].label + " signature mismatch";
        }
    }
    double elapsed = seconds_since(t0);
    service.stop();
    if (!failure.empty()) return failure;
    if (driver->tokens().size() != 10) return std::to_string(driver->tokens().size()) + " sessions";
    for (const auto& tok : driver->tokens()) {
        if (!qp::pass_follows_sent(driver->events(tok))) return "PASS before SENT in session " + tok;
    }
    if (elapsed >= 10.0) return "took " + std::to_string(elapsed) + " s";
    return {};
}

std::string round_trip() {
    std::mt19937_64 rng(1046);
    for (int trial = 0; trial < 100; ++trial) {
        auto ds = qp::testing::random_dataset(rng, rng() % 20, 1 + rng() % 30);
        auto text = qp::signatures_to_string(ds);
        auto back = qp::parse_signatures(text, 0.0);
        if (!(back.dataset == ds)) return "trial " + std::to_string(trial) + ": import differs";
        if (qp::signatures_to_string(back.dataset) != text) return "trial " + std::to_string(trial) + ": export not deterministic";
    }
    return {};
}

std::string timemap_pairs() {
    std::mt19937_64 rng(523);
    for (std::size_t n : {0u, 1u, 2u, 5u, 17u, 40u}) {
        auto ds = qp::testing::random_dataset(rng, n, 12);
        auto all = qp::timemap(ds);
        std::size_t want = n < 2 ? 0 : n * (n - 1) / 2;
        if (all.size() != want) return "n=" + std::to_string(n) + ": " + std::to_string(all.size()) + " points";
        for (auto fam : qp::kAllFamilies) {
            std::multiset<std::pair<std::string, std::string>> oracle, got;
            for (std::size_t i = 0; i < n; ++i) {
                for (std::size_t j = i + 1; j < n; ++j) {
                    if (ds[i].family == fam && ds[j].family == fam) oracle.emplace(ds[i].label, ds[j].label);
                }
            }
            for (const auto& p : qp::timemap(ds, fam)) got.emplace(p.browser_a, p.browser_b);
            if (got != oracle) return "n=" + std::to_string(n) + ": family filter " + std::string(qp::to_string(fam)) + " differs";
        }
    }
    return {};
}

}  // namespace

int main() {
    const std::pair<const char*, Check> checks[] = {
        {"mhd worked example", mhd_example},
        {"confidence gate", confidence_gate},
        {"fixture tree fidelity", fixture_tree},
        {"induction accuracy 71/72 on the 72-instance fixture", induction_accuracy},
        {"gain-ratio oracle equivalence (200 datasets)", gain_ratio_oracle},
        {"fingerprint efficiency 28.57% / 71.42%", efficiency},
        {"end-to-end protocol (10 concurrent agents, 40 cases)", end_to_end},
        {"dataset round-trip (100 datasets)", round_trip},
        {"timemap pair count and family filter", timemap_pairs},
    };
    int failed = 0;
    for (const auto& [name, check] : checks) {
        std::string why;
        try {
            why = check();
        } catch (const std::exception& e) {
            why = std::string("exception: ") + e.what();
        }
        if (why.empty()) {
            std::printf("PASS  %s\n", name);
        } else {
            std::printf("FAIL  %s: %s\n", name, why.c_str());
            ++failed;
        }
    }
    std::printf("%d/%zu acceptance checks passed\n", static_cast<int>(std::size(checks)) - failed, std::size(checks));
    return failed == 0 ? 0 : 1;
}
