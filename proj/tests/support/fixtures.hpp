#pragma once

#include <random>
#include <string>
#include <utility>
#include <vector>

#include "quirkprint/classifier.hpp"
#include "quirkprint/signature.hpp"

namespace quirkprint::testing {

inline std::unique_ptr<TreeNode> leaf(Family f, std::size_t support) {
    return std::make_unique<TreeNode>(TreeNode::Leaf{f, support});
}

inline std::unique_ptr<TreeNode> test(std::string attr, Outcome value, std::unique_ptr<TreeNode> if_equal,
                                      std::unique_ptr<TreeNode> otherwise) {
    TreeNode::Internal in;
    in.attribute = std::move(attr);
    in.branches.push_back({{value, false}, std::move(if_equal)});
    in.branches.push_back({{value, true}, std::move(otherwise)});
    return std::make_unique<TreeNode>(std::move(in));
}

// The six-test family tree, written out by hand.
inline TreeNode figure_tree() {
    auto safari_opera = test("258-1-1", Outcome::Sent, leaf(Family::Safari, 11), leaf(Family::Opera, 6));
    auto android = test("128-1-1", Outcome::Pass, std::move(safari_opera), leaf(Family::Android, 14));
    auto chrome = test("90-2-1", Outcome::Pass, std::move(android), leaf(Family::Chrome, 20));
    auto ie = test("89-1-1", Outcome::Pass, leaf(Family::IE, 6), std::move(chrome));
    return std::move(*test("397-1-1", Outcome::Pass, leaf(Family::Firefox, 15), std::move(ie)));
}

// Attribute values along each leaf path: 397-1-1, 89-1-1, 90-2-1, 128-1-1, 258-1-1.
struct PathProbe {
    Family family;
    const char* outcomes;
};

inline constexpr PathProbe kPathProbes[] = {
    {Family::Firefox, "psssn"}, {Family::IE, "spsnn"},     {Family::Chrome, "ssssn"},
    {Family::Android, "snpss"}, {Family::Safari, "sspps"}, {Family::Opera, "ssppp"},
};

inline Schema fixture_schema() {
    return make_schema({"1-1-1", "397-1-1", "89-1-1", "90-2-1", "128-1-1", "258-1-1", "1-2-1"});
}

// Probe over fixture_schema(): constant filler columns around the path values.
inline std::vector<Outcome> probe_row(const char* path) {
    std::vector<Outcome> row{Outcome::Pass};
    for (Outcome o : parse_outcomes(path)) row.push_back(o);
    row.push_back(Outcome::Sent);
    return row;
}

inline BrowserSignature probe_signature(const PathProbe& p) {
    return make_signature(fixture_schema(), probe_row(p.outcomes), std::string(to_string(p.family)), p.family);
}

// 72 instances: Safari 11, Firefox 15, IE 6, Opera 6, Android 15, Chrome 19. Every instance
// follows its family's path except one Android that follows the Chrome path.
inline LabeledDataset family_fixture_dataset() {
    LabeledDataset ds(fixture_schema());
    const std::pair<Family, std::size_t> counts[] = {
        {Family::Safari, 11}, {Family::Firefox, 15}, {Family::IE, 6},
        {Family::Opera, 6},   {Family::Android, 14}, {Family::Chrome, 19},
    };
    for (auto [family, n] : counts) {
        for (const auto& p : kPathProbes) {
            if (p.family != family) continue;
            for (std::size_t i = 0; i < n; ++i) ds.add(probe_row(p.outcomes), family);
        }
    }
    ds.add(probe_row("ssssn"), Family::Android);
    return ds;
}

// 77 NA-free signatures; exactly 22 of them (11 pairs) have a zero-distance duplicate.
inline SignatureDataset efficiency_fixture() {
    constexpr std::size_t kBits = 7;
    SignatureDataset ds(numbered_schema(kBits));
    auto code_row = [](std::size_t code) {
        std::vector<Outcome> row;
        for (std::size_t b = 0; b < kBits; ++b) row.push_back((code >> b) & 1 ? Outcome::Pass : Outcome::Sent);
        return row;
    };
    for (std::size_t i = 0; i < 77; ++i) {
        std::size_t code = i < 66 ? i : i - 66;
        ds.add(make_signature(ds.attributes(), code_row(code), "browser " + std::to_string(i + 1)));
    }
    return ds;
}

inline Outcome random_outcome(std::mt19937_64& rng) {
    return kAllOutcomes[std::uniform_int_distribution<int>(0, 2)(rng)];
}

inline std::vector<Outcome> random_outcomes(std::mt19937_64& rng, std::size_t n) {
    std::vector<Outcome> v(n);
    for (auto& o : v) o = random_outcome(rng);
    return v;
}

inline std::string random_label(std::mt19937_64& rng) {
    static constexpr char kChars[] = "abcXYZ 019,\"._-;";
    std::uniform_int_distribution<std::size_t> len(0, 12), pick(0, sizeof kChars - 2);
    std::string s;
    for (std::size_t n = len(rng); n > 0; --n) s += kChars[pick(rng)];
    return s;
}

// Random dataset with V-C-E attribute names, optional families and dates.
inline SignatureDataset random_dataset(std::mt19937_64& rng, std::size_t rows, std::size_t cols) {
    std::vector<std::string> names;
    for (std::size_t c = 0; c < cols; ++c) names.push_back(std::to_string(c / 2 + 1) + "-" + std::to_string(c % 2 + 1) + "-1");
    SignatureDataset ds(make_schema(std::move(names)));
    std::uniform_int_distribution<int> fam(-1, static_cast<int>(kFamilyCount) - 1);
    std::uniform_int_distribution<int> day(0, 6000);
    for (std::size_t r = 0; r < rows; ++r) {
        auto sig = make_signature(ds.attributes(), random_outcomes(rng, cols), random_label(rng));
        if (int f = fam(rng); f >= 0) sig.family = kAllFamilies[f];
        if (rng() % 2) {
            sig.release_date = Date{std::chrono::sys_days{std::chrono::days{10000 + day(rng)}}};
        }
        ds.add(std::move(sig));
    }
    return ds;
}

}  // namespace quirkprint::testing
