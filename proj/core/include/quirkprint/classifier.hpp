#pragma once

#include <array>
#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "quirkprint/signature.hpp"

namespace quirkprint {

// Signatures with a mandatory family label, stored row-wise over one attribute list.
class LabeledDataset {
public:
    LabeledDataset() : attributes_(make_schema({})) {}
    explicit LabeledDataset(Schema attributes) : attributes_(std::move(attributes)) {}

    // Throws ValidationError if any signature lacks a family.
    static LabeledDataset from_signatures(const SignatureDataset& ds);

    void add(std::vector<Outcome> row, Family label);

    const Schema& attributes() const noexcept { return attributes_; }
    std::size_t size() const noexcept { return labels_.size(); }
    bool empty() const noexcept { return labels_.empty(); }
    Outcome value(std::size_t row, std::size_t attribute) const { return rows_[row][attribute]; }
    const std::vector<Outcome>& row(std::size_t i) const { return rows_[i]; }
    Family label(std::size_t i) const { return labels_[i]; }
    const std::vector<Family>& labels() const noexcept { return labels_; }

    BrowserSignature signature(std::size_t i) const;

private:
    Schema attributes_;
    std::vector<std::vector<Outcome>> rows_;
    std::vector<Family> labels_;
};

using ClassCounts = std::array<std::size_t, kFamilyCount>;

// Shannon entropy (bits) of a class-count vector; 0 for an empty or pure set.
double entropy(const ClassCounts& counts);
// Throws ValidationError on an empty dataset.
double class_entropy(const LabeledDataset& ds);

enum class SplitScheme { Binary, Multiway };

std::string_view to_string(SplitScheme s) noexcept;
std::optional<SplitScheme> split_scheme_from_string(std::string_view s) noexcept;

// Binary splits are one-vs-rest on `value`; multiway splits have one branch per outcome.
struct Split {
    SplitScheme scheme = SplitScheme::Binary;
    Outcome value = Outcome::Pass;

    friend bool operator==(const Split&, const Split&) = default;
};

// Candidate splits for one attribute in tie-break order: PASS, SENT, NA for binary.
std::vector<Split> candidate_splits(SplitScheme scheme);

// "=PASS" or "!=PASS".
struct BranchPredicate {
    Outcome value = Outcome::Pass;
    bool negated = false;

    bool matches(Outcome o) const noexcept { return (o == value) != negated; }
    std::string to_string() const;

    friend bool operator==(const BranchPredicate&, const BranchPredicate&) = default;
};

// Mutually exclusive and exhaustive over {PASS, SENT, NA}.
std::vector<BranchPredicate> branches_of(const Split& split);

// (H(ds) - sum |ds_i|/|ds| H(ds_i)) / split_info; 0 when split_info is 0.
double gain_ratio(const LabeledDataset& ds, std::string_view attribute, const Split& split);
double gain_ratio(const LabeledDataset& ds, std::span<const std::size_t> rows, std::size_t attribute,
                  const Split& split);

class TreeNode;

struct TreeBranch {
    BranchPredicate predicate;
    std::unique_ptr<TreeNode> child;
};

class TreeNode {
public:
    struct Leaf {
        Family family = Family::Other;
        std::size_t support = 0;
    };
    struct Internal {
        std::string attribute;
        std::vector<TreeBranch> branches;
    };

    TreeNode(Leaf leaf) : node_(std::move(leaf)) {}
    TreeNode(Internal internal) : node_(std::move(internal)) {}

    bool is_leaf() const noexcept { return std::holds_alternative<Leaf>(node_); }
    const Leaf& leaf() const { return std::get<Leaf>(node_); }
    const Internal& internal() const { return std::get<Internal>(node_); }

    std::size_t depth() const;
    std::size_t leaf_count() const;
    // Distinct attributes tested anywhere in the tree, in first-visit order.
    std::vector<std::string> tested_attributes() const;

    friend bool operator==(const TreeNode& a, const TreeNode& b);

private:
    std::variant<Leaf, Internal> node_;
};

struct InductionConfig {
    SplitScheme split = SplitScheme::Binary;
    std::optional<std::size_t> max_depth;
};

// Scores are compared after rounding to this grid, so ties are stable across platforms.
inline constexpr double kScoreResolution = 1e-12;

struct SplitChoice {
    std::size_t attribute = 0;
    Split split;
    double score = 0.0;
};

// Best (attribute, split) at a node: highest rounded gain ratio; ties go to the earliest
// attribute in test-case order, then to the earliest split in candidate order.
std::optional<SplitChoice> best_split(const LabeledDataset& ds, std::span<const std::size_t> rows,
                                      SplitScheme scheme);

// Recursive divide and conquer. Stops on a pure node, a best gain ratio <= 0, or max depth.
// Leaves take the majority family; ties go to the alphabetically first family name.
TreeNode induce_tree(const LabeledDataset& ds, const InductionConfig& config = {});

// Throws NotFound if the signature lacks an attribute the tree tests on its path.
Family classify(const TreeNode& tree, const BrowserSignature& sig);

class ConfusionMatrix {
public:
    void add(Family actual, Family predicted) { ++cells_[idx(actual)][idx(predicted)]; }

    std::size_t at(Family actual, Family predicted) const { return cells_[idx(actual)][idx(predicted)]; }
    std::size_t total() const noexcept;
    std::size_t correct() const noexcept;
    double accuracy() const noexcept;
    // Families that appear as an actual or predicted class, in enum order.
    std::vector<Family> present_families() const;

private:
    static std::size_t idx(Family f) noexcept { return static_cast<std::size_t>(f); }
    std::array<std::array<std::size_t, kFamilyCount>, kFamilyCount> cells_{};
};

ConfusionMatrix evaluate(const TreeNode& tree, const LabeledDataset& ds);

// Indented text form: "test ATTR" nodes, "=PASS:" / "!=PASS:" branches, "leaf FAMILY SUPPORT".
std::string serialize_tree(const TreeNode& tree);
TreeNode parse_tree(std::string_view text, const std::string& source_name = "<tree>");

}  // namespace quirkprint
