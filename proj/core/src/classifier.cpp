#include "quirkprint/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "quirkprint/error.hpp"

namespace quirkprint {

LabeledDataset LabeledDataset::from_signatures(const SignatureDataset& ds) {
    LabeledDataset out(ds.attributes());
    for (std::size_t i = 0; i < ds.size(); ++i) {
        if (!ds[i].family) {
            throw ValidationError("row " + std::to_string(i) + " ('" + ds[i].label + "') has no family label");
        }
        out.add(ds[i].outcomes, *ds[i].family);
    }
    return out;
}

void LabeledDataset::add(std::vector<Outcome> row, Family label) {
    if (row.size() != attributes_->size()) throw SchemaMismatch("labeled row does not match the attribute list");
    rows_.push_back(std::move(row));
    labels_.push_back(label);
}

BrowserSignature LabeledDataset::signature(std::size_t i) const {
    return BrowserSignature{attributes_, rows_[i], std::string(to_string(labels_[i])), labels_[i], std::nullopt};
}

double entropy(const ClassCounts& counts) {
    std::size_t total = 0;
    for (auto c : counts) total += c;
    if (total == 0) return 0.0;
    double h = 0.0;
    for (auto c : counts) {
        if (c == 0) continue;
        double p = static_cast<double>(c) / static_cast<double>(total);
        h -= p * std::log2(p);
    }
    return h;
}

namespace {

std::size_t outcome_slot(Outcome o) noexcept { return static_cast<std::size_t>(o); }

ClassCounts count_classes(const LabeledDataset& ds, std::span<const std::size_t> rows) {
    ClassCounts counts{};
    for (auto r : rows) ++counts[static_cast<std::size_t>(ds.label(r))];
    return counts;
}

// Class counts of the rows taking each outcome value of one attribute.
using OutcomeTable = std::array<ClassCounts, 3>;

OutcomeTable tabulate(const LabeledDataset& ds, std::span<const std::size_t> rows, std::size_t attribute) {
    OutcomeTable t{};
    for (auto r : rows) ++t[outcome_slot(ds.value(r, attribute))][static_cast<std::size_t>(ds.label(r))];
    return t;
}

std::size_t total_of(const ClassCounts& c) {
    std::size_t n = 0;
    for (auto x : c) n += x;
    return n;
}

double gain_ratio_from_table(const OutcomeTable& table, const Split& split) {
    ClassCounts parent{};
    for (const auto& row : table) {
        for (std::size_t k = 0; k < kFamilyCount; ++k) parent[k] += row[k];
    }
    const double n = static_cast<double>(total_of(parent));
    if (n == 0) return 0.0;

    double weighted = 0.0;
    ClassCounts sizes{};  // branch sizes, reusing the entropy helper
    std::size_t b = 0;
    for (const auto& pred : branches_of(split)) {
        ClassCounts branch{};
        for (Outcome o : kAllOutcomes) {
            if (!pred.matches(o)) continue;
            for (std::size_t k = 0; k < kFamilyCount; ++k) branch[k] += table[outcome_slot(o)][k];
        }
        auto size = total_of(branch);
        sizes[b++] = size;
        weighted += static_cast<double>(size) / n * entropy(branch);
    }
    double split_info = entropy(sizes);
    if (split_info <= 0.0) return 0.0;
    double ratio = (entropy(parent) - weighted) / split_info;
    return std::clamp(ratio, 0.0, 1.0);
}

long long score_key(double score) { return std::llround(score / kScoreResolution); }

Family majority(const ClassCounts& counts) {
    std::optional<Family> best;
    for (Family f : kAllFamilies) {
        auto c = counts[static_cast<std::size_t>(f)];
        if (c == 0) continue;
        auto bc = best ? counts[static_cast<std::size_t>(*best)] : 0;
        if (!best || c > bc || (c == bc && to_string(f) < to_string(*best))) best = f;
    }
    return best.value_or(Family::Other);
}

TreeNode build(const LabeledDataset& ds, std::vector<std::size_t> rows, std::size_t depth,
               const InductionConfig& config) {
    auto counts = count_classes(ds, rows);
    TreeNode::Leaf leaf{majority(counts), rows.size()};

    auto nonzero = std::count_if(counts.begin(), counts.end(), [](std::size_t c) { return c > 0; });
    if (nonzero <= 1) return leaf;
    if (config.max_depth && depth >= *config.max_depth) return leaf;

    auto choice = best_split(ds, rows, config.split);
    if (!choice || score_key(choice->score) <= 0) return leaf;

    TreeNode::Internal node;
    node.attribute = (*ds.attributes())[choice->attribute];
    for (const auto& pred : branches_of(choice->split)) {
        std::vector<std::size_t> part;
        for (auto r : rows) {
            if (pred.matches(ds.value(r, choice->attribute))) part.push_back(r);
        }
        auto child = part.empty() ? TreeNode(TreeNode::Leaf{leaf.family, 0}) : build(ds, std::move(part), depth + 1, config);
        node.branches.push_back({pred, std::make_unique<TreeNode>(std::move(child))});
    }
    return TreeNode(std::move(node));
}

template <typename Lookup>
Family walk(const TreeNode& tree, Lookup&& lookup) {
    const TreeNode* node = &tree;
    while (!node->is_leaf()) {
        const auto& in = node->internal();
        Outcome o = lookup(in.attribute);
        const TreeNode* next = nullptr;
        for (const auto& br : in.branches) {
            if (br.predicate.matches(o)) {
                next = br.child.get();
                break;
            }
        }
        if (!next) throw ValidationError("no branch of '" + in.attribute + "' accepts " + std::string(to_string(o)));
        node = next;
    }
    return node->leaf().family;
}

}  // namespace

double class_entropy(const LabeledDataset& ds) {
    if (ds.empty()) throw ValidationError("entropy of an empty dataset");
    ClassCounts counts{};
    for (auto f : ds.labels()) ++counts[static_cast<std::size_t>(f)];
    return entropy(counts);
}

std::string_view to_string(SplitScheme s) noexcept { return s == SplitScheme::Binary ? "binary" : "multiway"; }

std::optional<SplitScheme> split_scheme_from_string(std::string_view s) noexcept {
    if (s == "binary") return SplitScheme::Binary;
    if (s == "multiway") return SplitScheme::Multiway;
    return std::nullopt;
}

std::vector<Split> candidate_splits(SplitScheme scheme) {
    if (scheme == SplitScheme::Multiway) return {Split{SplitScheme::Multiway, Outcome::Pass}};
    std::vector<Split> out;
    for (Outcome o : kAllOutcomes) out.push_back({SplitScheme::Binary, o});
    return out;
}

std::string BranchPredicate::to_string() const {
    return (negated ? "!=" : "=") + std::string(quirkprint::to_string(value));
}

std::vector<BranchPredicate> branches_of(const Split& split) {
    if (split.scheme == SplitScheme::Binary) return {{split.value, false}, {split.value, true}};
    std::vector<BranchPredicate> out;
    for (Outcome o : kAllOutcomes) out.push_back({o, false});
    return out;
}

double gain_ratio(const LabeledDataset& ds, std::span<const std::size_t> rows, std::size_t attribute,
                  const Split& split) {
    return gain_ratio_from_table(tabulate(ds, rows, attribute), split);
}

double gain_ratio(const LabeledDataset& ds, std::string_view attribute, const Split& split) {
    auto a = ds.attributes()->find(attribute);
    if (!a) throw NotFound("unknown attribute '" + std::string(attribute) + "'");
    std::vector<std::size_t> rows(ds.size());
    for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
    return gain_ratio(ds, rows, *a, split);
}

std::optional<SplitChoice> best_split(const LabeledDataset& ds, std::span<const std::size_t> rows,
                                      SplitScheme scheme) {
    std::optional<SplitChoice> best;
    long long best_key = 0;
    const auto splits = candidate_splits(scheme);
    for (std::size_t a = 0; a < ds.attributes()->size(); ++a) {
        auto table = tabulate(ds, rows, a);
        for (const auto& split : splits) {
            double score = gain_ratio_from_table(table, split);
            long long key = score_key(score);
            if (!best || key > best_key) {
                best = SplitChoice{a, split, score};
                best_key = key;
            }
        }
    }
    return best;
}

TreeNode induce_tree(const LabeledDataset& ds, const InductionConfig& config) {
    std::vector<std::size_t> rows(ds.size());
    for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
    return build(ds, std::move(rows), 0, config);
}

Family classify(const TreeNode& tree, const BrowserSignature& sig) {
    return walk(tree, [&](const std::string& attr) { return sig.at(attr); });
}

std::size_t TreeNode::depth() const {
    if (is_leaf()) return 0;
    std::size_t d = 0;
    for (const auto& br : internal().branches) d = std::max(d, br.child->depth());
    return d + 1;
}

std::size_t TreeNode::leaf_count() const {
    if (is_leaf()) return 1;
    std::size_t n = 0;
    for (const auto& br : internal().branches) n += br.child->leaf_count();
    return n;
}

std::vector<std::string> TreeNode::tested_attributes() const {
    std::vector<std::string> out;
    auto visit = [&](auto&& self, const TreeNode& n) -> void {
        if (n.is_leaf()) return;
        const auto& in = n.internal();
        if (std::find(out.begin(), out.end(), in.attribute) == out.end()) out.push_back(in.attribute);
        for (const auto& br : in.branches) self(self, *br.child);
    };
    visit(visit, *this);
    return out;
}

bool operator==(const TreeNode& a, const TreeNode& b) {
    if (a.is_leaf() != b.is_leaf()) return false;
    if (a.is_leaf()) return a.leaf().family == b.leaf().family && a.leaf().support == b.leaf().support;
    const auto& x = a.internal();
    const auto& y = b.internal();
    if (x.attribute != y.attribute || x.branches.size() != y.branches.size()) return false;
    for (std::size_t i = 0; i < x.branches.size(); ++i) {
        if (x.branches[i].predicate != y.branches[i].predicate) return false;
        if (!(*x.branches[i].child == *y.branches[i].child)) return false;
    }
    return true;
}

std::size_t ConfusionMatrix::total() const noexcept {
    std::size_t n = 0;
    for (const auto& row : cells_) {
        for (auto c : row) n += c;
    }
    return n;
}

std::size_t ConfusionMatrix::correct() const noexcept {
    std::size_t n = 0;
    for (std::size_t i = 0; i < kFamilyCount; ++i) n += cells_[i][i];
    return n;
}

double ConfusionMatrix::accuracy() const noexcept {
    auto t = total();
    return t == 0 ? 0.0 : static_cast<double>(correct()) / static_cast<double>(t);
}

std::vector<Family> ConfusionMatrix::present_families() const {
    std::vector<Family> out;
    for (Family f : kAllFamilies) {
        std::size_t n = 0;
        for (std::size_t k = 0; k < kFamilyCount; ++k) n += cells_[idx(f)][k] + cells_[k][idx(f)];
        if (n > 0) out.push_back(f);
    }
    return out;
}

ConfusionMatrix evaluate(const TreeNode& tree, const LabeledDataset& ds) {
    ConfusionMatrix m;
    const auto& schema = *ds.attributes();
    for (std::size_t r = 0; r < ds.size(); ++r) {
        Family predicted = walk(tree, [&](const std::string& attr) {
            auto a = schema.find(attr);
            if (!a) throw NotFound("dataset has no attribute '" + attr + "'");
            return ds.value(r, *a);
        });
        m.add(ds.label(r), predicted);
    }
    return m;
}

// Serialized form
//
//   test 397-1-1
//     =PASS: leaf Firefox 15
//     !=PASS:
//       test 89-1-1
//       ...
//
// Each level indents by two spaces. A branch either carries its leaf inline or
// opens a nested node on the following line.

namespace {

void write_node(std::ostringstream& out, const TreeNode& n, std::size_t indent) {
    const std::string pad(indent, ' ');
    if (n.is_leaf()) {
        out << pad << "leaf " << to_string(n.leaf().family) << ' ' << n.leaf().support << '\n';
        return;
    }
    const auto& in = n.internal();
    out << pad << "test " << in.attribute << '\n';
    for (const auto& br : in.branches) {
        out << pad << "  " << br.predicate.to_string() << ':';
        if (br.child->is_leaf()) {
            out << " leaf " << to_string(br.child->leaf().family) << ' ' << br.child->leaf().support << '\n';
        } else {
            out << '\n';
            write_node(out, *br.child, indent + 4);
        }
    }
}

struct Line {
    std::size_t number;
    std::size_t indent;
    std::string_view text;
};

class TreeParser {
public:
    TreeParser(std::string_view text, const std::string& source) : source_(source) {
        std::size_t number = 0;
        while (!text.empty()) {
            auto nl = text.find('\n');
            std::string_view raw = text.substr(0, nl);
            text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
            ++number;
            if (!raw.empty() && raw.back() == '\r') raw.remove_suffix(1);
            auto first = raw.find_first_not_of(' ');
            if (first == std::string_view::npos || raw[first] == '#') continue;
            lines_.push_back({number, first, raw.substr(first)});
        }
    }

    TreeNode parse() {
        if (lines_.empty()) throw ParseError(source_, 0, "empty tree");
        auto root = node(0);
        if (pos_ != lines_.size()) fail(lines_[pos_], "unexpected trailing line");
        return root;
    }

private:
    [[noreturn]] void fail(const Line& l, const std::string& msg) const { throw ParseError(source_, l.number, msg); }

    TreeNode leaf_from(const Line& l, std::string_view spec) const {
        // spec: "leaf FAMILY SUPPORT"
        std::istringstream in{std::string(spec)};
        std::string kw, fam;
        std::size_t support = 0;
        if (!(in >> kw >> fam >> support) || kw != "leaf") fail(l, "expected 'leaf FAMILY SUPPORT'");
        std::string rest;
        if (in >> rest) fail(l, "trailing text after leaf");
        auto f = family_from_string(fam);
        if (!f) fail(l, "unknown family '" + fam + "'");
        return TreeNode(TreeNode::Leaf{*f, support});
    }

    static std::optional<BranchPredicate> predicate_from(std::string_view s) {
        bool negated = s.starts_with("!=");
        if (negated) s.remove_prefix(2);
        else if (s.starts_with("=")) s.remove_prefix(1);
        else return std::nullopt;
        auto o = outcome_from_string(s);
        if (!o || s.size() == 1) return std::nullopt;
        return BranchPredicate{*o, negated};
    }

    TreeNode node(std::size_t indent) {
        if (pos_ >= lines_.size()) throw ParseError(source_, 0, "unexpected end of tree");
        const Line l = lines_[pos_++];
        if (l.indent != indent) fail(l, "bad indentation");
        if (l.text.starts_with("leaf ")) return leaf_from(l, l.text);
        if (!l.text.starts_with("test ")) fail(l, "expected 'test' or 'leaf'");

        TreeNode::Internal in;
        in.attribute = std::string(l.text.substr(5));
        if (in.attribute.empty() || in.attribute.find(' ') != std::string::npos) fail(l, "bad attribute name");
        while (pos_ < lines_.size() && lines_[pos_].indent == indent + 2) {
            const Line b = lines_[pos_++];
            auto colon = b.text.find(':');
            if (colon == std::string_view::npos) fail(b, "expected 'PREDICATE:'");
            auto pred = predicate_from(b.text.substr(0, colon));
            if (!pred) fail(b, "bad branch predicate");
            auto rest = b.text.substr(colon + 1);
            auto first = rest.find_first_not_of(' ');
            std::unique_ptr<TreeNode> child;
            if (first == std::string_view::npos) {
                child = std::make_unique<TreeNode>(node(indent + 4));
            } else {
                child = std::make_unique<TreeNode>(leaf_from(b, rest.substr(first)));
            }
            in.branches.push_back({*pred, std::move(child)});
        }
        if (in.branches.empty()) fail(l, "node has no branches");
        check_exhaustive(l, in);
        return TreeNode(std::move(in));
    }

    void check_exhaustive(const Line& l, const TreeNode::Internal& in) const {
        for (Outcome o : kAllOutcomes) {
            auto hits = std::count_if(in.branches.begin(), in.branches.end(),
                                      [&](const TreeBranch& br) { return br.predicate.matches(o); });
            if (hits != 1) fail(l, "branches of '" + in.attribute + "' are not exclusive and exhaustive");
        }
    }

    std::string source_;
    std::vector<Line> lines_;
    std::size_t pos_ = 0;
};

}  // namespace

std::string serialize_tree(const TreeNode& tree) {
    std::ostringstream out;
    write_node(out, tree, 0);
    return out.str();
}

TreeNode parse_tree(std::string_view text, const std::string& source_name) {
    return TreeParser(text, source_name).parse();
}

}  // namespace quirkprint
