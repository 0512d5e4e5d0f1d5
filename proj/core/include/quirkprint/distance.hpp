#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "quirkprint/signature.hpp"

namespace quirkprint {

// Modified Hamming distance: positions where either side is NA are skipped.
// overlap counts the compared positions; distance counts those that differ.
struct MhdResult {
    std::size_t distance = 0;
    std::size_t overlap = 0;

    friend bool operator==(const MhdResult&, const MhdResult&) = default;
};

MhdResult mhd(std::span<const Outcome> a, std::span<const Outcome> b);
// Throws SchemaMismatch when the signatures do not share an attribute list.
MhdResult mhd(const BrowserSignature& a, const BrowserSignature& b);

struct Neighbor {
    std::size_t index = 0;
    std::string label;
    std::size_t distance = 0;
};

// Every dataset member at the minimal MHD, in dataset order. Members with zero
// overlap are not candidates. `self` excludes the query's own row when it is a member.
// Throws ValidationError on an empty candidate set, IncomparableError when every
// candidate has zero overlap.
std::vector<Neighbor> nearest_neighbors(const BrowserSignature& query, const SignatureDataset& ds,
                                        std::optional<std::size_t> self = std::nullopt);

// Even counts average the two central values. nullopt for an empty list.
std::optional<double> median(std::vector<std::size_t> values);

// Symmetric all-pairs MHD table. Rows may be filled by several threads.
class DistanceMatrix {
public:
    explicit DistanceMatrix(const SignatureDataset& ds, unsigned threads = 1);

    std::size_t size() const noexcept { return n_; }
    const MhdResult& operator()(std::size_t i, std::size_t j) const { return cells_[i * n_ + j]; }

private:
    std::size_t n_;
    std::vector<MhdResult> cells_;
};

// Families that take part in MDF. Unlabelled and Other rows count as singletons.
bool has_family(const BrowserSignature& sig) noexcept;

// Number of members sharing sig's family, itself included; 1 for singletons.
std::size_t family_size(const SignatureDataset& ds, std::size_t index);

// Median MHD from member `index` to its same-family siblings (zero-overlap pairs skipped).
// nullopt for singleton families.
std::optional<double> median_family_distance(const SignatureDataset& ds, std::size_t index);
std::optional<double> median_family_distance(const SignatureDataset& ds, const DistanceMatrix& m,
                                             std::size_t index);
// MDF for a signature that is not a dataset member.
std::optional<double> median_family_distance(const BrowserSignature& sig, const SignatureDataset& ds);

// Median MHD from member `index` to every other member. Throws ValidationError for a
// dataset of size 1; nullopt when every pair has zero overlap.
std::optional<double> median_dataset_distance(const SignatureDataset& ds, std::size_t index);
std::optional<double> median_dataset_distance(const SignatureDataset& ds, const DistanceMatrix& m,
                                              std::size_t index);
std::optional<double> median_dataset_distance(const BrowserSignature& sig, const SignatureDataset& ds);

struct Efficiency {
    std::size_t duplicates = 0;
    std::size_t total = 0;
    double well_fingerprinted_rate = 0.0;

    double fp_rate() const noexcept { return 1.0 - well_fingerprinted_rate; }
};

// duplicates = members whose nearest neighbour sits at MHD 0. Requires >= 2 members.
Efficiency fingerprint_efficiency(const SignatureDataset& ds);

}  // namespace quirkprint
