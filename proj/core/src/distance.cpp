#include "quirkprint/distance.hpp"

#include <algorithm>
#include <limits>
#include <thread>

#include "quirkprint/error.hpp"

namespace quirkprint {

MhdResult mhd(std::span<const Outcome> a, std::span<const Outcome> b) {
    if (a.size() != b.size()) throw SchemaMismatch("signatures differ in length");
    MhdResult r;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i] == Outcome::NA || b[i] == Outcome::NA) continue;
        ++r.overlap;
        if (a[i] != b[i]) ++r.distance;
    }
    return r;
}

MhdResult mhd(const BrowserSignature& a, const BrowserSignature& b) {
    if (!same_schema(a.attributes, b.attributes)) {
        throw SchemaMismatch("'" + a.label + "' and '" + b.label + "' use different attribute lists");
    }
    return mhd(std::span<const Outcome>(a.outcomes), std::span<const Outcome>(b.outcomes));
}

std::vector<Neighbor> nearest_neighbors(const BrowserSignature& query, const SignatureDataset& ds,
                                        std::optional<std::size_t> self) {
    std::vector<Neighbor> best;
    std::size_t best_distance = std::numeric_limits<std::size_t>::max();
    std::size_t candidates = 0;
    for (std::size_t i = 0; i < ds.size(); ++i) {
        if (self && *self == i) continue;
        ++candidates;
        auto r = mhd(query, ds[i]);
        if (r.overlap == 0) continue;
        if (r.distance < best_distance) {
            best.clear();
            best_distance = r.distance;
        }
        if (r.distance == best_distance) best.push_back({i, ds[i].label, r.distance});
    }
    if (candidates == 0) throw ValidationError("nearest neighbour search over an empty dataset");
    if (best.empty()) throw IncomparableError("'" + query.label + "' has zero overlap with every candidate");
    return best;
}

std::optional<double> median(std::vector<std::size_t> values) {
    if (values.empty()) return std::nullopt;
    auto mid = values.begin() + static_cast<std::ptrdiff_t>(values.size() / 2);
    std::nth_element(values.begin(), mid, values.end());
    double upper = static_cast<double>(*mid);
    if (values.size() % 2 == 1) return upper;
    double lower = static_cast<double>(*std::max_element(values.begin(), mid));
    return (lower + upper) / 2.0;
}

DistanceMatrix::DistanceMatrix(const SignatureDataset& ds, unsigned threads) : n_(ds.size()), cells_(n_ * n_) {
    auto fill_rows = [&](std::size_t first, std::size_t stride) {
        for (std::size_t i = first; i < n_; i += stride) {
            for (std::size_t j = i; j < n_; ++j) {
                auto r = mhd(ds[i], ds[j]);
                cells_[i * n_ + j] = r;
                cells_[j * n_ + i] = r;
            }
        }
    };
    threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(n_, 1))));
    if (threads == 1) {
        fill_rows(0, 1);
        return;
    }
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(fill_rows, t, threads);
}

bool has_family(const BrowserSignature& sig) noexcept {
    return sig.family.has_value() && *sig.family != Family::Other;
}

std::size_t family_size(const SignatureDataset& ds, std::size_t index) {
    const auto& sig = ds[index];
    if (!has_family(sig)) return 1;
    return static_cast<std::size_t>(
        std::count_if(ds.begin(), ds.end(), [&](const BrowserSignature& s) { return s.family == sig.family; }));
}

namespace {

template <typename DistanceFn, typename Filter>
std::vector<std::size_t> collect(const SignatureDataset& ds, std::optional<std::size_t> self, DistanceFn&& dist,
                                 Filter&& keep) {
    std::vector<std::size_t> out;
    for (std::size_t j = 0; j < ds.size(); ++j) {
        if (self && *self == j) continue;
        if (!keep(ds[j])) continue;
        MhdResult r = dist(j);
        if (r.overlap == 0) continue;
        out.push_back(r.distance);
    }
    return out;
}

}  // namespace

std::optional<double> median_family_distance(const SignatureDataset& ds, std::size_t index) {
    const auto& sig = ds[index];
    if (!has_family(sig)) return std::nullopt;
    return median(collect(
        ds, index, [&](std::size_t j) { return mhd(sig, ds[j]); },
        [&](const BrowserSignature& s) { return s.family == sig.family; }));
}

std::optional<double> median_family_distance(const SignatureDataset& ds, const DistanceMatrix& m,
                                             std::size_t index) {
    const auto& sig = ds[index];
    if (!has_family(sig)) return std::nullopt;
    return median(collect(
        ds, index, [&](std::size_t j) { return m(index, j); },
        [&](const BrowserSignature& s) { return s.family == sig.family; }));
}

std::optional<double> median_family_distance(const BrowserSignature& sig, const SignatureDataset& ds) {
    if (!has_family(sig)) return std::nullopt;
    return median(collect(
        ds, std::nullopt, [&](std::size_t j) { return mhd(sig, ds[j]); },
        [&](const BrowserSignature& s) { return s.family == sig.family; }));
}

std::optional<double> median_dataset_distance(const SignatureDataset& ds, std::size_t index) {
    if (ds.size() < 2) throw ValidationError("dataset distance needs at least two signatures");
    const auto& sig = ds[index];
    return median(collect(
        ds, index, [&](std::size_t j) { return mhd(sig, ds[j]); }, [](const BrowserSignature&) { return true; }));
}

std::optional<double> median_dataset_distance(const SignatureDataset& ds, const DistanceMatrix& m,
                                              std::size_t index) {
    if (ds.size() < 2) throw ValidationError("dataset distance needs at least two signatures");
    return median(collect(
        ds, index, [&](std::size_t j) { return m(index, j); }, [](const BrowserSignature&) { return true; }));
}

std::optional<double> median_dataset_distance(const BrowserSignature& sig, const SignatureDataset& ds) {
    if (ds.empty()) throw ValidationError("dataset distance over an empty dataset");
    return median(collect(
        ds, std::nullopt, [&](std::size_t j) { return mhd(sig, ds[j]); },
        [](const BrowserSignature&) { return true; }));
}

Efficiency fingerprint_efficiency(const SignatureDataset& ds) {
    if (ds.size() < 2) throw ValidationError("fingerprint efficiency needs at least two signatures");
    DistanceMatrix m(ds, std::max(1u, std::thread::hardware_concurrency()));
    Efficiency e;
    e.total = ds.size();
    for (std::size_t i = 0; i < ds.size(); ++i) {
        for (std::size_t j = 0; j < ds.size(); ++j) {
            if (i != j && m(i, j).overlap > 0 && m(i, j).distance == 0) {
                ++e.duplicates;
                break;
            }
        }
    }
    e.well_fingerprinted_rate = 1.0 - static_cast<double>(e.duplicates) / static_cast<double>(e.total);
    return e;
}

}  // namespace quirkprint
