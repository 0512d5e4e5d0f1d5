#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "quirkprint/classifier.hpp"
#include "quirkprint/distance.hpp"
#include "quirkprint/signature.hpp"

namespace quirkprint {

// "-" for undefined, otherwise the shortest exact decimal ("3", "0.5").
std::string format_median(std::optional<double> m);

struct DistanceRow {
    std::size_t index = 0;
    std::string browser;
    std::vector<std::string> neighbors;  // empty when the row is incomparable to every other
    std::optional<std::size_t> mhd;
    std::optional<double> mdf;
    std::size_t family_size = 1;
    std::optional<double> mdd;
};

// One row per signature, ordered by MDF ascending; undefined MDF last, then dataset order.
std::vector<DistanceRow> distance_table(const SignatureDataset& ds, unsigned threads = 1);
void write_distance_table(std::ostream& out, const std::vector<DistanceRow>& rows);

enum class Verdict { ExactMatch, FamilyMatch, Outlier };
std::string_view to_string(Verdict v) noexcept;

struct FingerprintReport {
    std::string query;
    Fraction confidence;
    std::vector<Neighbor> neighbors;
    std::vector<std::optional<Family>> neighbor_families;
    std::optional<double> mdf;
    std::optional<double> mdd;
    std::optional<double> outlier_threshold;
    Verdict verdict = Verdict::FamilyMatch;
};

inline constexpr double kDefaultOutlierFactor = 2.0;

// Exact match at MHD 0; outlier when the query's MDD exceeds `outlier_factor` times the
// median MDD of the dataset members; family match otherwise.
FingerprintReport fingerprint(const BrowserSignature& query, const SignatureDataset& ds,
                              double outlier_factor = kDefaultOutlierFactor);
void write_fingerprint_report(std::ostream& out, const FingerprintReport& report);

struct TimemapPoint {
    std::string browser_a;
    std::string browser_b;
    std::optional<long> days_apart;     // empty when either release date is unknown
    std::optional<std::size_t> distance;  // empty for zero-overlap pairs
    bool same_family = false;
};

// Every unordered pair (i < j in dataset order); with a family filter, only pairs
// where both members belong to it.
std::vector<TimemapPoint> timemap(const SignatureDataset& ds, std::optional<Family> family = std::nullopt);
void write_timemap(std::ostream& out, const std::vector<TimemapPoint>& points);

void write_confusion_matrix(std::ostream& out, const ConfusionMatrix& m);
void write_efficiency(std::ostream& out, const Efficiency& e);

}  // namespace quirkprint
