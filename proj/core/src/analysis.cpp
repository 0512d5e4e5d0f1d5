#include "quirkprint/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

#include "quirkprint/dataset_io.hpp"
#include "quirkprint/error.hpp"

namespace quirkprint {

std::string format_median(std::optional<double> m) {
    if (!m) return "-";
    char buf[32];
    if (*m == std::floor(*m)) {
        std::snprintf(buf, sizeof buf, "%.0f", *m);
    } else {
        std::snprintf(buf, sizeof buf, "%.1f", *m);  // medians of integers are multiples of 0.5
    }
    return buf;
}

std::vector<DistanceRow> distance_table(const SignatureDataset& ds, unsigned threads) {
    std::vector<DistanceRow> rows;
    if (ds.empty()) return rows;
    DistanceMatrix m(ds, threads);
    rows.reserve(ds.size());
    for (std::size_t i = 0; i < ds.size(); ++i) {
        DistanceRow r;
        r.index = i;
        r.browser = ds[i].label;
        std::optional<std::size_t> best;
        for (std::size_t j = 0; j < ds.size(); ++j) {
            if (i == j || m(i, j).overlap == 0) continue;
            auto d = m(i, j).distance;
            if (!best || d < *best) {
                best = d;
                r.neighbors.clear();
            }
            if (d == *best) r.neighbors.push_back(ds[j].label);
        }
        r.mhd = best;
        r.mdf = median_family_distance(ds, m, i);
        r.family_size = family_size(ds, i);
        r.mdd = ds.size() > 1 ? median_dataset_distance(ds, m, i) : std::nullopt;
        rows.push_back(std::move(r));
    }
    std::stable_sort(rows.begin(), rows.end(), [](const DistanceRow& a, const DistanceRow& b) {
        if (a.mdf.has_value() != b.mdf.has_value()) return a.mdf.has_value();
        return a.mdf && *a.mdf < *b.mdf;
    });
    return rows;
}

namespace {

void write_table(std::ostream& out, const std::vector<std::vector<std::string>>& cells) {
    if (cells.empty()) return;
    std::vector<std::size_t> width(cells.front().size(), 0);
    for (const auto& row : cells) {
        for (std::size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], row[c].size());
    }
    for (const auto& row : cells) {
        std::string line;
        for (std::size_t c = 0; c < row.size(); ++c) {
            if (c > 0) line += " | ";
            line += row[c];
            if (c + 1 < row.size()) line.append(width[c] - row[c].size(), ' ');
        }
        out << line << '\n';
    }
}

std::string join(const std::vector<std::string>& items, std::string_view sep) {
    std::string out;
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (i > 0) out += sep;
        out += items[i];
    }
    return out;
}

std::string percent(double rate) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f%%", rate * 100.0);
    return buf;
}

}  // namespace

void write_distance_table(std::ostream& out, const std::vector<DistanceRow>& rows) {
    std::vector<std::vector<std::string>> cells;
    cells.push_back({"Browser", "Nearest Neighbor (MHD)", "MHD", "MDF", "Fsize", "MDD"});
    for (const auto& r : rows) {
        cells.push_back({r.browser, r.neighbors.empty() ? "-" : join(r.neighbors, "; "),
                         r.mhd ? std::to_string(*r.mhd) : "-", format_median(r.mdf), std::to_string(r.family_size),
                         format_median(r.mdd)});
    }
    write_table(out, cells);
}

std::string_view to_string(Verdict v) noexcept {
    switch (v) {
        case Verdict::ExactMatch: return "exact-match";
        case Verdict::FamilyMatch: return "family-match";
        case Verdict::Outlier: return "outlier";
    }
    return "?";
}

FingerprintReport fingerprint(const BrowserSignature& query, const SignatureDataset& ds, double outlier_factor) {
    FingerprintReport r;
    r.query = query.label;
    r.confidence = confidence(query);
    r.neighbors = nearest_neighbors(query, ds);
    for (const auto& n : r.neighbors) r.neighbor_families.push_back(ds[n.index].family);
    r.mdf = median_family_distance(query, ds);
    r.mdd = median_dataset_distance(query, ds);

    if (ds.size() >= 2) {
        DistanceMatrix m(ds);
        std::vector<std::size_t> scaled;  // MDDs are half-integers; keep them exact as 2*MDD
        for (std::size_t i = 0; i < ds.size(); ++i) {
            if (auto mdd = median_dataset_distance(ds, m, i)) scaled.push_back(static_cast<std::size_t>(std::lround(*mdd * 2)));
        }
        if (auto med = median(scaled)) r.outlier_threshold = outlier_factor * (*med / 2.0);
    }

    if (r.neighbors.front().distance == 0) {
        r.verdict = Verdict::ExactMatch;
    } else if (r.mdd && r.outlier_threshold && *r.mdd > *r.outlier_threshold) {
        r.verdict = Verdict::Outlier;
    } else {
        r.verdict = Verdict::FamilyMatch;
    }
    return r;
}

void write_fingerprint_report(std::ostream& out, const FingerprintReport& r) {
    char conf[32];
    std::snprintf(conf, sizeof conf, "%.4f", r.confidence.value());
    out << "query: " << r.query << '\n';
    out << "confidence: " << conf << " (" << r.confidence.num << '/' << r.confidence.den << ")\n";
    for (std::size_t i = 0; i < r.neighbors.size(); ++i) {
        out << "nearest: " << r.neighbors[i].label << " (family "
            << (r.neighbor_families[i] ? std::string(to_string(*r.neighbor_families[i])) : "-") << ")\n";
    }
    out << "mhd: " << r.neighbors.front().distance << '\n';
    out << "mdf: " << format_median(r.mdf) << '\n';
    out << "mdd: " << format_median(r.mdd) << '\n';
    out << "outlier-threshold: " << format_median(r.outlier_threshold) << '\n';
    out << "verdict: " << to_string(r.verdict) << '\n';
}

std::vector<TimemapPoint> timemap(const SignatureDataset& ds, std::optional<Family> family) {
    std::vector<TimemapPoint> points;
    for (std::size_t i = 0; i < ds.size(); ++i) {
        for (std::size_t j = i + 1; j < ds.size(); ++j) {
            const auto& a = ds[i];
            const auto& b = ds[j];
            if (family && (a.family != family || b.family != family)) continue;
            TimemapPoint p;
            p.browser_a = a.label;
            p.browser_b = b.label;
            if (a.release_date && b.release_date) {
                auto days = (std::chrono::sys_days(*a.release_date) - std::chrono::sys_days(*b.release_date)).count();
                p.days_apart = std::abs(static_cast<long>(days));
            }
            auto r = mhd(a, b);
            if (r.overlap > 0) p.distance = r.distance;
            p.same_family = a.family.has_value() && a.family == b.family;
            points.push_back(std::move(p));
        }
    }
    return points;
}

void write_timemap(std::ostream& out, const std::vector<TimemapPoint>& points) {
    out << "browser_a,browser_b,days_apart,distance,same_family\n";
    for (const auto& p : points) {
        out << csv_escape(p.browser_a) << ',' << csv_escape(p.browser_b) << ',';
        if (p.days_apart) out << *p.days_apart;
        out << ',';
        if (p.distance) out << *p.distance;
        out << ',' << (p.same_family ? "true" : "false") << '\n';
    }
}

void write_confusion_matrix(std::ostream& out, const ConfusionMatrix& m) {
    auto fams = m.present_families();
    std::vector<std::vector<std::string>> cells;
    std::vector<std::string> header{"actual \\ predicted"};
    for (auto f : fams) header.emplace_back(to_string(f));
    cells.push_back(std::move(header));
    for (auto a : fams) {
        std::vector<std::string> row{std::string(to_string(a))};
        for (auto p : fams) row.push_back(std::to_string(m.at(a, p)));
        cells.push_back(std::move(row));
    }
    write_table(out, cells);
    out << "Total number of instances: " << m.total() << '\n';
    out << "Correctly classified instances: " << m.correct() << " (" << percent(m.accuracy()) << ")\n";
    out << "Incorrectly classified instances: " << (m.total() - m.correct()) << " ("
        << percent(m.total() == 0 ? 0.0 : 1.0 - m.accuracy()) << ")\n";
}

void write_efficiency(std::ostream& out, const Efficiency& e) {
    write_table(out, {{"MHD=0", "nb of browsers", "FP rate", "Well Fingerprinted"},
                      {std::to_string(e.duplicates), std::to_string(e.total), percent(e.fp_rate()),
                       percent(e.well_fingerprinted_rate)}});
}

}  // namespace quirkprint
