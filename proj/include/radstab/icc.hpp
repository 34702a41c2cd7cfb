#pragma once
// Feature stability scoring across segmentation ensembles: intraclass
// correlation per feature, descending stability ranks, cutoff filtering, and
// averaging of retained features over masks. The default variant is one-way
// random effects ICC(1,1); segmentation samples are exchangeable draws, not a
// fixed rater panel. ICC(2,1) is available for comparison.

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <string>
#include <vector>

#include <json.hpp>

#include "radstab/csv.hpp"
#include "radstab/feature_table.hpp"

namespace radstab {

enum class IccVariant { OneWay, TwoWay };

struct IccValue {
    double value = 0.0;
    bool undefined = false;  // all observations identical (MSB = MSW = 0)
};

namespace detail {

// Row-mean and grand-mean sums of squares for an n x k matrix (flat, row-major).
struct AnovaSums {
    double msb = 0, msw = 0, msc = 0, mse = 0;
};

inline AnovaSums anova_sums(const std::vector<double>& x, std::size_t n, std::size_t k) {
    const double nn = static_cast<double>(n), kk = static_cast<double>(k);
    double grand = 0.0;
    for (double v : x) grand += v;
    grand /= (nn * kk);

    std::vector<double> row_mean(n, 0.0), col_mean(k, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < k; ++j) {
            row_mean[i] += x[i * k + j];
            col_mean[j] += x[i * k + j];
        }
    for (double& m : row_mean) m /= kk;
    for (double& m : col_mean) m /= nn;

    double ssb = 0.0;
    for (double m : row_mean) ssb += (m - grand) * (m - grand);
    ssb *= kk;
    double ssc = 0.0;
    for (double m : col_mean) ssc += (m - grand) * (m - grand);
    ssc *= nn;
    double ssw = 0.0, sse = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < k; ++j) {
            const double w = x[i * k + j] - row_mean[i];
            ssw += w * w;
            const double e = x[i * k + j] - row_mean[i] - col_mean[j] + grand;
            sse += e * e;
        }

    AnovaSums s;
    s.msb = ssb / (nn - 1.0);
    s.msw = ssw / (nn * (kk - 1.0));
    s.msc = ssc / (kk - 1.0);
    s.mse = sse / ((nn - 1.0) * (kk - 1.0));
    return s;
}

}  // namespace detail

// One-way random effects, single measure: (MSB - MSW) / (MSB + (k-1) MSW).
inline IccValue icc_oneway(const std::vector<double>& x, std::size_t n_cases, std::size_t k) {
    if (n_cases < 2 || k < 2) throw input_error("icc_oneway: need n_cases >= 2 and k >= 2");
    if (x.size() != n_cases * k) throw input_error("icc_oneway: matrix size mismatch");
    const detail::AnovaSums s = detail::anova_sums(x, n_cases, k);
    if (s.msb == 0.0 && s.msw == 0.0) return {0.0, true};
    return {(s.msb - s.msw) / (s.msb + (static_cast<double>(k) - 1.0) * s.msw), false};
}

inline IccValue icc_oneway(const std::vector<std::vector<double>>& rows) {
    if (rows.empty()) throw input_error("icc_oneway: empty matrix");
    std::vector<double> flat;
    for (const auto& r : rows) {
        if (r.size() != rows[0].size()) throw input_error("icc_oneway: ragged matrix");
        flat.insert(flat.end(), r.begin(), r.end());
    }
    return icc_oneway(flat, rows.size(), rows[0].size());
}

// Two-way random effects, absolute agreement, single measure ICC(2,1).
inline IccValue icc_twoway(const std::vector<double>& x, std::size_t n_cases, std::size_t k) {
    if (n_cases < 2 || k < 2) throw input_error("icc_twoway: need n_cases >= 2 and k >= 2");
    if (x.size() != n_cases * k) throw input_error("icc_twoway: matrix size mismatch");
    const detail::AnovaSums s = detail::anova_sums(x, n_cases, k);
    const double kk = static_cast<double>(k), nn = static_cast<double>(n_cases);
    const double den =
        s.msb + (kk - 1.0) * s.mse + kk * (s.msc - s.mse) / nn;
    if (den == 0.0) return {0.0, true};
    return {(s.msb - s.mse) / den, false};
}

struct ICCReport {
    std::vector<std::string> feature_names;
    std::vector<double> icc;
    std::vector<std::uint8_t> undefined;
    std::vector<int> stability_rank;  // 1 = highest ICC
    std::vector<std::uint8_t> retained;
    double cutoff = 0.9;
    double retained_fraction = 0.0;
};

// Per-feature ICC over the n_cases x k matrix, descending ranks with ties
// broken by feature name; undefined (all-constant) features rank last and are
// never retained.
inline ICCReport icc_report(const FeatureTable& t, double cutoff,
                            IccVariant variant = IccVariant::OneWay) {
    if (t.n_cases() < 2 || t.n_masks() < 2)
        throw input_error("icc_report: need at least 2 cases and 2 masks");
    ICCReport r;
    r.feature_names = t.feature_names;
    r.cutoff = cutoff;
    const std::size_t nf = t.n_features();
    r.icc.resize(nf);
    r.undefined.resize(nf);
    r.retained.resize(nf);
    r.stability_rank.assign(nf, 0);

    std::vector<double> matrix(t.n_cases() * t.n_masks());
    for (std::size_t f = 0; f < nf; ++f) {
        for (std::size_t c = 0; c < t.n_cases(); ++c)
            for (std::size_t m = 0; m < t.n_masks(); ++m)
                matrix[c * t.n_masks() + m] = t.at(c, m, f);
        const IccValue v = (variant == IccVariant::OneWay)
                               ? icc_oneway(matrix, t.n_cases(), t.n_masks())
                               : icc_twoway(matrix, t.n_cases(), t.n_masks());
        r.icc[f] = v.value;
        r.undefined[f] = v.undefined ? 1 : 0;
        r.retained[f] = (!v.undefined && v.value >= cutoff) ? 1 : 0;
    }

    std::vector<std::size_t> order(nf);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (r.undefined[a] != r.undefined[b]) return r.undefined[a] < r.undefined[b];
        if (r.icc[a] != r.icc[b]) return r.icc[a] > r.icc[b];
        return r.feature_names[a] < r.feature_names[b];
    });
    for (std::size_t pos = 0; pos < nf; ++pos)
        r.stability_rank[order[pos]] = static_cast<int>(pos) + 1;

    std::size_t kept = 0;
    for (std::uint8_t x : r.retained) kept += x;
    r.retained_fraction = static_cast<double>(kept) / static_cast<double>(nf);
    return r;
}

struct AveragedFeatures {
    std::vector<std::string> case_ids;
    std::vector<std::string> feature_names;  // retained subset, order preserved
    std::vector<double> values;              // [case][feature]

    std::size_t n_features() const { return feature_names.size(); }
    double at(std::size_t c, std::size_t f) const { return values[c * n_features() + f]; }
};

inline AveragedFeatures average_over_masks(const FeatureTable& t,
                                           const std::vector<std::uint8_t>& retained) {
    if (retained.size() != t.n_features())
        throw input_error("average_over_masks: retained flag size mismatch");
    AveragedFeatures a;
    a.case_ids = t.case_ids;
    std::vector<std::size_t> cols;
    for (std::size_t f = 0; f < retained.size(); ++f)
        if (retained[f]) {
            cols.push_back(f);
            a.feature_names.push_back(t.feature_names[f]);
        }
    if (cols.empty()) throw input_error("average_over_masks: no retained features");
    a.values.reserve(t.n_cases() * cols.size());
    const double k = static_cast<double>(t.n_masks());
    for (std::size_t c = 0; c < t.n_cases(); ++c)
        for (std::size_t f : cols) {
            double s = 0.0;
            for (std::size_t m = 0; m < t.n_masks(); ++m) s += t.at(c, m, f);
            a.values.push_back(s / k);
        }
    return a;
}

inline void write_icc_csv(const ICCReport& r, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw input_error("cannot open for writing: " + path);
    csv::write_row(out, {"feature", "icc", "stability_rank", "retained"});
    for (std::size_t f = 0; f < r.feature_names.size(); ++f)
        csv::write_row(out, {r.feature_names[f], csv::format_double(r.icc[f]),
                             std::to_string(r.stability_rank[f]),
                             r.retained[f] ? "1" : "0"});
    if (!out) throw input_error("write failed: " + path);
}

inline ICCReport read_icc_csv(const std::string& path) {
    const auto rows = csv::read_file(path);
    if (rows.empty() || rows[0] != std::vector<std::string>{"feature", "icc", "stability_rank", "retained"})
        throw input_error(path + ": expected header feature,icc,stability_rank,retained");
    ICCReport r;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        if (rows[i].size() != 4) throw input_error(path + ": ragged row");
        r.feature_names.push_back(rows[i][0]);
        r.icc.push_back(csv::parse_double(rows[i][1], path));
        r.stability_rank.push_back(static_cast<int>(csv::parse_double(rows[i][2], path)));
        r.retained.push_back(rows[i][3] == "1");
        r.undefined.push_back(0);
    }
    std::size_t kept = 0;
    for (std::uint8_t x : r.retained) kept += x;
    r.retained_fraction =
        r.feature_names.empty() ? 0.0 : static_cast<double>(kept) / r.feature_names.size();
    return r;
}

namespace detail {

inline void split_feature_name(const std::string& name, std::string& transform,
                               std::string& family) {
    const std::size_t a = name.find('_');
    const std::size_t b = (a == std::string::npos) ? std::string::npos : name.find('_', a + 1);
    transform = (a == std::string::npos) ? name : name.substr(0, a);
    family = (b == std::string::npos) ? "" : name.substr(a + 1, b - a - 1);
}

inline nlohmann::json group_stats(const std::map<std::string, std::vector<double>>& groups) {
    nlohmann::json out = nlohmann::json::object();
    for (const auto& [key, vals] : groups) {
        std::vector<double> v = vals;
        std::sort(v.begin(), v.end());
        auto q = [&](double p) {
            const double rank = p * static_cast<double>(v.size() - 1);
            const std::size_t lo = static_cast<std::size_t>(rank);
            const std::size_t hi = std::min(lo + 1, v.size() - 1);
            return v[lo] + (rank - static_cast<double>(lo)) * (v[hi] - v[lo]);
        };
        double mean = 0;
        for (double x : v) mean += x;
        mean /= static_cast<double>(v.size());
        out[key] = {{"count", v.size()}, {"min", v.front()},  {"q25", q(0.25)},
                    {"median", q(0.5)},  {"q75", q(0.75)},    {"max", v.back()},
                    {"mean", mean}};
    }
    return out;
}

}  // namespace detail

// Box-plot style summaries of the ICC distribution grouped by feature family
// and by image transform ("wavelet" aggregates all subbands).
inline nlohmann::json icc_summary(const ICCReport& r) {
    std::map<std::string, std::vector<double>> by_family, by_transform;
    for (std::size_t f = 0; f < r.feature_names.size(); ++f) {
        std::string transform, family;
        detail::split_feature_name(r.feature_names[f], transform, family);
        by_family[family].push_back(r.icc[f]);
        by_transform[transform].push_back(r.icc[f]);
        if (transform.rfind("wavelet-", 0) == 0) by_transform["wavelet"].push_back(r.icc[f]);
    }
    nlohmann::json j;
    j["cutoff"] = r.cutoff;
    j["retained_fraction"] = r.retained_fraction;
    j["by_family"] = detail::group_stats(by_family);
    j["by_transform"] = detail::group_stats(by_transform);
    return j;
}

}  // namespace radstab
