#pragma once
// First-order intensity statistics over the ROI. Entropy and Uniformity use
// the discretized histogram (log base 2); everything else uses the raw
// intensities. Percentiles interpolate linearly between closest ranks.
// Variance/Skewness/Kurtosis are population moments; Kurtosis is non-excess.

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "radstab/discretize.hpp"
#include "radstab/feature_block.hpp"
#include "radstab/volume.hpp"

namespace radstab {

inline const std::vector<std::string>& first_order_feature_names() {
    static const std::vector<std::string> k = {
        "Energy",        "TotalEnergy", "Entropy",
        "Minimum",       "10Percentile", "90Percentile",
        "Maximum",       "Mean",        "Median",
        "InterquartileRange", "Range",  "MeanAbsoluteDeviation",
        "RobustMeanAbsoluteDeviation", "RootMeanSquared",
        "Skewness",      "Kurtosis",    "Variance",
        "Uniformity"};
    return k;
}

namespace detail {

inline double percentile_sorted(const std::vector<double>& sorted, double q) {
    const std::size_t n = sorted.size();
    if (n == 1) return sorted[0];
    const double rank = q / 100.0 * static_cast<double>(n - 1);
    const std::size_t lo = static_cast<std::size_t>(std::floor(rank));
    const std::size_t hi = std::min(lo + 1, n - 1);
    const double frac = rank - static_cast<double>(lo);
    return sorted[lo] * (1.0 - frac) + sorted[hi] * frac;
}

}  // namespace detail

inline FeatureBlock first_order(const Volume& v, const Mask& m, const DiscretizedROI& d) {
    require_same_geometry(v.geom, m.geom, "first_order");
    if (m.empty()) throw input_error("first_order: empty mask");

    std::vector<double> x;
    x.reserve(m.foreground);
    for (std::size_t i = 0; i < m.voxels.size(); ++i)
        if (m.voxels[i]) x.push_back(v.data[i]);
    const double n = static_cast<double>(x.size());

    std::vector<double> sorted = x;
    std::sort(sorted.begin(), sorted.end());

    double sum = 0.0, sum_sq = 0.0;
    for (double t : x) {
        sum += t;
        sum_sq += t * t;
    }
    const double mean = sum / n;
    double m2 = 0.0, m3 = 0.0, m4 = 0.0, abs_dev = 0.0;
    for (double t : x) {
        const double c = t - mean;
        m2 += c * c;
        m3 += c * c * c;
        m4 += c * c * c * c;
        abs_dev += std::abs(c);
    }
    m2 /= n;
    m3 /= n;
    m4 /= n;

    const double p10 = detail::percentile_sorted(sorted, 10.0);
    const double p25 = detail::percentile_sorted(sorted, 25.0);
    const double p50 = detail::percentile_sorted(sorted, 50.0);
    const double p75 = detail::percentile_sorted(sorted, 75.0);
    const double p90 = detail::percentile_sorted(sorted, 90.0);

    // Robust MAD: deviation from the mean of the values within [P10, P90].
    double robust_sum = 0.0;
    std::size_t robust_n = 0;
    for (double t : x) {
        if (t >= p10 && t <= p90) {
            robust_sum += t;
            ++robust_n;
        }
    }
    double rmad = 0.0;
    if (robust_n > 0) {
        const double robust_mean = robust_sum / static_cast<double>(robust_n);
        double acc = 0.0;
        for (double t : x)
            if (t >= p10 && t <= p90) acc += std::abs(t - robust_mean);
        rmad = acc / static_cast<double>(robust_n);
    }

    // Histogram over discretized labels for Entropy / Uniformity.
    std::vector<double> hist(static_cast<std::size_t>(d.n_bins) + 1, 0.0);
    for (std::size_t i = 0; i < m.voxels.size(); ++i)
        if (m.voxels[i]) hist[static_cast<std::size_t>(d.labels[i])] += 1.0;
    double entropy = 0.0, uniformity = 0.0;
    for (int b = 1; b <= d.n_bins; ++b) {
        const double p = hist[static_cast<std::size_t>(b)] / static_cast<double>(d.n_voxels);
        if (p > 0.0) {
            entropy -= p * std::log2(p);
            uniformity += p * p;
        }
    }

    const bool flat = (m2 == 0.0);
    FeatureBlock out;
    out.push(sum_sq);                                   // Energy
    out.push(v.geom.voxel_volume() * sum_sq);           // TotalEnergy
    out.push(entropy);                                  // Entropy
    out.push(sorted.front());                           // Minimum
    out.push(p10);                                      // 10Percentile
    out.push(p90);                                      // 90Percentile
    out.push(sorted.back());                            // Maximum
    out.push(mean);                                     // Mean
    out.push(p50);                                      // Median
    out.push(p75 - p25);                                // InterquartileRange
    out.push(sorted.back() - sorted.front());           // Range
    out.push(abs_dev / n);                              // MeanAbsoluteDeviation
    out.push(rmad);                                     // RobustMeanAbsoluteDeviation
    out.push(std::sqrt(sum_sq / n));                    // RootMeanSquared
    out.push(flat ? 0.0 : m3 / std::pow(m2, 1.5), flat);  // Skewness
    out.push(flat ? 0.0 : m4 / (m2 * m2), flat);        // Kurtosis
    out.push(m2);                                       // Variance
    out.push(uniformity);                               // Uniformity
    return out;
}

}  // namespace radstab
