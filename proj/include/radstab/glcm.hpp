#pragma once
// Gray level co-occurrence matrices over the 13 unique 3D directions at
// Chebyshev distance 1. Each direction's count matrix is symmetrized and
// normalized; features are computed per direction and averaged (or the count
// matrices are merged first, behind a config switch). Directions that produce
// no voxel pairs are skipped.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "radstab/discretize.hpp"
#include "radstab/feature_block.hpp"
#include "radstab/neighborhood.hpp"

namespace radstab {

enum class GlcmAggregation { AverageOverDirections, MergeDirections };

inline const std::vector<std::string>& glcm_feature_names() {
    static const std::vector<std::string> k = {
        "Autocorrelation", "JointAverage",  "ClusterProminence", "ClusterShade",
        "ClusterTendency", "Contrast",      "Correlation",       "DifferenceAverage",
        "DifferenceEntropy", "DifferenceVariance", "JointEnergy", "JointEntropy",
        "Imc1",            "Imc2",          "Idm",               "Id",
        "Idmn",            "Idn",           "InverseVariance",   "MaximumProbability",
        "SumEntropy",      "SumSquares"};
    return k;
}

// Ordered pair counts (label at v, label at v+offset), row-major n_bins^2.
inline std::vector<std::int64_t> glcm_counts(const DiscretizedROI& d, const Offset3& off) {
    const Geometry& g = d.geom;
    const int n = d.n_bins;
    std::vector<std::int64_t> counts(static_cast<std::size_t>(n) * n, 0);
    for (std::size_t idx : d.roi_indices) {
        const std::int32_t a = d.labels[idx];
        const int x = static_cast<int>(idx % g.dims[0]);
        const int y = static_cast<int>((idx / g.dims[0]) % g.dims[1]);
        const int z = static_cast<int>(idx / (static_cast<std::size_t>(g.dims[0]) * g.dims[1]));
        const int nx = x + off.dx, ny = y + off.dy, nz = z + off.dz;
        if (!g.contains(nx, ny, nz)) continue;
        const std::int32_t b = d.labels[g.index(nx, ny, nz)];
        if (!b) continue;
        ++counts[static_cast<std::size_t>(a - 1) * n + (b - 1)];
    }
    return counts;
}

namespace detail {

inline void glcm_features_from_p(const std::vector<double>& p, int n, FeatureBlock& out) {
    std::vector<double> px(static_cast<std::size_t>(n), 0.0);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) px[i] += p[static_cast<std::size_t>(i) * n + j];

    double mu = 0.0;
    for (int i = 0; i < n; ++i) mu += (i + 1) * px[i];
    double sigma_sq = 0.0;
    for (int i = 0; i < n; ++i) sigma_sq += (i + 1 - mu) * (i + 1 - mu) * px[i];

    std::vector<double> p_sum(static_cast<std::size_t>(2 * n) + 1, 0.0);   // index i+j
    std::vector<double> p_diff(static_cast<std::size_t>(n), 0.0);          // index |i-j|
    double autocorr = 0, contrast = 0, joint_energy = 0, joint_entropy = 0;
    double cluster2 = 0, cluster3 = 0, cluster4 = 0, max_prob = 0;
    double idm = 0, id = 0, idmn = 0, idn = 0, sum_squares = 0, hxy1 = 0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const double pij = p[static_cast<std::size_t>(i) * n + j];
            if (pij == 0.0) continue;
            const double li = i + 1, lj = j + 1;
            p_sum[static_cast<std::size_t>(i + j + 2)] += pij;
            p_diff[static_cast<std::size_t>(std::abs(i - j))] += pij;
            autocorr += li * lj * pij;
            contrast += (li - lj) * (li - lj) * pij;
            joint_energy += pij * pij;
            joint_entropy -= pij * std::log2(pij);
            const double c = li + lj - 2.0 * mu;
            cluster2 += c * c * pij;
            cluster3 += c * c * c * pij;
            cluster4 += c * c * c * c * pij;
            max_prob = std::max(max_prob, pij);
            idm += pij / (1.0 + (li - lj) * (li - lj));
            id += pij / (1.0 + std::abs(li - lj));
            idmn += pij / (1.0 + (li - lj) * (li - lj) / (static_cast<double>(n) * n));
            idn += pij / (1.0 + std::abs(li - lj) / n);
            sum_squares += (li - mu) * (li - mu) * pij;
            const double pxpy = px[i] * px[j];
            if (pxpy > 0.0) hxy1 -= pij * std::log2(pxpy);
        }

    double diff_avg = 0, diff_entropy = 0, inverse_variance = 0;
    for (int k = 0; k < n; ++k) {
        const double pk = p_diff[static_cast<std::size_t>(k)];
        if (pk == 0.0) continue;
        diff_avg += k * pk;
        diff_entropy -= pk * std::log2(pk);
        if (k > 0) inverse_variance += pk / (static_cast<double>(k) * k);
    }
    double diff_var = 0;
    for (int k = 0; k < n; ++k)
        diff_var += (k - diff_avg) * (k - diff_avg) * p_diff[static_cast<std::size_t>(k)];

    double sum_entropy = 0;
    for (std::size_t k = 2; k < p_sum.size(); ++k)
        if (p_sum[k] > 0.0) sum_entropy -= p_sum[k] * std::log2(p_sum[k]);

    double hx = 0, hxy2 = 0;
    for (int i = 0; i < n; ++i) {
        if (px[i] > 0.0) hx -= px[i] * std::log2(px[i]);
        for (int j = 0; j < n; ++j) {
            const double q = px[i] * px[j];
            if (q > 0.0) hxy2 -= q * std::log2(q);
        }
    }

    const bool flat = (sigma_sq <= 0.0);  // single gray level
    const double correlation = flat ? 1.0 : (autocorr - mu * mu) / sigma_sq;
    const double imc1 = (hx > 0.0) ? (joint_entropy - hxy1) / hx : 0.0;
    const double imc2 = flat ? 0.0 : std::sqrt(std::max(0.0, 1.0 - std::exp(-2.0 * (hxy2 - joint_entropy))));

    out.push(autocorr);
    out.push(mu);              // JointAverage
    out.push(cluster4);        // ClusterProminence
    out.push(cluster3);        // ClusterShade
    out.push(cluster2);        // ClusterTendency
    out.push(contrast);
    out.push(correlation, flat);
    out.push(diff_avg);
    out.push(diff_entropy);
    out.push(diff_var);
    out.push(joint_energy);
    out.push(joint_entropy);
    out.push(imc1, flat);
    out.push(imc2, flat);
    out.push(idm);
    out.push(id);
    out.push(idmn);
    out.push(idn);
    out.push(inverse_variance);
    out.push(max_prob);
    out.push(sum_entropy);
    out.push(sum_squares);
}

// Degenerate matrix for an ROI with no voxel pairs (e.g. isolated voxels):
// all mass on the diagonal cell of the most frequent label.
inline std::vector<double> degenerate_p(const DiscretizedROI& d) {
    const int n = d.n_bins;
    std::vector<std::size_t> hist(static_cast<std::size_t>(n) + 1, 0);
    for (std::int32_t l : d.labels)
        if (l) ++hist[static_cast<std::size_t>(l)];
    int modal = 1;
    for (int l = 2; l <= n; ++l)
        if (hist[static_cast<std::size_t>(l)] > hist[static_cast<std::size_t>(modal)]) modal = l;
    std::vector<double> q(static_cast<std::size_t>(n) * n, 0.0);
    q[static_cast<std::size_t>(modal - 1) * n + (modal - 1)] = 1.0;
    return q;
}

inline std::vector<double> normalize_symmetric(const std::vector<std::int64_t>& counts, int n,
                                               std::int64_t total) {
    std::vector<double> p(counts.size());
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            p[static_cast<std::size_t>(i) * n + j] =
                static_cast<double>(counts[static_cast<std::size_t>(i) * n + j] +
                                    counts[static_cast<std::size_t>(j) * n + i]) /
                static_cast<double>(2 * total);
    return p;
}

}  // namespace detail

// Symmetrized, normalized co-occurrence matrix aggregated over directions;
// used by the mass-conservation checks and by the merged-aggregation mode.
inline std::vector<double> glcm_aggregate(const DiscretizedROI& d,
                                          GlcmAggregation agg = GlcmAggregation::AverageOverDirections) {
    const int n = d.n_bins;
    std::vector<double> acc(static_cast<std::size_t>(n) * n, 0.0);
    if (agg == GlcmAggregation::MergeDirections) {
        std::vector<std::int64_t> merged(acc.size(), 0);
        for (const Offset3& off : offsets13()) {
            const std::vector<std::int64_t> c = glcm_counts(d, off);
            for (std::size_t i = 0; i < c.size(); ++i) merged[i] += c[i];
        }
        std::int64_t total = 0;
        for (std::int64_t c : merged) total += c;
        if (total == 0) return acc;
        return detail::normalize_symmetric(merged, n, total);
    }
    int used = 0;
    for (const Offset3& off : offsets13()) {
        const std::vector<std::int64_t> c = glcm_counts(d, off);
        std::int64_t total = 0;
        for (std::int64_t v : c) total += v;
        if (total == 0) continue;
        const std::vector<double> p = detail::normalize_symmetric(c, n, total);
        for (std::size_t i = 0; i < p.size(); ++i) acc[i] += p[i];
        ++used;
    }
    if (used > 0)
        for (double& v : acc) v /= used;
    return acc;
}

inline FeatureBlock glcm_features(const DiscretizedROI& d,
                                  GlcmAggregation agg = GlcmAggregation::AverageOverDirections) {
    const int n = d.n_bins;
    if (agg == GlcmAggregation::MergeDirections) {
        const std::vector<double> p = glcm_aggregate(d, agg);
        double total = 0;
        for (double v : p) total += v;
        FeatureBlock out;
        if (total == 0.0) {
            detail::glcm_features_from_p(detail::degenerate_p(d), n, out);
            std::fill(out.undefined.begin(), out.undefined.end(), 1);
            return out;
        }
        detail::glcm_features_from_p(p, n, out);
        return out;
    }

    std::vector<double> sums(glcm_feature_names().size(), 0.0);
    std::vector<std::uint8_t> flags(sums.size(), 0);
    int used = 0;
    for (const Offset3& off : offsets13()) {
        const std::vector<std::int64_t> c = glcm_counts(d, off);
        std::int64_t total = 0;
        for (std::int64_t v : c) total += v;
        if (total == 0) continue;
        FeatureBlock dir;
        detail::glcm_features_from_p(detail::normalize_symmetric(c, n, total), n, dir);
        for (std::size_t i = 0; i < sums.size(); ++i) {
            sums[i] += dir.values[i];
            flags[i] |= dir.undefined[i];
        }
        ++used;
    }
    FeatureBlock out;
    if (used == 0) {
        detail::glcm_features_from_p(detail::degenerate_p(d), n, out);
        std::fill(out.undefined.begin(), out.undefined.end(), 1);
        return out;
    }
    for (std::size_t i = 0; i < sums.size(); ++i) out.push(sums[i] / used, flags[i] != 0);
    return out;
}

}  // namespace radstab
