#pragma once
// Independent brute-force oracles used by the unit and acceptance suites.
// Everything here is deliberately written the dumb way (exhaustive pair
// enumeration, naive union-find, textbook formulas on dense matrices) and
// must stay independent of the library implementation paths it checks.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <numeric>
#include <string>
#include <vector>

#include "radstab/discretize.hpp"
#include "radstab/neighborhood.hpp"
#include "radstab/survival.hpp"
#include "radstab/volume.hpp"

namespace oracle {

using radstab::DiscretizedROI;
using radstab::Dims3;
using radstab::Geometry;
using radstab::Offset3;

// ---------------------------------------------------------------- geometry

struct Coord {
    int x, y, z;
};

inline std::vector<Coord> roi_coords(const DiscretizedROI& d) {
    std::vector<Coord> out;
    for (int z = 0; z < d.geom.dims[2]; ++z)
        for (int y = 0; y < d.geom.dims[1]; ++y)
            for (int x = 0; x < d.geom.dims[0]; ++x)
                if (d.labels[d.geom.index(x, y, z)]) out.push_back({x, y, z});
    return out;
}

inline int label_at(const DiscretizedROI& d, const Coord& c) {
    return d.labels[d.geom.index(c.x, c.y, c.z)];
}

// ------------------------------------------------------------------- GLCM

// Ordered co-occurrence counts by exhaustive enumeration of ROI voxel pairs.
inline std::vector<std::int64_t> glcm_counts(const DiscretizedROI& d, const Offset3& off) {
    const std::vector<Coord> roi = roi_coords(d);
    const int n = d.n_bins;
    std::vector<std::int64_t> counts(static_cast<std::size_t>(n) * n, 0);
    for (const Coord& a : roi)
        for (const Coord& b : roi)
            if (b.x - a.x == off.dx && b.y - a.y == off.dy && b.z - a.z == off.dz)
                ++counts[static_cast<std::size_t>(label_at(d, a) - 1) * n + (label_at(d, b) - 1)];
    return counts;
}

// Textbook features from a normalized symmetric co-occurrence matrix.
inline std::map<std::string, double> glcm_features_from_p(const std::vector<double>& p, int n) {
    auto P = [&](int i, int j) { return p[static_cast<std::size_t>(i - 1) * n + (j - 1)]; };
    std::vector<double> px(n + 1, 0.0);
    for (int i = 1; i <= n; ++i)
        for (int j = 1; j <= n; ++j) px[i] += P(i, j);
    double mu = 0;
    for (int i = 1; i <= n; ++i) mu += i * px[i];
    double var = 0;
    for (int i = 1; i <= n; ++i) var += (i - mu) * (i - mu) * px[i];

    std::map<std::string, double> f;
    double v;

    v = 0;
    for (int i = 1; i <= n; ++i)
        for (int j = 1; j <= n; ++j) v += i * j * P(i, j);
    f["Autocorrelation"] = v;
    f["JointAverage"] = mu;
    for (int moment : {2, 3, 4}) {
        v = 0;
        for (int i = 1; i <= n; ++i)
            for (int j = 1; j <= n; ++j) v += std::pow(i + j - 2 * mu, moment) * P(i, j);
        f[moment == 2 ? "ClusterTendency" : (moment == 3 ? "ClusterShade" : "ClusterProminence")] = v;
    }
    v = 0;
    for (int i = 1; i <= n; ++i)
        for (int j = 1; j <= n; ++j) v += (i - j) * (i - j) * P(i, j);
    f["Contrast"] = v;
    {
        double acc = 0;
        for (int i = 1; i <= n; ++i)
            for (int j = 1; j <= n; ++j) acc += i * j * P(i, j);
        f["Correlation"] = var > 0 ? (acc - mu * mu) / var : 1.0;
    }
    // sum/difference marginals
    std::map<int, double> psum, pdiff;
    for (int i = 1; i <= n; ++i)
        for (int j = 1; j <= n; ++j) {
            psum[i + j] += P(i, j);
            pdiff[std::abs(i - j)] += P(i, j);
        }
    double da = 0;
    for (const auto& [k, q] : pdiff) da += k * q;
    f["DifferenceAverage"] = da;
    v = 0;
    for (const auto& [k, q] : pdiff)
        if (q > 0) v -= q * std::log2(q);
    f["DifferenceEntropy"] = v;
    v = 0;
    for (const auto& [k, q] : pdiff) v += (k - da) * (k - da) * q;
    f["DifferenceVariance"] = v;
    v = 0;
    for (int i = 1; i <= n; ++i)
        for (int j = 1; j <= n; ++j) v += P(i, j) * P(i, j);
    f["JointEnergy"] = v;
    double hxy = 0;
    for (int i = 1; i <= n; ++i)
        for (int j = 1; j <= n; ++j)
            if (P(i, j) > 0) hxy -= P(i, j) * std::log2(P(i, j));
    f["JointEntropy"] = hxy;
    {
        double hx = 0, hxy1 = 0, hxy2 = 0;
        for (int i = 1; i <= n; ++i) {
            if (px[i] > 0) hx -= px[i] * std::log2(px[i]);
            for (int j = 1; j <= n; ++j) {
                if (px[i] * px[j] > 0) {
                    hxy1 -= P(i, j) * std::log2(px[i] * px[j]);
                    hxy2 -= px[i] * px[j] * std::log2(px[i] * px[j]);
                }
            }
        }
        f["Imc1"] = hx > 0 ? (hxy - hxy1) / hx : 0.0;
        f["Imc2"] = var > 0 ? std::sqrt(std::max(0.0, 1.0 - std::exp(-2.0 * (hxy2 - hxy)))) : 0.0;
    }
    v = 0;
    for (int i = 1; i <= n; ++i)
        for (int j = 1; j <= n; ++j) v += P(i, j) / (1.0 + (i - j) * (i - j));
    f["Idm"] = v;
    v = 0;
    for (int i = 1; i <= n; ++i)
        for (int j = 1; j <= n; ++j) v += P(i, j) / (1.0 + std::abs(i - j));
    f["Id"] = v;
    v = 0;
    for (int i = 1; i <= n; ++i)
        for (int j = 1; j <= n; ++j)
            v += P(i, j) / (1.0 + static_cast<double>((i - j) * (i - j)) / (static_cast<double>(n) * n));
    f["Idmn"] = v;
    v = 0;
    for (int i = 1; i <= n; ++i)
        for (int j = 1; j <= n; ++j) v += P(i, j) / (1.0 + std::abs(i - j) / static_cast<double>(n));
    f["Idn"] = v;
    v = 0;
    for (int i = 1; i <= n; ++i)
        for (int j = 1; j <= n; ++j)
            if (i != j) v += P(i, j) / ((i - j) * (i - j));
    f["InverseVariance"] = v;
    v = 0;
    for (int i = 1; i <= n; ++i)
        for (int j = 1; j <= n; ++j) v = std::max(v, P(i, j));
    f["MaximumProbability"] = v;
    v = 0;
    for (const auto& [k, q] : psum)
        if (q > 0) v -= q * std::log2(q);
    f["SumEntropy"] = v;
    v = 0;
    for (int i = 1; i <= n; ++i)
        for (int j = 1; j <= n; ++j) v += (i - mu) * (i - mu) * P(i, j);
    f["SumSquares"] = v;
    return f;
}

// Per-direction features averaged over directions with pairs, matching the
// library's aggregation contract.
inline std::map<std::string, double> glcm_features(const DiscretizedROI& d) {
    std::map<std::string, double> acc;
    int used = 0;
    for (const Offset3& off : radstab::offsets13()) {
        const std::vector<std::int64_t> c = oracle::glcm_counts(d, off);
        std::int64_t total = 0;
        for (std::int64_t x : c) total += x;
        if (total == 0) continue;
        std::vector<double> p(c.size());
        for (int i = 0; i < d.n_bins; ++i)
            for (int j = 0; j < d.n_bins; ++j)
                p[static_cast<std::size_t>(i) * d.n_bins + j] =
                    static_cast<double>(c[static_cast<std::size_t>(i) * d.n_bins + j] +
                                        c[static_cast<std::size_t>(j) * d.n_bins + i]) /
                    (2.0 * static_cast<double>(total));
        for (const auto& [k, val] : glcm_features_from_p(p, d.n_bins)) acc[k] += val;
        ++used;
    }
    for (auto& [k, val] : acc) val /= used;
    return acc;
}

// ------------------------------------------------------------------ GLRLM

// Runs enumerated by walking whole grid lines and run-length-encoding them.
inline std::map<std::pair<int, int>, std::int64_t> glrlm_counts(const DiscretizedROI& d,
                                                                const Offset3& off) {
    const Geometry& g = d.geom;
    std::map<std::pair<int, int>, std::int64_t> runs;
    for (int z = 0; z < g.dims[2]; ++z)
        for (int y = 0; y < g.dims[1]; ++y)
            for (int x = 0; x < g.dims[0]; ++x) {
                // line start: stepping backwards leaves the grid
                const int bx = x - off.dx, by = y - off.dy, bz = z - off.dz;
                if (g.contains(bx, by, bz)) continue;
                std::vector<int> line;
                int cx = x, cy = y, cz = z;
                while (g.contains(cx, cy, cz)) {
                    line.push_back(d.labels[g.index(cx, cy, cz)]);
                    cx += off.dx;
                    cy += off.dy;
                    cz += off.dz;
                }
                std::size_t i = 0;
                while (i < line.size()) {
                    if (line[i] == 0) {
                        ++i;
                        continue;
                    }
                    std::size_t j = i;
                    while (j < line.size() && line[j] == line[i]) ++j;
                    ++runs[{line[i], static_cast<int>(j - i)}];
                    i = j;
                }
            }
    return runs;
}

// Textbook features from a (level,size) count matrix; shared with GLSZM.
inline std::map<std::string, double> size_matrix_features(
    const std::map<std::pair<int, int>, std::int64_t>& mat, std::size_t n_voxels,
    bool zone_names) {
    double nr = 0;
    for (const auto& [k, c] : mat) nr += static_cast<double>(c);
    std::map<int, double> lev, len;
    for (const auto& [k, c] : mat) {
        lev[k.first] += static_cast<double>(c);
        len[k.second] += static_cast<double>(c);
    }
    auto nm = [&](const char* run, const char* zone) { return std::string(zone_names ? zone : run); };
    std::map<std::string, double> f;
    double v;

    v = 0;
    for (const auto& [k, c] : mat) v += c / (static_cast<double>(k.second) * k.second);
    f[nm("ShortRunEmphasis", "SmallAreaEmphasis")] = v / nr;
    v = 0;
    for (const auto& [k, c] : mat) v += c * static_cast<double>(k.second) * k.second;
    f[nm("LongRunEmphasis", "LargeAreaEmphasis")] = v / nr;
    v = 0;
    for (const auto& [l, c] : lev) v += c * c;
    f["GrayLevelNonUniformity"] = v / nr;
    f["GrayLevelNonUniformityNormalized"] = v / (nr * nr);
    v = 0;
    for (const auto& [l, c] : len) v += c * c;
    f[nm("RunLengthNonUniformity", "SizeZoneNonUniformity")] = v / nr;
    f[nm("RunLengthNonUniformityNormalized", "SizeZoneNonUniformityNormalized")] = v / (nr * nr);
    f[nm("RunPercentage", "ZonePercentage")] = nr / static_cast<double>(n_voxels);
    double mean_lev = 0, mean_len = 0;
    for (const auto& [k, c] : mat) {
        mean_lev += c / nr * k.first;
        mean_len += c / nr * k.second;
    }
    v = 0;
    for (const auto& [k, c] : mat) v += c / nr * (k.first - mean_lev) * (k.first - mean_lev);
    f["GrayLevelVariance"] = v;
    v = 0;
    for (const auto& [k, c] : mat) v += c / nr * (k.second - mean_len) * (k.second - mean_len);
    f[nm("RunVariance", "ZoneVariance")] = v;
    v = 0;
    for (const auto& [k, c] : mat) v -= c / nr * std::log2(c / nr);
    f[nm("RunEntropy", "ZoneEntropy")] = v;
    v = 0;
    for (const auto& [k, c] : mat) v += c / (static_cast<double>(k.first) * k.first);
    f[nm("LowGrayLevelRunEmphasis", "LowGrayLevelZoneEmphasis")] = v / nr;
    v = 0;
    for (const auto& [k, c] : mat) v += c * static_cast<double>(k.first) * k.first;
    f[nm("HighGrayLevelRunEmphasis", "HighGrayLevelZoneEmphasis")] = v / nr;
    v = 0;
    for (const auto& [k, c] : mat)
        v += c / (static_cast<double>(k.first) * k.first * k.second * k.second);
    f[nm("ShortRunLowGrayLevelEmphasis", "SmallAreaLowGrayLevelEmphasis")] = v / nr;
    v = 0;
    for (const auto& [k, c] : mat)
        v += c * static_cast<double>(k.first) * k.first / (static_cast<double>(k.second) * k.second);
    f[nm("ShortRunHighGrayLevelEmphasis", "SmallAreaHighGrayLevelEmphasis")] = v / nr;
    v = 0;
    for (const auto& [k, c] : mat)
        v += c * static_cast<double>(k.second) * k.second / (static_cast<double>(k.first) * k.first);
    f[nm("LongRunLowGrayLevelEmphasis", "LargeAreaLowGrayLevelEmphasis")] = v / nr;
    v = 0;
    for (const auto& [k, c] : mat)
        v += c * static_cast<double>(k.first) * k.first * static_cast<double>(k.second) * k.second;
    f[nm("LongRunHighGrayLevelEmphasis", "LargeAreaHighGrayLevelEmphasis")] = v / nr;
    return f;
}

inline std::map<std::string, double> glrlm_features(const DiscretizedROI& d) {
    std::map<std::string, double> acc;
    int used = 0;
    for (const Offset3& off : radstab::offsets13()) {
        const auto runs = oracle::glrlm_counts(d, off);
        if (runs.empty()) continue;
        for (const auto& [k, val] : size_matrix_features(runs, d.n_voxels, false)) acc[k] += val;
        ++used;
    }
    for (auto& [k, val] : acc) val /= used;
    return acc;
}

// ------------------------------------------------------------------ GLSZM

// Zones via union-find over same-label 26-neighbor pairs.
inline std::map<std::pair<int, int>, std::int64_t> glszm_counts(const DiscretizedROI& d) {
    const std::vector<Coord> roi = roi_coords(d);
    std::vector<std::size_t> parent(roi.size());
    std::iota(parent.begin(), parent.end(), 0);
    std::function<std::size_t(std::size_t)> find = [&](std::size_t a) {
        while (parent[a] != a) {
            parent[a] = parent[parent[a]];
            a = parent[a];
        }
        return a;
    };
    for (std::size_t a = 0; a < roi.size(); ++a)
        for (std::size_t b = a + 1; b < roi.size(); ++b) {
            if (label_at(d, roi[a]) != label_at(d, roi[b])) continue;
            if (std::abs(roi[a].x - roi[b].x) <= 1 && std::abs(roi[a].y - roi[b].y) <= 1 &&
                std::abs(roi[a].z - roi[b].z) <= 1)
                parent[find(a)] = find(b);
        }
    std::map<std::size_t, int> size_of;
    for (std::size_t a = 0; a < roi.size(); ++a) ++size_of[find(a)];
    std::map<std::pair<int, int>, std::int64_t> zones;
    for (const auto& [root, size] : size_of) ++zones[{label_at(d, roi[root]), size}];
    return zones;
}

inline std::map<std::string, double> glszm_features(const DiscretizedROI& d) {
    return size_matrix_features(oracle::glszm_counts(d), d.n_voxels, true);
}

// ------------------------------------------------------------------ NGTDM

struct NgtdmOracleRow {
    std::int64_t count = 0;
    double s = 0.0;
};

inline std::map<int, NgtdmOracleRow> ngtdm_rows(const DiscretizedROI& d) {
    const Geometry& g = d.geom;
    std::map<int, NgtdmOracleRow> rows;
    for (int z = 0; z < g.dims[2]; ++z)
        for (int y = 0; y < g.dims[1]; ++y)
            for (int x = 0; x < g.dims[0]; ++x) {
                const int label = d.labels[g.index(x, y, z)];
                if (!label) continue;
                double sum = 0;
                int cnt = 0;
                for (int dz = -1; dz <= 1; ++dz)
                    for (int dy = -1; dy <= 1; ++dy)
                        for (int dx = -1; dx <= 1; ++dx) {
                            if (!dx && !dy && !dz) continue;
                            if (!g.contains(x + dx, y + dy, z + dz)) continue;
                            const int nb = d.labels[g.index(x + dx, y + dy, z + dz)];
                            if (nb) {
                                sum += nb;
                                ++cnt;
                            }
                        }
                if (cnt == 0) continue;
                rows[label].count += 1;
                rows[label].s += std::abs(label - sum / cnt);
            }
    return rows;
}

inline std::map<std::string, double> ngtdm_features(const DiscretizedROI& d) {
    const auto rows = oracle::ngtdm_rows(d);
    double nvp = 0;
    for (const auto& [l, r] : rows) nvp += static_cast<double>(r.count);
    std::map<std::string, double> f;
    double ps = 0, ssum = 0;
    for (const auto& [l, r] : rows) {
        ps += r.count / nvp * r.s;
        ssum += r.s;
    }
    f["Coarseness"] = ps > 0 ? 1.0 / ps : 1e6;
    const double ngp = static_cast<double>(rows.size());
    double contrast = 0;
    if (rows.size() > 1) {
        double acc = 0;
        for (const auto& [i, a] : rows)
            for (const auto& [j, b] : rows)
                acc += (a.count / nvp) * (b.count / nvp) * (i - j) * (i - j);
        contrast = acc / (ngp * (ngp - 1.0)) * (ssum / nvp);
    }
    f["Contrast"] = contrast;
    double den = 0, complexity = 0, strength = 0;
    for (const auto& [i, a] : rows)
        for (const auto& [j, b] : rows) {
            const double pi = a.count / nvp, pj = b.count / nvp;
            den += std::abs(i * pi - j * pj);
            complexity += std::abs(i - j) * (pi * a.s + pj * b.s) / (pi + pj);
            strength += (pi + pj) * (i - j) * (i - j);
        }
    f["Busyness"] = den > 0 ? ps / den : 0.0;
    f["Complexity"] = complexity / nvp;
    f["Strength"] = ssum > 0 ? strength / ssum : 0.0;
    return f;
}

// ------------------------------------------------------------- statistics

// Two-pass one-way ANOVA ICC oracle.
inline double icc_oneway(const std::vector<std::vector<double>>& x) {
    const double n = static_cast<double>(x.size());
    const double k = static_cast<double>(x[0].size());
    double grand = 0;
    for (const auto& row : x)
        for (double v : row) grand += v;
    grand /= n * k;
    double ssb = 0, ssw = 0;
    for (const auto& row : x) {
        double rm = 0;
        for (double v : row) rm += v;
        rm /= k;
        ssb += k * (rm - grand) * (rm - grand);
        for (double v : row) ssw += (v - rm) * (v - rm);
    }
    const double msb = ssb / (n - 1.0);
    const double msw = ssw / (n * (k - 1.0));
    return (msb - msw) / (msb + (k - 1.0) * msw);
}

// Exhaustive concordance index: literal pair rules over all i<j.
inline double cindex(const std::vector<double>& risk,
                     const std::vector<radstab::SurvivalRecord>& surv) {
    double concordant = 0;
    long long possible = 0;
    const std::size_t n = risk.size();
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            if (surv[i].time == surv[j].time) continue;
            const std::size_t shorter = surv[i].time < surv[j].time ? i : j;
            const std::size_t longer = shorter == i ? j : i;
            if (!surv[shorter].event) continue;
            ++possible;
            if (risk[shorter] > risk[longer])
                concordant += 1.0;
            else if (risk[shorter] == risk[longer])
                concordant += 0.5;
        }
    return concordant / static_cast<double>(possible);
}

// Direct separable circular Haar filter bank (one subband at a time).
// kind[a] selects low (false) or high (true) pass along axis a in (x,y,z).
inline radstab::Volume wavelet_subband(const radstab::Volume& v, const std::array<bool, 3>& kind) {
    const double s = 1.0 / std::sqrt(2.0);
    const double lo[2] = {s, s};
    const double hi[2] = {-s, s};
    radstab::Volume out = radstab::make_volume(v.geom);
    const Dims3& d = v.geom.dims;
    for (int z = 0; z < d[2]; ++z)
        for (int y = 0; y < d[1]; ++y)
            for (int x = 0; x < d[0]; ++x) {
                double acc = 0;
                for (int tx = 0; tx < 2; ++tx)
                    for (int ty = 0; ty < 2; ++ty)
                        for (int tz = 0; tz < 2; ++tz) {
                            const double w = (kind[0] ? hi[tx] : lo[tx]) *
                                             (kind[1] ? hi[ty] : lo[ty]) *
                                             (kind[2] ? hi[tz] : lo[tz]);
                            acc += w * v.at((x + tx) % d[0], (y + ty) % d[1], (z + tz) % d[2]);
                        }
                out.at(x, y, z) = acc;
            }
    return out;
}

// ----------------------------------------------------------------- helpers

inline bool close_rel(double a, double b, double tol) {
    const double scale = std::max({1.0, std::abs(a), std::abs(b)});
    return std::abs(a - b) <= tol * scale;
}

}  // namespace oracle
