#pragma once
// Gray level run length matrices: maximal collinear runs of equal label along
// each of the 13 directions. Per direction the weighted run count satisfies
// sum(runs * length) == N_roi since every ROI voxel lies in exactly one run.
// Features are computed per direction and averaged.

#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "radstab/discretize.hpp"
#include "radstab/feature_block.hpp"
#include "radstab/neighborhood.hpp"

namespace radstab {

inline const std::vector<std::string>& glrlm_feature_names() {
    static const std::vector<std::string> k = {
        "ShortRunEmphasis", "LongRunEmphasis",
        "GrayLevelNonUniformity", "GrayLevelNonUniformityNormalized",
        "RunLengthNonUniformity", "RunLengthNonUniformityNormalized",
        "RunPercentage", "GrayLevelVariance", "RunVariance", "RunEntropy",
        "LowGrayLevelRunEmphasis", "HighGrayLevelRunEmphasis",
        "ShortRunLowGrayLevelEmphasis", "ShortRunHighGrayLevelEmphasis",
        "LongRunLowGrayLevelEmphasis", "LongRunHighGrayLevelEmphasis"};
    return k;
}

// (gray level, run length) -> run count, for one direction.
inline std::map<std::pair<int, int>, std::int64_t> glrlm_counts(const DiscretizedROI& d,
                                                                const Offset3& off) {
    const Geometry& g = d.geom;
    std::map<std::pair<int, int>, std::int64_t> runs;
    for (std::size_t idx : d.roi_indices) {
        const std::int32_t label = d.labels[idx];
        const int x = static_cast<int>(idx % g.dims[0]);
        const int y = static_cast<int>((idx / g.dims[0]) % g.dims[1]);
        const int z = static_cast<int>(idx / (static_cast<std::size_t>(g.dims[0]) * g.dims[1]));
        // run start: predecessor along the direction is absent or differs
        const int px = x - off.dx, py = y - off.dy, pz = z - off.dz;
        if (g.contains(px, py, pz) && d.labels[g.index(px, py, pz)] == label) continue;
        int len = 1;
        int cx = x + off.dx, cy = y + off.dy, cz = z + off.dz;
        while (g.contains(cx, cy, cz) && d.labels[g.index(cx, cy, cz)] == label) {
            ++len;
            cx += off.dx;
            cy += off.dy;
            cz += off.dz;
        }
        ++runs[{label, len}];
    }
    return runs;
}

namespace detail {

// Shared by GLRLM and GLSZM: both are (level, size)-indexed count matrices
// with the same emphasis/nonuniformity feature algebra.
inline void size_matrix_features(const std::map<std::pair<int, int>, std::int64_t>& counts,
                                 std::size_t n_roi_voxels, FeatureBlock& out) {
    double n_runs = 0;
    std::map<int, double> by_level, by_length;
    for (const auto& [key, c] : counts) {
        n_runs += static_cast<double>(c);
        by_level[key.first] += static_cast<double>(c);
        by_length[key.second] += static_cast<double>(c);
    }

    double sre = 0, lre = 0, lgl = 0, hgl = 0, srlgl = 0, srhgl = 0, lrlgl = 0, lrhgl = 0;
    double mean_level = 0, mean_length = 0, entropy = 0;
    for (const auto& [key, c] : counts) {
        const double i = key.first;
        const double l = key.second;
        const double p = static_cast<double>(c) / n_runs;
        sre += p / (l * l);
        lre += p * l * l;
        lgl += p / (i * i);
        hgl += p * i * i;
        srlgl += p / (i * i * l * l);
        srhgl += p * i * i / (l * l);
        lrlgl += p * l * l / (i * i);
        lrhgl += p * i * i * l * l;
        mean_level += p * i;
        mean_length += p * l;
        entropy -= p * std::log2(p);
    }
    double gln = 0, rln = 0;
    for (const auto& [level, c] : by_level) gln += c * c;
    for (const auto& [len, c] : by_length) rln += c * c;
    double glv = 0, rv = 0;
    for (const auto& [key, c] : counts) {
        const double p = static_cast<double>(c) / n_runs;
        glv += p * (key.first - mean_level) * (key.first - mean_level);
        rv += p * (key.second - mean_length) * (key.second - mean_length);
    }

    out.push(sre);
    out.push(lre);
    out.push(gln / n_runs);
    out.push(gln / (n_runs * n_runs));
    out.push(rln / n_runs);
    out.push(rln / (n_runs * n_runs));
    out.push(n_runs / static_cast<double>(n_roi_voxels));
    out.push(glv);
    out.push(rv);
    out.push(entropy);
    out.push(lgl);
    out.push(hgl);
    out.push(srlgl);
    out.push(srhgl);
    out.push(lrlgl);
    out.push(lrhgl);
}

}  // namespace detail

inline FeatureBlock glrlm_features(const DiscretizedROI& d) {
    std::vector<double> sums(glrlm_feature_names().size(), 0.0);
    int used = 0;
    for (const Offset3& off : offsets13()) {
        const auto runs = glrlm_counts(d, off);
        if (runs.empty()) continue;  // cannot happen for a nonempty ROI
        FeatureBlock dir;
        detail::size_matrix_features(runs, d.n_voxels, dir);
        for (std::size_t i = 0; i < sums.size(); ++i) sums[i] += dir.values[i];
        ++used;
    }
    FeatureBlock out;
    for (double s : sums) out.push(used > 0 ? s / used : 0.0, used == 0);
    return out;
}

}  // namespace radstab
