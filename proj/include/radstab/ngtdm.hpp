#pragma once
// Neighborhood gray tone difference matrix over the 26-neighborhood. A voxel
// contributes when at least one of its neighbors lies in the ROI; s_i
// accumulates |level - neighborhood mean| per gray level.

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "radstab/discretize.hpp"
#include "radstab/feature_block.hpp"
#include "radstab/neighborhood.hpp"

namespace radstab {

inline const std::vector<std::string>& ngtdm_feature_names() {
    static const std::vector<std::string> k = {"Coarseness", "Contrast", "Busyness",
                                               "Complexity", "Strength"};
    return k;
}

struct NgtdmRow {
    int level = 0;
    std::int64_t count = 0;  // n_i
    double probability = 0;  // p_i
    double sum_abs_diff = 0; // s_i
};

inline std::vector<NgtdmRow> ngtdm_rows(const DiscretizedROI& d) {
    const Geometry& g = d.geom;
    std::vector<std::int64_t> counts(static_cast<std::size_t>(d.n_bins) + 1, 0);
    std::vector<double> s(static_cast<std::size_t>(d.n_bins) + 1, 0.0);
    std::int64_t n_valid = 0;
    for (std::size_t idx : d.roi_indices) {
        const std::int32_t label = d.labels[idx];
        const int x = static_cast<int>(idx % g.dims[0]);
        const int y = static_cast<int>((idx / g.dims[0]) % g.dims[1]);
        const int z = static_cast<int>(idx / (static_cast<std::size_t>(g.dims[0]) * g.dims[1]));
        double sum = 0.0;
        int n = 0;
        for (const Offset3& o : offsets26()) {
            const int nx = x + o.dx, ny = y + o.dy, nz = z + o.dz;
            if (!g.contains(nx, ny, nz)) continue;
            const std::int32_t nb = d.labels[g.index(nx, ny, nz)];
            if (nb) {
                sum += nb;
                ++n;
            }
        }
        if (n == 0) continue;  // isolated voxel has no neighborhood
        ++counts[static_cast<std::size_t>(label)];
        ++n_valid;
        s[static_cast<std::size_t>(label)] += std::abs(label - sum / n);
    }

    std::vector<NgtdmRow> rows;
    for (int l = 1; l <= d.n_bins; ++l) {
        const std::int64_t c = counts[static_cast<std::size_t>(l)];
        if (c == 0) continue;
        rows.push_back({l, c, static_cast<double>(c) / static_cast<double>(n_valid),
                        s[static_cast<std::size_t>(l)]});
    }
    return rows;
}

inline FeatureBlock ngtdm_features(const DiscretizedROI& d) {
    const std::vector<NgtdmRow> rows = ngtdm_rows(d);
    FeatureBlock out;
    if (rows.empty()) {
        // every ROI voxel isolated: no gray tone differences measurable
        out.push(1e6, true);
        for (int i = 0; i < 4; ++i) out.push(0.0, true);
        return out;
    }

    double n_valid = 0, ps_sum = 0, s_sum = 0;
    for (const NgtdmRow& r : rows) {
        n_valid += static_cast<double>(r.count);
        ps_sum += r.probability * r.sum_abs_diff;
        s_sum += r.sum_abs_diff;
    }
    const std::size_t n_levels = rows.size();

    const bool coarse_undef = (ps_sum == 0.0);
    const double coarseness = coarse_undef ? 1e6 : 1.0 / ps_sum;

    double contrast = 0.0;
    if (n_levels > 1) {
        double acc = 0.0;
        for (const NgtdmRow& a : rows)
            for (const NgtdmRow& b : rows)
                acc += a.probability * b.probability * (a.level - b.level) * (a.level - b.level);
        contrast = acc / (static_cast<double>(n_levels) * (static_cast<double>(n_levels) - 1.0)) *
                   (s_sum / n_valid);
    }

    double busy_den = 0.0, complexity = 0.0, strength_num = 0.0;
    for (const NgtdmRow& a : rows)
        for (const NgtdmRow& b : rows) {
            busy_den += std::abs(a.level * a.probability - b.level * b.probability);
            complexity += std::abs(a.level - b.level) *
                          (a.probability * a.sum_abs_diff + b.probability * b.sum_abs_diff) /
                          (a.probability + b.probability);
            strength_num += (a.probability + b.probability) * (a.level - b.level) *
                            (a.level - b.level);
        }
    const bool busy_undef = (busy_den == 0.0);
    const double busyness = busy_undef ? 0.0 : ps_sum / busy_den;
    complexity /= n_valid;
    const bool strength_undef = (s_sum == 0.0);
    const double strength = strength_undef ? 0.0 : strength_num / s_sum;

    out.push(coarseness, coarse_undef);
    out.push(contrast);
    out.push(busyness, busy_undef);
    out.push(complexity);
    out.push(strength, strength_undef);
    return out;
}

}  // namespace radstab
