#pragma once
// Fixed-bin-width gray value discretization of the voxels inside a mask.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "radstab/volume.hpp"

namespace radstab {

struct DiscretizedROI {
    Geometry geom;
    std::vector<std::int32_t> labels;      // 0 outside the ROI, 1..n_bins inside
    std::vector<std::size_t> roi_indices;  // linear indices of ROI voxels, ascending
    int n_bins = 0;
    double bin_width = 0.0;
    double roi_min = 0.0;  // intensity origin of bin 1
    double voxel_volume = 0.0;
    std::size_t n_voxels = 0;  // ROI size
};

// label(x) = floor((x - roi_min)/bin_width) + 1; the ROI maximum lands in the
// top bin. Labels are clamped into [1, n_bins] to absorb floating-point edge
// effects at exact bin boundaries.
inline DiscretizedROI discretize(const Volume& v, const Mask& m, double bin_width) {
    require_same_geometry(v.geom, m.geom, "discretize");
    if (m.empty()) throw input_error("discretize: empty mask");
    if (!(bin_width > 0.0)) throw input_error("discretize: bin_width must be positive");

    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < m.voxels.size(); ++i) {
        if (!m.voxels[i]) continue;
        lo = std::min(lo, v.data[i]);
        hi = std::max(hi, v.data[i]);
    }

    DiscretizedROI d;
    d.geom = v.geom;
    d.bin_width = bin_width;
    d.roi_min = lo;
    d.voxel_volume = v.geom.voxel_volume();
    d.n_voxels = m.foreground;
    d.n_bins = static_cast<int>(std::floor((hi - lo) / bin_width)) + 1;
    d.labels.assign(v.data.size(), 0);
    d.roi_indices.reserve(m.foreground);
    for (std::size_t i = 0; i < m.voxels.size(); ++i) {
        if (!m.voxels[i]) continue;
        int label = static_cast<int>(std::floor((v.data[i] - lo) / bin_width)) + 1;
        label = std::max(1, std::min(label, d.n_bins));
        d.labels[i] = label;
        d.roi_indices.push_back(i);
    }
    return d;
}

}  // namespace radstab
