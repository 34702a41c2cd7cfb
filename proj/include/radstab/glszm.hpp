#pragma once
// Gray level size zone matrix: zones are 26-connected components of
// equal-label ROI voxels. Zones partition the ROI, so sum(zones * size)
// equals N_roi. A single matrix is built (no directions).

#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "radstab/discretize.hpp"
#include "radstab/feature_block.hpp"
#include "radstab/glrlm.hpp"
#include "radstab/neighborhood.hpp"

namespace radstab {

inline const std::vector<std::string>& glszm_feature_names() {
    static const std::vector<std::string> k = {
        "SmallAreaEmphasis", "LargeAreaEmphasis",
        "GrayLevelNonUniformity", "GrayLevelNonUniformityNormalized",
        "SizeZoneNonUniformity", "SizeZoneNonUniformityNormalized",
        "ZonePercentage", "GrayLevelVariance", "ZoneVariance", "ZoneEntropy",
        "LowGrayLevelZoneEmphasis", "HighGrayLevelZoneEmphasis",
        "SmallAreaLowGrayLevelEmphasis", "SmallAreaHighGrayLevelEmphasis",
        "LargeAreaLowGrayLevelEmphasis", "LargeAreaHighGrayLevelEmphasis"};
    return k;
}

// (gray level, zone size) -> zone count.
inline std::map<std::pair<int, int>, std::int64_t> glszm_counts(const DiscretizedROI& d) {
    const Geometry& g = d.geom;
    std::map<std::pair<int, int>, std::int64_t> zones;
    std::vector<std::uint8_t> visited(d.labels.size(), 0);
    std::vector<std::size_t> stack;
    for (std::size_t seed : d.roi_indices) {
        if (visited[seed]) continue;
        const std::int32_t label = d.labels[seed];
        int size = 0;
        visited[seed] = 1;
        stack.assign(1, seed);
        while (!stack.empty()) {
            const std::size_t idx = stack.back();
            stack.pop_back();
            ++size;
            const int x = static_cast<int>(idx % g.dims[0]);
            const int y = static_cast<int>((idx / g.dims[0]) % g.dims[1]);
            const int z = static_cast<int>(idx / (static_cast<std::size_t>(g.dims[0]) * g.dims[1]));
            for (const Offset3& o : offsets26()) {
                const int nx = x + o.dx, ny = y + o.dy, nz = z + o.dz;
                if (!g.contains(nx, ny, nz)) continue;
                const std::size_t nidx = g.index(nx, ny, nz);
                if (!visited[nidx] && d.labels[nidx] == label) {
                    visited[nidx] = 1;
                    stack.push_back(nidx);
                }
            }
        }
        ++zones[{label, size}];
    }
    return zones;
}

inline FeatureBlock glszm_features(const DiscretizedROI& d) {
    FeatureBlock out;
    detail::size_matrix_features(glszm_counts(d), d.n_voxels, out);
    return out;
}

}  // namespace radstab
