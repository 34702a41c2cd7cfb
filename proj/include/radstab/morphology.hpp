#pragma once
// Binary morphology on masks. The structuring element is the 6-neighborhood
// cross; out-of-grid neighbors count as background throughout.

#include <cstdint>
#include <vector>

#include "radstab/neighborhood.hpp"
#include "radstab/volume.hpp"

namespace radstab {

namespace detail {

template <typename Pred>
inline std::vector<std::uint8_t> map_with_neighbors6(const Mask& m, Pred pred) {
    const Dims3& d = m.geom.dims;
    std::vector<std::uint8_t> out(m.voxels.size());
    std::size_t idx = 0;
    for (int z = 0; z < d[2]; ++z)
        for (int y = 0; y < d[1]; ++y)
            for (int x = 0; x < d[0]; ++x, ++idx) {
                int fg_neighbors = 0;
                for (const Offset3& o : offsets6()) {
                    const int nx = x + o.dx, ny = y + o.dy, nz = z + o.dz;
                    if (m.geom.contains(nx, ny, nz) && m.voxels[m.geom.index(nx, ny, nz)])
                        ++fg_neighbors;
                }
                out[idx] = pred(m.voxels[idx] != 0, fg_neighbors);
            }
    return out;
}

}  // namespace detail

inline Mask dilate6(const Mask& m, int radius = 1) {
    Mask cur = m;
    for (int r = 0; r < radius; ++r) {
        cur.voxels = detail::map_with_neighbors6(
            cur, [](bool fg, int n) -> std::uint8_t { return fg || n > 0; });
    }
    cur.recount();
    return cur;
}

inline Mask erode6(const Mask& m, int radius = 1) {
    Mask cur = m;
    for (int r = 0; r < radius; ++r) {
        cur.voxels = detail::map_with_neighbors6(
            cur, [](bool fg, int n) -> std::uint8_t { return fg && n == 6; });
    }
    cur.recount();
    return cur;
}

// Majority vote over self + 6 neighbors (7 votes, so no ties).
inline Mask majority_smooth6(const Mask& m, int passes = 1) {
    Mask cur = m;
    for (int p = 0; p < passes; ++p) {
        cur.voxels = detail::map_with_neighbors6(
            cur, [](bool fg, int n) -> std::uint8_t { return (n + (fg ? 1 : 0)) >= 4; });
    }
    cur.recount();
    return cur;
}

// Foreground voxels with at least one background 6-neighbor, plus background
// voxels with at least one foreground 6-neighbor, as linear indices in scan
// order. Used by the boundary-flip perturbation.
inline std::vector<std::size_t> boundary_voxels6(const Mask& m) {
    const Dims3& d = m.geom.dims;
    std::vector<std::size_t> out;
    std::size_t idx = 0;
    for (int z = 0; z < d[2]; ++z)
        for (int y = 0; y < d[1]; ++y)
            for (int x = 0; x < d[0]; ++x, ++idx) {
                const bool fg = m.voxels[idx] != 0;
                bool boundary = false;
                for (const Offset3& o : offsets6()) {
                    const int nx = x + o.dx, ny = y + o.dy, nz = z + o.dz;
                    const bool nb_fg =
                        m.geom.contains(nx, ny, nz) && m.voxels[m.geom.index(nx, ny, nz)];
                    if (nb_fg != fg) {
                        boundary = true;
                        break;
                    }
                }
                if (boundary) out.push_back(idx);
            }
    return out;
}

struct Components {
    std::vector<std::int32_t> labels;  // 0 = background, components numbered from 1
    int count = 0;
};

// 26-connected components of the foreground, labeled in scan order.
inline Components connected_components26(const Mask& m) {
    const Dims3& d = m.geom.dims;
    Components cc;
    cc.labels.assign(m.voxels.size(), 0);
    std::vector<std::size_t> stack;
    for (std::size_t seed = 0; seed < m.voxels.size(); ++seed) {
        if (!m.voxels[seed] || cc.labels[seed]) continue;
        const std::int32_t label = ++cc.count;
        cc.labels[seed] = label;
        stack.assign(1, seed);
        while (!stack.empty()) {
            const std::size_t idx = stack.back();
            stack.pop_back();
            const int x = static_cast<int>(idx % d[0]);
            const int y = static_cast<int>((idx / d[0]) % d[1]);
            const int z = static_cast<int>(idx / (static_cast<std::size_t>(d[0]) * d[1]));
            for (const Offset3& o : offsets26()) {
                const int nx = x + o.dx, ny = y + o.dy, nz = z + o.dz;
                if (!m.geom.contains(nx, ny, nz)) continue;
                const std::size_t nidx = m.geom.index(nx, ny, nz);
                if (m.voxels[nidx] && !cc.labels[nidx]) {
                    cc.labels[nidx] = label;
                    stack.push_back(nidx);
                }
            }
        }
    }
    return cc;
}

// Keeps only the 26-connected component with the largest overlap with
// `reference` (ties go to the component discovered first). Empty masks pass
// through unchanged.
inline Mask largest_overlap_component(const Mask& m, const Mask& reference) {
    require_same_geometry(m.geom, reference.geom, "largest_overlap_component");
    if (m.empty()) return m;
    const Components cc = connected_components26(m);
    std::vector<std::size_t> overlap(static_cast<std::size_t>(cc.count) + 1, 0);
    std::vector<std::size_t> size(static_cast<std::size_t>(cc.count) + 1, 0);
    for (std::size_t i = 0; i < m.voxels.size(); ++i) {
        if (!cc.labels[i]) continue;
        ++size[cc.labels[i]];
        if (reference.voxels[i]) ++overlap[cc.labels[i]];
    }
    int best = 1;
    for (int c = 2; c <= cc.count; ++c)
        if (overlap[c] > overlap[best]) best = c;
    Mask out{m.geom, std::vector<std::uint8_t>(m.voxels.size(), 0), 0};
    for (std::size_t i = 0; i < m.voxels.size(); ++i) out.voxels[i] = (cc.labels[i] == best);
    out.recount();
    return out;
}

}  // namespace radstab
