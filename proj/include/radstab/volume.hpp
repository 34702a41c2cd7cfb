#pragma once
// 3D scalar volumes and binary masks on axis-aligned grids. Data is stored
// x-fastest; physical position of voxel (i,j,k) is origin + (i,j,k)*spacing.
// Both types are plain values: copy freely, never mutate shared instances.

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "radstab/errors.hpp"

namespace radstab {

using Dims3 = std::array<int, 3>;
using Vec3 = std::array<double, 3>;

struct Geometry {
    Dims3 dims{0, 0, 0};
    Vec3 spacing{1.0, 1.0, 1.0};
    Vec3 origin{0.0, 0.0, 0.0};

    std::size_t voxel_count() const {
        return static_cast<std::size_t>(dims[0]) * static_cast<std::size_t>(dims[1]) *
               static_cast<std::size_t>(dims[2]);
    }
    std::size_t index(int x, int y, int z) const {
        return static_cast<std::size_t>(x) +
               static_cast<std::size_t>(dims[0]) *
                   (static_cast<std::size_t>(y) +
                    static_cast<std::size_t>(dims[1]) * static_cast<std::size_t>(z));
    }
    bool contains(int x, int y, int z) const {
        return x >= 0 && x < dims[0] && y >= 0 && y < dims[1] && z >= 0 && z < dims[2];
    }
    double physical(int axis, int i) const { return origin[axis] + spacing[axis] * i; }
    double voxel_volume() const { return spacing[0] * spacing[1] * spacing[2]; }

    friend bool operator==(const Geometry&, const Geometry&) = default;
};

inline void validate_geometry(const Geometry& g) {
    for (int a = 0; a < 3; ++a) {
        if (g.dims[a] <= 0) throw input_error("geometry: non-positive dimension");
        if (!(g.spacing[a] > 0.0) || !std::isfinite(g.spacing[a]))
            throw input_error("geometry: spacing must be positive and finite");
        if (!std::isfinite(g.origin[a])) throw input_error("geometry: non-finite origin");
    }
}

struct Volume {
    Geometry geom;
    std::vector<double> data;  // x-fastest

    double at(int x, int y, int z) const { return data[geom.index(x, y, z)]; }
    double& at(int x, int y, int z) { return data[geom.index(x, y, z)]; }
};

inline Volume make_volume(const Geometry& g, double fill = 0.0) {
    validate_geometry(g);
    return Volume{g, std::vector<double>(g.voxel_count(), fill)};
}

inline void validate_volume(const Volume& v) {
    validate_geometry(v.geom);
    if (v.data.size() != v.geom.voxel_count())
        throw input_error("volume: data length does not match dims");
    for (double x : v.data)
        if (!std::isfinite(x)) throw input_error("volume: non-finite data");
}

struct Mask {
    Geometry geom;
    std::vector<std::uint8_t> voxels;  // 0/1, x-fastest
    std::size_t foreground = 0;        // cached; call recount() after editing voxels

    bool empty() const { return foreground == 0; }
    std::uint8_t at(int x, int y, int z) const { return voxels[geom.index(x, y, z)]; }

    void recount() {
        std::size_t n = 0;
        for (std::uint8_t v : voxels) n += (v != 0);
        foreground = n;
    }
};

inline Mask make_mask(const Geometry& g, std::vector<std::uint8_t> voxels) {
    validate_geometry(g);
    if (voxels.size() != g.voxel_count())
        throw input_error("mask: voxel array length does not match dims");
    Mask m{g, std::move(voxels), 0};
    for (std::uint8_t& v : m.voxels) v = (v != 0);
    m.recount();
    return m;
}

inline Mask make_mask(const Geometry& g) { return make_mask(g, std::vector<std::uint8_t>(g.voxel_count(), 0)); }

inline void require_same_geometry(const Geometry& a, const Geometry& b, const std::string& what) {
    if (!(a == b)) throw input_error(what + ": geometry mismatch");
}

inline bool same_voxels(const Mask& a, const Mask& b) {
    return a.geom == b.geom && a.voxels == b.voxels;
}

}  // namespace radstab
