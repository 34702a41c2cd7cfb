#pragma once
// Geometric resampling onto a new voxel spacing. Output dims use ceil so the
// physical extent never shrinks; samples are taken at output voxel centers
// mapped through physical space; out-of-domain samples clamp to the nearest
// edge voxel. Images interpolate trilinearly, masks use nearest neighbor
// (ties round toward the larger index).

#include <cmath>
#include <utility>

#include "radstab/volume.hpp"

namespace radstab {

enum class ResampleMode { ImageLinear, MaskNearest };

namespace detail {

inline Geometry resampled_geometry(const Geometry& in, const Vec3& target) {
    Geometry out = in;
    for (int a = 0; a < 3; ++a) {
        if (!(target[a] > 0.0)) throw input_error("resample: target spacing must be positive");
        const double extent = static_cast<double>(in.dims[a]) * in.spacing[a] / target[a];
        const int n = static_cast<int>(std::ceil(extent - 1e-9));
        if (n <= 0) throw input_error("resample: degenerate output dims");
        out.dims[a] = n;
        out.spacing[a] = target[a];
    }
    return out;
}

// Continuous input index of output voxel j along one axis (origin cancels).
inline double input_coord(int j, double target, double spacing, int in_dim) {
    double u = static_cast<double>(j) * target / spacing;
    if (u < 0.0) u = 0.0;
    const double hi = static_cast<double>(in_dim - 1);
    if (u > hi) u = hi;
    return u;
}

inline int nearest_index(double u, int in_dim) {
    int i = static_cast<int>(std::floor(u + 0.5));
    if (i < 0) i = 0;
    if (i > in_dim - 1) i = in_dim - 1;
    return i;
}

}  // namespace detail

inline Volume resample(const Volume& v, const Vec3& target_spacing, ResampleMode mode) {
    validate_geometry(v.geom);
    const Geometry out_geom = detail::resampled_geometry(v.geom, target_spacing);
    if (out_geom.dims == v.geom.dims && out_geom.spacing == v.geom.spacing) return v;

    Volume out = make_volume(out_geom);
    const Dims3& id = v.geom.dims;
    for (int z = 0; z < out_geom.dims[2]; ++z) {
        const double uz = detail::input_coord(z, target_spacing[2], v.geom.spacing[2], id[2]);
        for (int y = 0; y < out_geom.dims[1]; ++y) {
            const double uy = detail::input_coord(y, target_spacing[1], v.geom.spacing[1], id[1]);
            for (int x = 0; x < out_geom.dims[0]; ++x) {
                const double ux = detail::input_coord(x, target_spacing[0], v.geom.spacing[0], id[0]);
                if (mode == ResampleMode::MaskNearest) {
                    out.at(x, y, z) = v.at(detail::nearest_index(ux, id[0]),
                                           detail::nearest_index(uy, id[1]),
                                           detail::nearest_index(uz, id[2]));
                    continue;
                }
                const int x0 = std::min(static_cast<int>(std::floor(ux)), id[0] - 1);
                const int y0 = std::min(static_cast<int>(std::floor(uy)), id[1] - 1);
                const int z0 = std::min(static_cast<int>(std::floor(uz)), id[2] - 1);
                const int x1 = std::min(x0 + 1, id[0] - 1);
                const int y1 = std::min(y0 + 1, id[1] - 1);
                const int z1 = std::min(z0 + 1, id[2] - 1);
                const double tx = ux - x0, ty = uy - y0, tz = uz - z0;
                const double c00 = v.at(x0, y0, z0) * (1 - tx) + v.at(x1, y0, z0) * tx;
                const double c10 = v.at(x0, y1, z0) * (1 - tx) + v.at(x1, y1, z0) * tx;
                const double c01 = v.at(x0, y0, z1) * (1 - tx) + v.at(x1, y0, z1) * tx;
                const double c11 = v.at(x0, y1, z1) * (1 - tx) + v.at(x1, y1, z1) * tx;
                const double c0 = c00 * (1 - ty) + c10 * ty;
                const double c1 = c01 * (1 - ty) + c11 * ty;
                out.at(x, y, z) = c0 * (1 - tz) + c1 * tz;
            }
        }
    }
    return out;
}

inline Mask resample_mask(const Mask& m, const Vec3& target_spacing) {
    validate_geometry(m.geom);
    const Geometry out_geom = detail::resampled_geometry(m.geom, target_spacing);
    if (out_geom.dims == m.geom.dims && out_geom.spacing == m.geom.spacing) return m;

    std::vector<std::uint8_t> vox(out_geom.voxel_count());
    const Dims3& id = m.geom.dims;
    std::size_t n = 0;
    for (int z = 0; z < out_geom.dims[2]; ++z) {
        const int iz = detail::nearest_index(
            detail::input_coord(z, target_spacing[2], m.geom.spacing[2], id[2]), id[2]);
        for (int y = 0; y < out_geom.dims[1]; ++y) {
            const int iy = detail::nearest_index(
                detail::input_coord(y, target_spacing[1], m.geom.spacing[1], id[1]), id[1]);
            for (int x = 0; x < out_geom.dims[0]; ++x) {
                const int ix = detail::nearest_index(
                    detail::input_coord(x, target_spacing[0], m.geom.spacing[0], id[0]), id[0]);
                vox[n++] = m.at(ix, iy, iz);
            }
        }
    }
    Mask out{out_geom, std::move(vox), 0};
    out.recount();
    return out;
}

inline std::pair<Volume, Mask> resample_pair(const Volume& v, const Mask& m,
                                             const Vec3& target_spacing) {
    require_same_geometry(v.geom, m.geom, "resample_pair");
    return {resample(v, target_spacing, ResampleMode::ImageLinear),
            resample_mask(m, target_spacing)};
}

}  // namespace radstab
