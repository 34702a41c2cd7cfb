#pragma once
// Voxel-based 3D shape descriptors. Surface area counts exposed voxel faces;
// diameters use surface-voxel centers; axis lengths come from the eigenvalues
// of the population covariance of voxel-center physical coordinates (length
// = 4*sqrt(lambda)). These voxel approximations carry a known bias relative
// to mesh-based definitions but are exactly reproducible.

#include <algorithm>
#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "radstab/feature_block.hpp"
#include "radstab/neighborhood.hpp"
#include "radstab/volume.hpp"

namespace radstab {

inline const std::vector<std::string>& shape_feature_names() {
    static const std::vector<std::string> k = {
        "VoxelVolume",   "SurfaceArea",  "SurfaceVolumeRatio",
        "Sphericity",    "Compactness1", "Compactness2",
        "Maximum3DDiameter", "Maximum2DDiameterSlice", "Maximum2DDiameterColumn",
        "Maximum2DDiameterRow", "MajorAxisLength", "MinorAxisLength",
        "LeastAxisLength", "Elongation",  "Flatness"};
    return k;
}

namespace detail {

// Eigenvalues of a symmetric 3x3 matrix by cyclic Jacobi sweeps, descending.
inline std::array<double, 3> symmetric_eigenvalues3(std::array<std::array<double, 3>, 3> a) {
    for (int sweep = 0; sweep < 50; ++sweep) {
        double off = std::abs(a[0][1]) + std::abs(a[0][2]) + std::abs(a[1][2]);
        if (off < 1e-15) break;
        for (int p = 0; p < 3; ++p)
            for (int q = p + 1; q < 3; ++q) {
                if (std::abs(a[p][q]) < 1e-18) continue;
                const double theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                const double t = (theta >= 0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (int r = 0; r < 3; ++r) {
                    const double arp = a[r][p], arq = a[r][q];
                    a[r][p] = c * arp - s * arq;
                    a[r][q] = s * arp + c * arq;
                }
                for (int r = 0; r < 3; ++r) {
                    const double apr = a[p][r], aqr = a[q][r];
                    a[p][r] = c * apr - s * aqr;
                    a[q][r] = s * apr + c * aqr;
                }
            }
    }
    std::array<double, 3> ev = {a[0][0], a[1][1], a[2][2]};
    std::sort(ev.begin(), ev.end(), std::greater<double>());
    return ev;
}

inline double max_pair_distance(const std::vector<std::array<double, 3>>& pts) {
    double best = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i)
        for (std::size_t j = i + 1; j < pts.size(); ++j) {
            const double dx = pts[i][0] - pts[j][0];
            const double dy = pts[i][1] - pts[j][1];
            const double dz = pts[i][2] - pts[j][2];
            best = std::max(best, dx * dx + dy * dy + dz * dz);
        }
    return std::sqrt(best);
}

}  // namespace detail

inline FeatureBlock shape_features(const Mask& m) {
    if (m.empty()) throw input_error("shape_features: empty mask");
    const Geometry& g = m.geom;
    const Vec3& sp = g.spacing;
    const double n = static_cast<double>(m.foreground);

    // Surface area: faces against background or the grid border. Face area
    // depends on the face orientation for anisotropic grids.
    const double face_area[3] = {sp[1] * sp[2], sp[0] * sp[2], sp[0] * sp[1]};
    double area = 0.0;
    std::vector<std::array<double, 3>> surface;  // physical centers of surface voxels
    double sum[3] = {0, 0, 0};
    for (int z = 0; z < g.dims[2]; ++z)
        for (int y = 0; y < g.dims[1]; ++y)
            for (int x = 0; x < g.dims[0]; ++x) {
                if (!m.voxels[g.index(x, y, z)]) continue;
                bool exposed = false;
                for (const Offset3& o : offsets6()) {
                    const int nx = x + o.dx, ny = y + o.dy, nz = z + o.dz;
                    if (!g.contains(nx, ny, nz) || !m.voxels[g.index(nx, ny, nz)]) {
                        area += face_area[o.dx != 0 ? 0 : (o.dy != 0 ? 1 : 2)];
                        exposed = true;
                    }
                }
                const std::array<double, 3> p = {g.physical(0, x), g.physical(1, y),
                                                 g.physical(2, z)};
                if (exposed) surface.push_back(p);
                sum[0] += p[0];
                sum[1] += p[1];
                sum[2] += p[2];
            }

    const double volume = n * g.voxel_volume();
    const double pi = 3.14159265358979323846;
    const double sphericity = std::cbrt(36.0 * pi * volume * volume) / area;

    // In-plane diameters: per slice, points with a missing in-plane 4-neighbor
    // suffice (hull extreme points are never strictly interior).
    auto planar_diameter = [&](int plane_axis, int ax_a, int ax_b) {
        double best = 0.0;
        for (int s = 0; s < g.dims[plane_axis]; ++s) {
            std::vector<std::array<double, 3>> pts;
            int idx[3];
            idx[plane_axis] = s;
            for (int b = 0; b < g.dims[ax_b]; ++b)
                for (int a = 0; a < g.dims[ax_a]; ++a) {
                    idx[ax_a] = a;
                    idx[ax_b] = b;
                    if (!m.voxels[g.index(idx[0], idx[1], idx[2])]) continue;
                    bool boundary = false;
                    for (int axis : {ax_a, ax_b})
                        for (int step : {-1, 1}) {
                            int q[3] = {idx[0], idx[1], idx[2]};
                            q[axis] += step;
                            if (!g.contains(q[0], q[1], q[2]) ||
                                !m.voxels[g.index(q[0], q[1], q[2])]) {
                                boundary = true;
                            }
                        }
                    if (boundary)
                        pts.push_back({g.physical(0, idx[0]), g.physical(1, idx[1]),
                                       g.physical(2, idx[2])});
                }
            best = std::max(best, detail::max_pair_distance(pts));
        }
        return best;
    };
    const double diam_slice = planar_diameter(2, 0, 1);   // axial: xy per z
    const double diam_column = planar_diameter(1, 0, 2);  // coronal: xz per y
    const double diam_row = planar_diameter(0, 1, 2);     // sagittal: yz per x

    // Population covariance of voxel centers.
    const double mean_pt[3] = {sum[0] / n, sum[1] / n, sum[2] / n};
    std::array<std::array<double, 3>, 3> cov{};
    for (int z = 0; z < g.dims[2]; ++z)
        for (int y = 0; y < g.dims[1]; ++y)
            for (int x = 0; x < g.dims[0]; ++x) {
                if (!m.voxels[g.index(x, y, z)]) continue;
                const double c[3] = {g.physical(0, x) - mean_pt[0],
                                     g.physical(1, y) - mean_pt[1],
                                     g.physical(2, z) - mean_pt[2]};
                for (int a = 0; a < 3; ++a)
                    for (int b = 0; b < 3; ++b) cov[a][b] += c[a] * c[b];
            }
    for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) cov[a][b] /= n;
    std::array<double, 3> ev = detail::symmetric_eigenvalues3(cov);
    for (double& e : ev) e = std::max(e, 0.0);  // clip tiny negative round-off

    const bool degenerate = (ev[0] <= 0.0);
    FeatureBlock out;
    out.push(volume);                                            // VoxelVolume
    out.push(area);                                              // SurfaceArea
    out.push(area / volume);                                     // SurfaceVolumeRatio
    out.push(sphericity);                                        // Sphericity
    out.push(volume / (std::sqrt(pi) * std::pow(area, 1.5)));    // Compactness1
    out.push(36.0 * pi * volume * volume / (area * area * area));  // Compactness2
    out.push(detail::max_pair_distance(surface));                // Maximum3DDiameter
    out.push(diam_slice);                                        // Maximum2DDiameterSlice
    out.push(diam_column);                                       // Maximum2DDiameterColumn
    out.push(diam_row);                                          // Maximum2DDiameterRow
    out.push(4.0 * std::sqrt(ev[0]));                            // MajorAxisLength
    out.push(4.0 * std::sqrt(ev[1]));                            // MinorAxisLength
    out.push(4.0 * std::sqrt(ev[2]));                            // LeastAxisLength
    out.push(degenerate ? 0.0 : std::sqrt(ev[1] / ev[0]), degenerate);  // Elongation
    out.push(degenerate ? 0.0 : std::sqrt(ev[2] / ev[0]), degenerate);  // Flatness
    return out;
}

}  // namespace radstab
