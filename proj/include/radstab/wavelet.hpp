#pragma once
// Single-level undecimated (stationary) separable Haar transform with
// periodic boundary extension. Analysis filters L = [1/sqrt2, 1/sqrt2] and
// H = [-1/sqrt2, 1/sqrt2]; out[n] = f0*x[n] + f1*x[(n+1) mod N]. Subband
// names give the filter per axis in (x, y, z) order, so "HLH" is high-pass
// along x and z, low-pass along y. Subbands keep the input geometry.

#include <array>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "radstab/volume.hpp"

namespace radstab {

struct WaveletSubband {
    std::string name;  // "LLL" .. "HHH"
    Volume volume;
};

inline const std::array<std::string, 8>& wavelet_subband_names() {
    static const std::array<std::string, 8> k = {"LLL", "LLH", "LHL", "LHH",
                                                 "HLL", "HLH", "HHL", "HHH"};
    return k;
}

namespace detail {

// Applies one Haar analysis filter pair along `axis`, producing (low, high).
inline std::pair<Volume, Volume> haar_axis_pass(const Volume& v, int axis) {
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    Volume low = v, high = v;
    const Dims3& d = v.geom.dims;
    const int n = d[axis];
    int idx[3];
    for (idx[2] = 0; idx[2] < d[2]; ++idx[2])
        for (idx[1] = 0; idx[1] < d[1]; ++idx[1])
            for (idx[0] = 0; idx[0] < d[0]; ++idx[0]) {
                int nb[3] = {idx[0], idx[1], idx[2]};
                nb[axis] = (idx[axis] + 1) % n;
                const double a = v.data[v.geom.index(idx[0], idx[1], idx[2])];
                const double b = v.data[v.geom.index(nb[0], nb[1], nb[2])];
                const std::size_t out = v.geom.index(idx[0], idx[1], idx[2]);
                low.data[out] = (a + b) * inv_sqrt2;
                high.data[out] = (b - a) * inv_sqrt2;
            }
    return {std::move(low), std::move(high)};
}

}  // namespace detail

inline std::array<WaveletSubband, 8> wavelet_subbands(const Volume& v) {
    validate_volume(v);
    // filter-bank pyramid: x pass, then y, then z
    std::vector<std::pair<std::string, Volume>> bands = {{"", v}};
    for (int axis = 0; axis < 3; ++axis) {
        std::vector<std::pair<std::string, Volume>> next;
        next.reserve(bands.size() * 2);
        for (auto& [name, vol] : bands) {
            auto [low, high] = detail::haar_axis_pass(vol, axis);
            next.emplace_back(name + "L", std::move(low));
            next.emplace_back(name + "H", std::move(high));
        }
        bands = std::move(next);
    }
    std::array<WaveletSubband, 8> out;
    for (std::size_t i = 0; i < 8; ++i) {
        const std::string& want = wavelet_subband_names()[i];
        for (auto& [name, vol] : bands) {
            if (name == want) {
                out[i] = {name, std::move(vol)};
                break;
            }
        }
    }
    return out;
}

}  // namespace radstab
