#pragma once
// Voxel neighborhood offset tables shared by morphology and texture code.

#include <array>

namespace radstab {

struct Offset3 {
    int dx = 0, dy = 0, dz = 0;
};

// Face neighbors.
inline const std::array<Offset3, 6>& offsets6() {
    static const std::array<Offset3, 6> k = {{{-1, 0, 0},
                                              {1, 0, 0},
                                              {0, -1, 0},
                                              {0, 1, 0},
                                              {0, 0, -1},
                                              {0, 0, 1}}};
    return k;
}

// All 26 neighbors at Chebyshev distance 1.
inline const std::array<Offset3, 26>& offsets26() {
    static const std::array<Offset3, 26> k = [] {
        std::array<Offset3, 26> out{};
        int n = 0;
        for (int dz = -1; dz <= 1; ++dz)
            for (int dy = -1; dy <= 1; ++dy)
                for (int dx = -1; dx <= 1; ++dx) {
                    if (dx == 0 && dy == 0 && dz == 0) continue;
                    out[n++] = {dx, dy, dz};
                }
        return out;
    }();
    return k;
}

// One representative per +/- pair of the 26 neighbors: the 13 unique
// directions used by co-occurrence and run-length scans.
inline const std::array<Offset3, 13>& offsets13() {
    static const std::array<Offset3, 13> k = [] {
        std::array<Offset3, 13> out{};
        int n = 0;
        for (const Offset3& o : offsets26()) {
            if (o.dz > 0 || (o.dz == 0 && o.dy > 0) ||
                (o.dz == 0 && o.dy == 0 && o.dx > 0)) {
                out[n++] = o;
            }
        }
        return out;
    }();
    return k;
}

}  // namespace radstab
