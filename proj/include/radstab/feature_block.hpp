#pragma once

#include <cstdint>
#include <vector>

namespace radstab {

// Values produced by one feature family, with a parallel undefined flag.
// Degenerate inputs emit a conventional limit value (never NaN) and set the
// flag, keeping downstream tables rectangular.
struct FeatureBlock {
    std::vector<double> values;
    std::vector<std::uint8_t> undefined;

    void push(double v, bool undef = false) {
        values.push_back(v);
        undefined.push_back(undef ? 1 : 0);
    }
};

}  // namespace radstab
