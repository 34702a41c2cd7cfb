#pragma once

#include <stdexcept>
#include <string>

namespace radstab {

// Malformed user input (files, configs, CLI arguments). The CLI maps this to
// exit code 2; everything else that escapes maps to 1.
struct input_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace radstab
