#pragma once

#include <stdexcept>
#include <string>

namespace t2v {

// Invalid user input (bad config key, malformed file, bad flag) -> exit 1.
struct config_error : std::runtime_error {
    explicit config_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Non-finite loss or other mid-run failure -> exit 2.
struct training_diverged : std::runtime_error {
    explicit training_diverged(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace t2v
