#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace hsom {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Caller handed us data that violates an operation's preconditions.
class InvalidInput : public Error {
public:
    using Error::Error;
};

/// Filesystem-level failure (missing file, unreadable stream, ...).
class IoError : public Error {
public:
    using Error::Error;
};

/// A training task failed; carries the tree path of the offending node.
class TrainingFailed : public Error {
public:
    TrainingFailed(const std::string& message, std::vector<std::size_t> node_path)
        : Error(message + " (node path: " + format_path(node_path) + ")"),
          node_path_(std::move(node_path)) {}

    const std::vector<std::size_t>& node_path() const noexcept { return node_path_; }

private:
    static std::string format_path(const std::vector<std::size_t>& path) {
        if (path.empty()) return "root";
        std::string out = "root";
        for (std::size_t idx : path) {
            out += '/';
            out += std::to_string(idx);
        }
        return out;
    }

    std::vector<std::size_t> node_path_;
};

}  // namespace hsom
