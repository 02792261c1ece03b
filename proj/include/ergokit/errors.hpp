#pragma once

#include <stdexcept>
#include <string>

namespace ergo {

// Base class for all toolkit errors.
class toolkit_error : public std::runtime_error {
public:
    explicit toolkit_error(const std::string& what) : std::runtime_error(what) {}
};

// Model/rank/domain mismatches and malformed objects.
class structural_error : public toolkit_error {
public:
    explicit structural_error(const std::string& what) : toolkit_error(what) {}
};

// Bad experiment configuration (unknown preset, missing key, wrong type).
class config_error : public toolkit_error {
public:
    explicit config_error(const std::string& what) : toolkit_error(what) {}
};

// A pipeline hypothesis check failed; no downstream claim may be emitted.
class hypothesis_error : public toolkit_error {
public:
    explicit hypothesis_error(const std::string& what) : toolkit_error(what) {}
};

// A proved inequality came out violated. Carries a witness description;
// by construction this indicates an implementation bug.
class inequality_failure : public toolkit_error {
public:
    inequality_failure(const std::string& what, std::string witness)
        : toolkit_error(what + " | witness: " + witness), witness_(std::move(witness)) {}
    const std::string& witness() const { return witness_; }

private:
    std::string witness_;
};

} // namespace ergo
