#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace ssf {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Input or configuration violates a documented contract.
class ValidationError : public Error {
public:
    explicit ValidationError(const std::string& msg, std::vector<std::string> violations = {})
        : Error(msg), violations_(std::move(violations)) {}

    const std::vector<std::string>& violations() const noexcept { return violations_; }

private:
    std::vector<std::string> violations_;
};

/// A stage was asked to run before the stage that produces its input.
class MissingArtifactError : public Error {
public:
    MissingArtifactError(const std::string& path, const std::string& producer)
        : Error("missing artifact " + path + ": run " + producer + " first"),
          producer_(producer) {}

    const std::string& producer() const noexcept { return producer_; }

private:
    std::string producer_;
};

/// Backend unreachable or retries exhausted.
class TransportError : public Error {
public:
    using Error::Error;
};

/// Backend answered, but not in the shape we asked for.
class ProtocolError : public Error {
public:
    using Error::Error;
};

}  // namespace ssf
