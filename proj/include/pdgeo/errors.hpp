#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>

namespace pdgeo {

// Base of every error raised by the library. The CLI maps the three families
// below onto distinct exit codes.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Invalid configuration or malformed input data (exit code 2).
class ConfigError : public Error {
public:
    using Error::Error;
};

// Failures of a score provider: transport, protocol, or provider-reported (exit code 3).
class ProviderError : public Error {
public:
    enum class Kind { Transport, Malformed, DimensionMismatch, Reported, Capability };

    ProviderError(Kind kind, std::string message, std::optional<std::int64_t> request_id = {})
        : Error(format(kind, message, request_id)), kind_(kind), request_id_(request_id), detail_(std::move(message)) {}

    Kind kind() const noexcept { return kind_; }
    std::optional<std::int64_t> request_id() const noexcept { return request_id_; }
    // The message without the kind and request prefix.
    const std::string& detail() const noexcept { return detail_; }

private:
    static std::string format(Kind kind, const std::string& message,
                              std::optional<std::int64_t> id) {
        static constexpr const char* names[] = {"transport failure", "malformed response",
                                                "dimension mismatch", "provider error",
                                                "missing capability"};
        std::string out = names[static_cast<int>(kind)];
        if (id) out += " (request " + std::to_string(*id) + ")";
        return out + ": " + message;
    }

    Kind kind_;
    std::optional<std::int64_t> request_id_;
    std::string detail_;
};

// Numerical failures: points outside a domain, degenerate geometry (exit code 4).
class NumericalError : public Error {
public:
    using Error::Error;
};

class DomainError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class DegenerateError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

}  // namespace pdgeo
