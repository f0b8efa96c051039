#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace spotlight {

// Base for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Precondition violated by the caller (bad kernel size, zero dims, ...).
class InvalidArgument : public Error {
public:
    using Error::Error;
};

class DimensionMismatch : public InvalidArgument {
public:
    using InvalidArgument::InvalidArgument;
};

// Shadow geometry could not be constructed (light below horizon, ...).
class GeometryError : public Error {
public:
    using Error::Error;
};

// Raised by the sampler when the denoiser fails at a given step.
class DenoiserError : public Error {
public:
    DenoiserError(int step, const std::string& what)
        : Error("denoiser failed at step " + std::to_string(step) + ": " + what), step_(step) {}
    int step() const noexcept { return step_; }

private:
    int step_;
};

// Non-finite latent detected; the run is aborted.
class NumericalAbort : public Error {
public:
    NumericalAbort(int step, const std::string& what)
        : Error("non-finite latent at step " + std::to_string(step) + ": " + what), step_(step) {}
    int step() const noexcept { return step_; }

private:
    int step_;
};

// Connection refused, timeout, peer closed. Safe to retry.
class TransportError : public Error {
public:
    using Error::Error;
};

// Bad magic, bad length, malformed payload. The stream is unusable afterwards.
class ProtocolError : public Error {
public:
    using Error::Error;
};

// The remote answered with an ERROR frame. Not retryable.
class RemoteError : public Error {
public:
    RemoteError(std::uint32_t code, const std::string& message)
        : Error("remote error " + std::to_string(code) + ": " + message), code_(code) {}
    std::uint32_t code() const noexcept { return code_; }

private:
    std::uint32_t code_;
};

}  // namespace spotlight
