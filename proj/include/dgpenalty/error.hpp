#pragma once

#include <stdexcept>
#include <string>

namespace dgp {

enum class ErrorKind {
    InvalidArgument,
    InvalidMaterial,
    InvalidScheme,
    IncompressibleUnsupported,
    SingularMatrix,
    RigidModeSingular,
    NoStableBeta,
    TrainingDiverged,
    NonFinite,
    SchemaMismatch,
    Io,
};

const char* to_string(ErrorKind kind) noexcept;

/// Exception carrying a machine-checkable category alongside the message.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind)
    {
    }

    [[nodiscard]] ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

inline const char* to_string(ErrorKind kind) noexcept
{
    switch (kind) {
    case ErrorKind::InvalidArgument: return "invalid-argument";
    case ErrorKind::InvalidMaterial: return "invalid-material";
    case ErrorKind::InvalidScheme: return "invalid-scheme";
    case ErrorKind::IncompressibleUnsupported: return "incompressible-unsupported";
    case ErrorKind::SingularMatrix: return "singular-matrix";
    case ErrorKind::RigidModeSingular: return "rigid-mode-singular";
    case ErrorKind::NoStableBeta: return "no-stable-beta";
    case ErrorKind::TrainingDiverged: return "training-diverged";
    case ErrorKind::NonFinite: return "non-finite";
    case ErrorKind::SchemaMismatch: return "schema-mismatch";
    case ErrorKind::Io: return "io";
    }
    return "unknown";
}

} // namespace dgp
