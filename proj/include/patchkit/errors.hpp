#pragma once

#include <stdexcept>
#include <string>

namespace patchkit {

/// Base class for all toolkit errors.
class error : public std::runtime_error {
public:
    explicit error(const std::string& what) : std::runtime_error(what) {}
};

/// A caller-supplied value violates an operation's precondition
/// (non-positive width, mismatched list lengths, malformed angles, ...).
class invalid_input : public error {
public:
    explicit invalid_input(const std::string& what) : error(what) {}
};

/// Patch synthesis produced a non-physical dimension (the open-end
/// extension consumed the whole half-wavelength).
class synthesis_infeasible : public error {
public:
    explicit synthesis_infeasible(const std::string& what) : error(what) {}
};

/// A network evaluation hit a singular denominator (parallel resonance
/// exactly at a swept frequency).
class resonant_singularity : public error {
public:
    explicit resonant_singularity(const std::string& what) : error(what) {}
};

/// Structured-text input could not be parsed; message carries line and
/// field diagnostics.
class parse_error : public error {
public:
    explicit parse_error(const std::string& what) : error(what) {}
};

/// A file could not be read or written.
class io_error : public error {
public:
    explicit io_error(const std::string& what) : error(what) {}
};

/// An iterative search ended without meeting its convergence contract;
/// message names the best achieved offset.
class non_convergence : public error {
public:
    explicit non_convergence(const std::string& what) : error(what) {}
};

} // namespace patchkit
