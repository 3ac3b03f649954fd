#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace mfhrr {

// Base of every error the library raises.  `kind()` is a stable tag used by
// the CLI diagnostics and by tests.
class Error : public std::runtime_error {
public:
    Error(std::string kind, const std::string& what)
        : std::runtime_error(what), kind_(std::move(kind)) {}
    const std::string& kind() const noexcept { return kind_; }

private:
    std::string kind_;
};

class SyntaxError : public Error {
public:
    SyntaxError(std::size_t offset, const std::string& msg)
        : Error("syntax", "syntax error at offset " + std::to_string(offset) + ": " + msg),
          offset_(offset) {}
    std::size_t offset() const noexcept { return offset_; }

private:
    std::size_t offset_;
};

#define MFHRR_DEFINE_ERROR(Name, tag)                                            \
    class Name : public Error {                                                  \
    public:                                                                      \
        explicit Name(const std::string& what) : Error(tag, what) {}             \
    }

MFHRR_DEFINE_ERROR(UnknownVariable, "unknown-variable");
MFHRR_DEFINE_ERROR(IndexError, "index");
MFHRR_DEFINE_ERROR(ShapeMismatch, "shape-mismatch");
MFHRR_DEFINE_ERROR(TruncationMismatch, "truncation-mismatch");
MFHRR_DEFINE_ERROR(RingMismatch, "ring-mismatch");
MFHRR_DEFINE_ERROR(FactorizationError, "factorization");
MFHRR_DEFINE_ERROR(PotentialMismatch, "potential-mismatch");
MFHRR_DEFINE_ERROR(ResourceExceeded, "resource-exceeded");
MFHRR_DEFINE_ERROR(NotZeroDimensional, "not-zero-dimensional");
MFHRR_DEFINE_ERROR(NotMember, "not-a-member");
MFHRR_DEFINE_ERROR(InfiniteDimension, "infinite-dimension");
MFHRR_DEFINE_ERROR(NonContainment, "non-containment");
MFHRR_DEFINE_ERROR(IsolatedSingularityError, "isolated-singularity");
MFHRR_DEFINE_ERROR(ParityError, "parity");
MFHRR_DEFINE_ERROR(VerificationFailure, "verification-failure");
MFHRR_DEFINE_ERROR(CalibrationMismatch, "calibration-mismatch");
MFHRR_DEFINE_ERROR(NonNilpotent, "non-nilpotent");
MFHRR_DEFINE_ERROR(InputError, "input");
MFHRR_DEFINE_ERROR(InternalError, "internal");

#undef MFHRR_DEFINE_ERROR

}  // namespace mfhrr
