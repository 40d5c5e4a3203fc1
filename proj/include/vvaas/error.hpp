#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace vvaas {

enum class ErrorCode {
    InvalidArgument,
    DuplicateRegistration,
    UnknownVehicle,
    UnknownVirtualVehicle,
    NoCoverage,
    NoHostAvailable,
    InvalidLifecycle,
    NotInZone,
    SchedulingInPast,
    ParseError,
    ConfigError,
    IoError,
    InvariantViolation,
};

std::string_view to_string(ErrorCode code);

// Every recoverable failure in the library is reported through this type;
// callers branch on code() rather than on message text.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace vvaas
