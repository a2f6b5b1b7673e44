#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace sbsim {

enum class ErrorCode {
    // configuration errors (CLI exit 2)
    RaggedGrid,
    UnknownGlyph,
    DisconnectedZone,
    NoInterior,
    UnknownDeviceType,
    DiffuserOutsideZone,
    DuplicateDeviceId,
    MissingSingleton,
    BoundsViolation,
    ConfigError,
    // runtime / data errors (CLI exit 3)
    NonFiniteTemperature,
    ActuatorLimitViolation,
    MissingZoneReading,
    SeriesGap,
    MisalignedTimestamp,
    DuplicateRecord,
    UnknownZone,
    ZoneSetMismatch,
    DataError,
    InvalidArgument,
};

std::string_view to_string(ErrorCode code);

bool is_config_error(ErrorCode code);

/// Error raised by every sbsim module. Carries a machine-readable code and,
/// for parse errors, the offending file and 1-based line (0 when unknown).
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message, std::string file = {}, int line = 0);

    ErrorCode code() const noexcept { return code_; }
    const std::string& file() const noexcept { return file_; }
    int line() const noexcept { return line_; }
    const std::string& message() const noexcept { return message_; }

    /// "file:line: Code: message" with empty parts omitted.
    std::string diagnostic() const;

    Error with_file(std::string file) const;

private:
    ErrorCode code_;
    std::string message_;
    std::string file_;
    int line_;
};

}  // namespace sbsim
