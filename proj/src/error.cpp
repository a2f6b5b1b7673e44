#include "sbsim/error.hpp"

namespace sbsim {

std::string_view to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::RaggedGrid: return "RaggedGrid";
        case ErrorCode::UnknownGlyph: return "UnknownGlyph";
        case ErrorCode::DisconnectedZone: return "DisconnectedZone";
        case ErrorCode::NoInterior: return "NoInterior";
        case ErrorCode::UnknownDeviceType: return "UnknownDeviceType";
        case ErrorCode::DiffuserOutsideZone: return "DiffuserOutsideZone";
        case ErrorCode::DuplicateDeviceId: return "DuplicateDeviceId";
        case ErrorCode::MissingSingleton: return "MissingSingleton";
        case ErrorCode::BoundsViolation: return "BoundsViolation";
        case ErrorCode::ConfigError: return "ConfigError";
        case ErrorCode::NonFiniteTemperature: return "NonFiniteTemperature";
        case ErrorCode::ActuatorLimitViolation: return "ActuatorLimitViolation";
        case ErrorCode::MissingZoneReading: return "MissingZoneReading";
        case ErrorCode::SeriesGap: return "SeriesGap";
        case ErrorCode::MisalignedTimestamp: return "MisalignedTimestamp";
        case ErrorCode::DuplicateRecord: return "DuplicateRecord";
        case ErrorCode::UnknownZone: return "UnknownZone";
        case ErrorCode::ZoneSetMismatch: return "ZoneSetMismatch";
        case ErrorCode::DataError: return "DataError";
        case ErrorCode::InvalidArgument: return "InvalidArgument";
    }
    return "Unknown";
}

bool is_config_error(ErrorCode code) {
    switch (code) {
        case ErrorCode::RaggedGrid:
        case ErrorCode::UnknownGlyph:
        case ErrorCode::DisconnectedZone:
        case ErrorCode::NoInterior:
        case ErrorCode::UnknownDeviceType:
        case ErrorCode::DiffuserOutsideZone:
        case ErrorCode::DuplicateDeviceId:
        case ErrorCode::MissingSingleton:
        case ErrorCode::BoundsViolation:
        case ErrorCode::ConfigError:
            return true;
        default:
            return false;
    }
}

Error::Error(ErrorCode code, const std::string& message, std::string file, int line)
    : std::runtime_error(std::string(to_string(code)) + ": " + message),
      code_(code),
      message_(message),
      file_(std::move(file)),
      line_(line) {}

std::string Error::diagnostic() const {
    std::string out;
    if (!file_.empty()) {
        out += file_;
        if (line_ > 0) out += ":" + std::to_string(line_);
        out += ": ";
    } else if (line_ > 0) {
        out += "line " + std::to_string(line_) + ": ";
    }
    out += to_string(code_);
    out += ": ";
    out += message_;
    return out;
}

Error Error::with_file(std::string file) const {
    return Error(code_, message_, std::move(file), line_);
}

}  // namespace sbsim
