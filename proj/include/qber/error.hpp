#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace qber {

/// Stable machine-readable error codes. The names returned by code_name()
/// are part of the API error envelope and the CLI output.
enum class Errc {
    OutOfRange,
    Malformed,
    SchemaVersionUnsupported,
    DanglingReference,
    UnknownId,
    NoFactorRow,
    EmptyFactors,
    ZeroCost,
    CurrencyMismatch,
    InvalidConfig,
    UnknownRef,
    ValidationFailed,
    UnknownEntity,
    StaleCatalog,
    NotFound,
    VersionConflict,
    Io,
    Internal,
};

constexpr std::string_view code_name(Errc code) noexcept {
    switch (code) {
    case Errc::OutOfRange: return "OUT_OF_RANGE";
    case Errc::Malformed: return "MALFORMED";
    case Errc::SchemaVersionUnsupported: return "SCHEMA_VERSION_UNSUPPORTED";
    case Errc::DanglingReference: return "DANGLING_REFERENCE";
    case Errc::UnknownId: return "UNKNOWN_ID";
    case Errc::NoFactorRow: return "NO_FACTOR_ROW";
    case Errc::EmptyFactors: return "EMPTY_FACTORS";
    case Errc::ZeroCost: return "ZERO_COST";
    case Errc::CurrencyMismatch: return "CURRENCY_MISMATCH";
    case Errc::InvalidConfig: return "INVALID_CONFIG";
    case Errc::UnknownRef: return "UNKNOWN_REF";
    case Errc::ValidationFailed: return "VALIDATION_FAILED";
    case Errc::UnknownEntity: return "UNKNOWN_ENTITY";
    case Errc::StaleCatalog: return "STALE_CATALOG";
    case Errc::NotFound: return "NOT_FOUND";
    case Errc::VersionConflict: return "VERSION_CONFLICT";
    case Errc::Io: return "IO_ERROR";
    case Errc::Internal: return "INTERNAL";
    }
    return "INTERNAL";
}

/// Exception carrying a code plus optional detail strings (offending ids,
/// JSON pointers, validation violations).
class Error : public std::runtime_error {
public:
    Error(Errc code, std::string message, std::vector<std::string> details = {})
        : std::runtime_error(std::string(code_name(code)) + ": " + message),
          code_(code),
          message_(std::move(message)),
          details_(std::move(details)) {}

    Errc code() const noexcept { return code_; }
    const std::string& message() const noexcept { return message_; }
    const std::vector<std::string>& details() const noexcept { return details_; }

private:
    Errc code_;
    std::string message_;
    std::vector<std::string> details_;
};

} // namespace qber
