#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace xlb {

enum class ErrorKind {
    unreadable_source,
    unsupported_language,
    site_not_in_unit,
    invalid_config,
    api_auth,
    rate_limited,
    api_unavailable,
    checkout_failed,
    file_vanished,
    root_commit,
    empty_after_stripping,
    already_split,
    empty_dataset,
    malformed_input,
    interrupted,
};

std::string_view to_string(ErrorKind kind);

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(message), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

// Carries the server-reported wait so callers can reschedule.
class RateLimitedError : public Error {
public:
    RateLimitedError(const std::string& message, long retry_after_seconds)
        : Error(ErrorKind::rate_limited, message), retry_after_(retry_after_seconds) {}

    long retry_after_seconds() const noexcept { return retry_after_; }

private:
    long retry_after_;
};

}  // namespace xlb
