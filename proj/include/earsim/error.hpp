#pragma once

#include <stdexcept>
#include <string>

namespace earsim {

// Error vocabulary shared between the engine and the wire protocol.
enum class ErrorCode {
    bad_request,
    bad_seq,
    capacity_full,
    not_found,
    dead_stream,
    unknown_category,
    malformed_signature,
    unknown_pattern,
    parse_error,
    invalid_argument,
    io_error,
};

const char* to_string(ErrorCode code);

class EarError : public std::runtime_error {
public:
    EarError(ErrorCode code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    ErrorCode code() const { return code_; }

private:
    ErrorCode code_;
};

} // namespace earsim
