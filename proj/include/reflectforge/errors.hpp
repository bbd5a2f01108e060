#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace reflectforge {

// Error classes map one-to-one onto CLI exit codes.
enum class ErrorClass { config = 2, io = 3, gateway = 4, validation = 5 };

class Error : public std::runtime_error {
public:
    Error(ErrorClass cls, const std::string& msg) : std::runtime_error(msg), cls_(cls) {}
    ErrorClass error_class() const noexcept { return cls_; }
    int exit_code() const noexcept { return static_cast<int>(cls_); }

private:
    ErrorClass cls_;
};

struct ConfigError : Error {
    explicit ConfigError(const std::string& m) : Error(ErrorClass::config, m) {}
};

struct IoError : Error {
    explicit IoError(const std::string& m) : Error(ErrorClass::io, m) {}
};

struct GatewayError : Error {
    explicit GatewayError(const std::string& m) : Error(ErrorClass::gateway, m) {}
};

struct ValidationError : Error {
    explicit ValidationError(const std::string& m) : Error(ErrorClass::validation, m) {}
};

// Close marker seen with no open marker before it.
struct MalformedTraceError : ValidationError {
    MalformedTraceError(std::size_t close_off, std::size_t open_off, const std::string& m)
        : ValidationError(m), close_offset(close_off), open_offset(open_off) {}
    std::size_t close_offset;
    std::size_t open_offset;
};

struct NoAnswerError : ValidationError {
    explicit NoAnswerError(const std::string& m) : ValidationError(m) {}
};

struct MalformedAnswerError : ValidationError {
    explicit MalformedAnswerError(const std::string& m) : ValidationError(m) {}
};

struct DomainError : ValidationError {
    explicit DomainError(const std::string& m) : ValidationError(m) {}
};

struct BalancingError : ValidationError {
    BalancingError(std::size_t avail_ic, std::size_t avail_cc, const std::string& m)
        : ValidationError(m), available_i_to_c(avail_ic), available_c_to_c(avail_cc) {}
    std::size_t available_i_to_c;
    std::size_t available_c_to_c;
};

struct VerdictParseError : ValidationError {
    explicit VerdictParseError(const std::string& m) : ValidationError(m) {}
};

// Prompt template missing a required placeholder.
struct TemplateError : ConfigError {
    explicit TemplateError(const std::string& m) : ConfigError(m) {}
};

}  // namespace reflectforge
