#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace privmeter {

/// Process exit codes shared by the library's error types and the CLI.
enum class ExitCode : int { kOk = 0, kUsage = 1, kData = 2, kNumeric = 3 };

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
    [[nodiscard]] virtual ExitCode exit_code() const noexcept = 0;
};

/// Invalid parameters or precondition violations caused by the caller.
class UsageError : public Error {
public:
    using Error::Error;
    [[nodiscard]] ExitCode exit_code() const noexcept override { return ExitCode::kUsage; }
};

/// Malformed, inconsistent or insufficient input data.
class DataError : public Error {
public:
    using Error::Error;
    [[nodiscard]] ExitCode exit_code() const noexcept override { return ExitCode::kData; }
};

/// A genotype call whose letters match neither allele of its frequency record.
class EncodingError : public DataError {
public:
    EncodingError(std::string rsid, const std::string& what)
        : DataError(what), rsid_(std::move(rsid)) {}
    [[nodiscard]] const std::string& rsid() const noexcept { return rsid_; }

private:
    std::string rsid_;
};

class NumericError : public Error {
public:
    using Error::Error;
    [[nodiscard]] ExitCode exit_code() const noexcept override { return ExitCode::kNumeric; }
};

/// Non-fatal per-line problem found while parsing a file. Line numbers are 1-based.
struct Diagnostic {
    std::size_t line = 0;
    std::string message;
};

template <typename T>
struct ParseResult {
    T value;
    std::vector<Diagnostic> diagnostics;
};

}  // namespace privmeter
