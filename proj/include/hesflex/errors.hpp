#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace hes {

// Base of every error thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Argument outside the mathematical domain of an operation (negative irradiance, negative PV).
class DomainError : public Error {
public:
    using Error::Error;
};

// Caller broke a precondition (simultaneous charge and discharge, power above rating).
class ContractViolation : public Error {
public:
    using Error::Error;
};

// Requested deviation lies outside the scenario's flexibility envelope.
class InfeasibleDispatch : public Error {
public:
    using Error::Error;
};

// Malformed or inconsistent input series.
class InputError : public Error {
public:
    using Error::Error;
};

// Score undefined: zero capacity or zero signal mass.
class UndefinedScore : public Error {
public:
    using Error::Error;
};

// Data missing or too short for the requested run (empty season-hour group).
class DataError : public InputError {
public:
    using InputError::InputError;
};

class ParseError : public InputError {
public:
    ParseError(std::string path, std::size_t line, const std::string& what)
        : InputError(path + ":" + std::to_string(line) + ": " + what),
          path_(std::move(path)),
          line_(line) {}

    const std::string& path() const noexcept { return path_; }
    std::size_t line() const noexcept { return line_; }

private:
    std::string path_;
    std::size_t line_;
};

class IoError : public Error {
public:
    IoError(std::string path, const std::string& what)
        : Error(what + ": " + path), path_(std::move(path)) {}

    const std::string& path() const noexcept { return path_; }

private:
    std::string path_;
};

// Carries every problem found while validating a configuration, not just the first.
class ConfigError : public Error {
public:
    explicit ConfigError(std::vector<std::string> problems)
        : Error(join(problems)), problems_(std::move(problems)) {}

    const std::vector<std::string>& problems() const noexcept { return problems_; }

private:
    static std::string join(const std::vector<std::string>& items) {
        std::string out = "invalid configuration";
        for (const auto& item : items) {
            out += "\n  - ";
            out += item;
        }
        return out;
    }

    std::vector<std::string> problems_;
};

}  // namespace hes
