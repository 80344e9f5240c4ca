#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace fedgrid {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Raised while validating a scenario or run configuration. field() names the
// offending key, e.g. "groups[2].house_count".
class ValidationError : public Error {
public:
    ValidationError(std::string field, const std::string& what)
        : Error(field + ": " + what), field_(std::move(field)) {}

    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

class ParseError : public Error {
public:
    using Error::Error;
};

class DatasetError : public Error {
public:
    using Error::Error;
};

class AggregationError : public Error {
public:
    using Error::Error;
};

class NonFiniteWeightsError : public Error {
public:
    using Error::Error;
};

class ContractViolation : public Error {
public:
    using Error::Error;
};

class LedgerError : public Error {
public:
    using Error::Error;
};

class ReportError : public Error {
public:
    using Error::Error;
};

} // namespace fedgrid
