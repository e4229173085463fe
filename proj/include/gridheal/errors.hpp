#pragma once

#include <stdexcept>
#include <string>

namespace gridheal {

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Scenario document is malformed: schema violation, dangling reference,
/// duplicate id. The message names the offending path or entity.
class ParseError : public Error {
public:
    using Error::Error;
};

/// The attached solver backend rejected the model or failed.
class BackendError : public Error {
public:
    using Error::Error;
};

/// A solution could not be mapped back onto a RestorationPlan.
class ExtractionError : public Error {
public:
    explicit ExtractionError(const std::string& what, std::string tag = {})
        : Error(what), constraint_tag(std::move(tag)) {}

    std::string constraint_tag;
};

/// Brute-force oracle refused the instance (limits exceeded or an
/// enumerated topology connects more than one DG).
class OracleError : public Error {
public:
    using Error::Error;
};

} // namespace gridheal
