#pragma once

#include <stdexcept>
#include <string>

namespace propdb {

/// Base class for every error raised by the library. The CLI maps the
/// concrete subclasses onto distinct exit codes.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent input data (schema, TSV rows, FDs).
class DataError : public Error {
public:
    using Error::Error;
};

/// Query text that does not parse or violates query invariants.
class QueryError : public Error {
public:
    using Error::Error;
};

/// Caller passed arguments outside an operation's contract.
class UsageError : public Error {
public:
    using Error::Error;
};

/// Exact inference was asked for an instance beyond the variable limit.
class OracleInfeasible : public Error {
public:
    using Error::Error;
};

} // namespace propdb
