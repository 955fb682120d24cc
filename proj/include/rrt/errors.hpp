#pragma once

#include <stdexcept>
#include <string>

namespace rrt {

/// Broad error families. The CLI maps each family to a process exit code.
enum class ErrorFamily {
    config,     // exit 2
    data,       // exit 3
    numerical,  // exit 4
};

class Error : public std::runtime_error {
public:
    Error(ErrorFamily family, const std::string& what)
        : std::runtime_error(what), family_(family) {}

    [[nodiscard]] ErrorFamily family() const noexcept { return family_; }

private:
    ErrorFamily family_;
};

// Configuration and schema problems.
struct ConfigError : Error {
    explicit ConfigError(const std::string& what) : Error(ErrorFamily::config, what) {}
};

/// A required column is absent. `column()` names it.
class SchemaError : public Error {
public:
    explicit SchemaError(std::string column, const std::string& context = {})
        : Error(ErrorFamily::config,
                "schema error: missing column '" + column + "'" +
                    (context.empty() ? std::string{} : " (" + context + ")")),
          column_(std::move(column)) {}

    [[nodiscard]] const std::string& column() const noexcept { return column_; }

private:
    std::string column_;
};

struct LookupError : Error {
    explicit LookupError(const std::string& what) : Error(ErrorFamily::config, what) {}
};

struct DependencyError : Error {
    explicit DependencyError(const std::string& what) : Error(ErrorFamily::config, what) {}
};

// Data problems.
struct DataError : Error {
    explicit DataError(const std::string& what) : Error(ErrorFamily::data, what) {}
};

/// A monthly series skips a month. `missing()` is the first absent month as yyyymm.
class GapError : public DataError {
public:
    GapError(int missing_yyyymm, const std::string& what) : DataError(what), missing_(missing_yyyymm) {}

    [[nodiscard]] int missing() const noexcept { return missing_; }

private:
    int missing_;
};

struct InsufficientDataError : DataError {
    using DataError::DataError;
};

struct RangeError : DataError {
    using DataError::DataError;
};

struct AlignmentError : DataError {
    using DataError::DataError;
};

// Numerical failures.
struct NumericalError : Error {
    explicit NumericalError(const std::string& what) : Error(ErrorFamily::numerical, what) {}
};

struct SingularityError : NumericalError {
    using NumericalError::NumericalError;
};

struct DomainError : NumericalError {
    using NumericalError::NumericalError;
};

/// A statistic has no finite value (zero variance, zero benchmark error).
struct UndefinedError : NumericalError {
    using NumericalError::NumericalError;
};

struct RankError : NumericalError {
    using NumericalError::NumericalError;
};

}  // namespace rrt
