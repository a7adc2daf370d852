#pragma once
#include <stdexcept>
#include <string>

namespace rfh {

// Failure classes map onto CLI exit codes: config 2, numerical 3, invariant 4.
enum class ErrorKind { config, numerical, invariant };

class Error : public std::runtime_error {
public:
    Error(ErrorKind k, const std::string& what) : std::runtime_error(what), kind_(k) {}
    ErrorKind kind() const { return kind_; }
private:
    ErrorKind kind_;
};

struct ConfigError : Error {
    explicit ConfigError(const std::string& w) : Error(ErrorKind::config, w) {}
};
struct NumericalError : Error {
    explicit NumericalError(const std::string& w) : Error(ErrorKind::numerical, w) {}
};
struct InvariantError : Error {
    explicit InvariantError(const std::string& w) : Error(ErrorKind::invariant, w) {}
};

// rsindex specific
struct IrregularCrossing : NumericalError {
    double t;
    IrregularCrossing(double t_, const std::string& w) : NumericalError(w), t(t_) {}
};
struct ResolutionError : NumericalError {
    using NumericalError::NumericalError;
};
struct DegenerateForm : NumericalError {
    using NumericalError::NumericalError;
};

}
