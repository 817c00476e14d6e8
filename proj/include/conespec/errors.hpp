#pragma once

#include <stdexcept>
#include <string>

namespace conespec {

// Precondition failures map to CLI exit code 2, budget failures to 3.
class MathPreconditionError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

class NumericalBudgetError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DomainError : public MathPreconditionError {
public:
    using MathPreconditionError::MathPreconditionError;
};

class PositivityViolation : public MathPreconditionError {
public:
    PositivityViolation(const std::string& what, double mu0)
        : MathPreconditionError(what), mu0_(mu0) {}
    double mu0() const { return mu0_; }

private:
    double mu0_;
};

class CoverFailure : public MathPreconditionError {
public:
    using MathPreconditionError::MathPreconditionError;
};

class WindowTooShort : public MathPreconditionError {
public:
    using MathPreconditionError::MathPreconditionError;
};

class ConvergenceFailure : public NumericalBudgetError {
public:
    using NumericalBudgetError::NumericalBudgetError;
};

class TailEstimateExceeded : public NumericalBudgetError {
public:
    using NumericalBudgetError::NumericalBudgetError;
};

class QuadratureBudgetExceeded : public NumericalBudgetError {
public:
    using NumericalBudgetError::NumericalBudgetError;
};

class UnresolvedOscillation : public NumericalBudgetError {
public:
    using NumericalBudgetError::NumericalBudgetError;
};

class ShootingNonconvergence : public NumericalBudgetError {
public:
    using NumericalBudgetError::NumericalBudgetError;
};

class IntegratorFailure : public NumericalBudgetError {
public:
    using NumericalBudgetError::NumericalBudgetError;
};

class Inconclusive : public NumericalBudgetError {
public:
    using NumericalBudgetError::NumericalBudgetError;
};

}  // namespace conespec
