#pragma once

#include <stdexcept>
#include <string>

namespace simlab {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

#define SIMLAB_DEFINE_ERROR(Name, Base)                                     \
    class Name : public Base {                                              \
    public:                                                                 \
        explicit Name(const std::string& what) : Base(#Name ": " + what) {} \
    }

// Linear algebra / graph.
SIMLAB_DEFINE_ERROR(SingularSystem, Error);
SIMLAB_DEFINE_ERROR(DimensionMismatch, Error);
SIMLAB_DEFINE_ERROR(SolveFailure, Error);

// Sliding surface design.
SIMLAB_DEFINE_ERROR(NonPositiveRoot, Error);
SIMLAB_DEFINE_ERROR(NotHurwitz, Error);

// Barrier.
SIMLAB_DEFINE_ERROR(NonPDWeight, Error);
SIMLAB_DEFINE_ERROR(DomainExceeded, Error);

// Network adaptation.
SIMLAB_DEFINE_ERROR(BoundViolated, Error);

// Expression parsing and evaluation.
SIMLAB_DEFINE_ERROR(ExprError, Error);
SIMLAB_DEFINE_ERROR(SyntaxError, ExprError);
SIMLAB_DEFINE_ERROR(UnknownVariable, ExprError);
SIMLAB_DEFINE_ERROR(UnknownFunction, ExprError);
SIMLAB_DEFINE_ERROR(EvalError, ExprError);

// Controller.
SIMLAB_DEFINE_ERROR(ZeroRowGain, Error);
SIMLAB_DEFINE_ERROR(MissingBound, Error);

// Simulation.
SIMLAB_DEFINE_ERROR(BarrierBreach, Error);
SIMLAB_DEFINE_ERROR(NumericOverflow, Error);
SIMLAB_DEFINE_ERROR(InitialBarrierViolation, Error);

// Configuration and I/O.
SIMLAB_DEFINE_ERROR(ParseError, Error);
SIMLAB_DEFINE_ERROR(ValidationError, Error);
SIMLAB_DEFINE_ERROR(IoError, Error);

#undef SIMLAB_DEFINE_ERROR

}  // namespace simlab
