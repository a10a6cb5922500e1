#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace gridcert {

enum class ErrorKind {
    // tf-core
    EvaluationAtPole,
    DegenerateFeedback,
    NotInvertible,
    RootSolverFailure,
    InvalidGrid,
    // bus-models
    InvalidParameter,
    InternallyUnstable,
    Inconclusive,
    // spr-cert
    AssumptionViolated,
    TailUnbounded,
    NoCertificate,
    InvalidDesign,
    NoFeasibleH,
    // network
    DuplicateLine,
    DanglingEndpoint,
    UnknownBus,
    DelayPresent,
    SingularMassMatrix,
    DisconnectedNetwork,
    IndentationAmbiguous,
    GridTooCoarse,
    // sim
    StepTooLarge,
    TooShort,
    NotSettled,
    // cli
    ParseError,
    ValidationError,
};

std::string_view to_string(ErrorKind kind);

// True for kinds caused by malformed user input rather than numerics.
bool is_input_error(ErrorKind kind);

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

}  // namespace gridcert
