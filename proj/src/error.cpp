#include "gridcert/error.hpp"

namespace gridcert {

std::string_view to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::EvaluationAtPole: return "EvaluationAtPole";
        case ErrorKind::DegenerateFeedback: return "DegenerateFeedback";
        case ErrorKind::NotInvertible: return "NotInvertible";
        case ErrorKind::RootSolverFailure: return "RootSolverFailure";
        case ErrorKind::InvalidGrid: return "InvalidGrid";
        case ErrorKind::InvalidParameter: return "InvalidParameter";
        case ErrorKind::InternallyUnstable: return "InternallyUnstable";
        case ErrorKind::Inconclusive: return "Inconclusive";
        case ErrorKind::AssumptionViolated: return "AssumptionViolated";
        case ErrorKind::TailUnbounded: return "TailUnbounded";
        case ErrorKind::NoCertificate: return "NoCertificate";
        case ErrorKind::InvalidDesign: return "InvalidDesign";
        case ErrorKind::NoFeasibleH: return "NoFeasibleH";
        case ErrorKind::DuplicateLine: return "DuplicateLine";
        case ErrorKind::DanglingEndpoint: return "DanglingEndpoint";
        case ErrorKind::UnknownBus: return "UnknownBus";
        case ErrorKind::DelayPresent: return "DelayPresent";
        case ErrorKind::SingularMassMatrix: return "SingularMassMatrix";
        case ErrorKind::DisconnectedNetwork: return "DisconnectedNetwork";
        case ErrorKind::IndentationAmbiguous: return "IndentationAmbiguous";
        case ErrorKind::GridTooCoarse: return "GridTooCoarse";
        case ErrorKind::StepTooLarge: return "StepTooLarge";
        case ErrorKind::TooShort: return "TooShort";
        case ErrorKind::NotSettled: return "NotSettled";
        case ErrorKind::ParseError: return "ParseError";
        case ErrorKind::ValidationError: return "ValidationError";
    }
    return "Unknown";
}

bool is_input_error(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::InvalidGrid:
        case ErrorKind::InvalidParameter:
        case ErrorKind::InvalidDesign:
        case ErrorKind::DuplicateLine:
        case ErrorKind::DanglingEndpoint:
        case ErrorKind::UnknownBus:
        case ErrorKind::DelayPresent:
        case ErrorKind::StepTooLarge:
        case ErrorKind::ParseError:
        case ErrorKind::ValidationError:
            return true;
        default:
            return false;
    }
}

}  // namespace gridcert
