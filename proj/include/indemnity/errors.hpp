#pragma once

#include <stdexcept>
#include <string>

namespace indemnity {

// Base for everything this library throws. Catch this at the CLI boundary;
// catch the concrete types where a caller can actually recover.
struct SolverError : std::runtime_error {
    explicit SolverError(const std::string& what) : std::runtime_error(what) {}
};

// --- numeric kernel ---
struct NonConvergent : SolverError {
    using SolverError::SolverError;
};
struct InvalidInterval : SolverError {
    using SolverError::SolverError;
};
struct NoSignChange : SolverError {
    using SolverError::SolverError;
};

// --- domain / parameter validation ---
struct OutOfDomain : SolverError {
    using SolverError::SolverError;
};
struct InvalidParameter : SolverError {
    using SolverError::SolverError;
};
struct AssumptionViolated : SolverError {
    using SolverError::SolverError;
};

// --- landmark computation ---
struct LandmarkNotFound : SolverError {
    using SolverError::SolverError;
};
struct BracketInvalid : SolverError {
    using SolverError::SolverError;
};

// --- contract solvers ---
struct RegimeBoundaryAmbiguous : SolverError {
    using SolverError::SolverError;
};
struct SolverFailed : SolverError {
    using SolverError::SolverError;
};
struct UnsupportedARAClass : SolverError {
    using SolverError::SolverError;
};
struct NoBracket : SolverError {
    using SolverError::SolverError;
};

// --- discretized verification ---
struct InfeasibleDelta : SolverError {
    using SolverError::SolverError;
};

// --- configuration ingestion ---
struct ConfigError : SolverError {
    using SolverError::SolverError;
};

}  // namespace indemnity
