#pragma once

#include <stdexcept>
#include <string>

namespace vmc {

// Base class for all library errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// --- model / parsing ---
struct MalformedXml : Error { using Error::Error; };
struct UnsupportedJointType : Error { using Error::Error; };
struct MissingInertial : Error { using Error::Error; };
struct CyclicGraph : Error { using Error::Error; };
struct UnknownFrame : Error { using Error::Error; };

// --- numerics / dimensions ---
struct DimensionMismatch : Error { using Error::Error; };
struct SingularJacobian : Error { using Error::Error; };

// --- mechanisms ---
struct MissingInstrumentFrame : Error { using Error::Error; };
struct WrongMechanismKind : Error { using Error::Error; };
struct SingularExtensionInertia : Error { using Error::Error; };

// --- synthesis ---
struct NotEquilibrium : Error { using Error::Error; };
struct Unreachable : Error { using Error::Error; };
struct IterationLimit : Error { using Error::Error; };
struct UnstablePlant : Error { using Error::Error; };
struct SolverFailure : Error { using Error::Error; };

struct Infeasible : Error {
    explicit Infeasible(const std::string& what, int pose = -1)
        : Error(what), binding_pose(pose) {}
    int binding_pose;  // index of the pose whose LMI block is active, -1 if n/a
};

// --- simulation ---
struct IntegratorBlowup : Error { using Error::Error; };
struct DegenerateAxis : Error { using Error::Error; };
struct EmptyTrace : Error { using Error::Error; };

// --- scenario / cli ---
struct ScenarioError : Error { using Error::Error; };

}  // namespace vmc
