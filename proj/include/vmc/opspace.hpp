#pragma once

#include <memory>
#include <string>
#include <vector>

#include "vmc/dynamics.hpp"
#include "vmc/model.hpp"

namespace vmc {

// The controller's dynamic extension: virtual joints whose state lives in the
// controller and is integrated online.
enum class ExtensionKind { None, SliderOnInstrument, VirtualTree };

struct ExtendedModel {
    KinematicTree robot;
    ExtensionKind kind = ExtensionKind::None;
    int ext_dof = 0;

    // SliderOnInstrument: one inertance per extension coordinate (the virtual
    // prismatic joint sees no other inertia).
    std::vector<double> inertances;

    // VirtualTree: a world-rooted chain (the virtual instrument) with frames
    // "vbase", "vcentre", "vtip".
    KinematicTree vtree;

    int n() const { return robot.dof(); }
    int ne() const { return robot.dof() + ext_dof; }

    MatX ext_mass_matrix(const VecX& qc) const;
    VecX ext_velocity_product(const VecX& qc, const VecX& qcd) const;
    double ext_kinetic_energy(const VecX& qc, const VecX& qcd) const;
};

using ModelPtr = std::shared_ptr<const ExtendedModel>;

// Surgeon reference signal r(t) with its rate.
struct ReferenceState {
    Vec3 r = Vec3::Zero();
    Vec3 rdot = Vec3::Zero();
};

// A point as a function of the extended configuration.
struct PointExpr {
    enum class Kind { RobotFrame, VTreeFrame, Slider, FixedWorld, Reference };
    Kind kind = Kind::FixedWorld;
    std::string frame;
    Vec3 local = Vec3::Zero();
    Vec3 fixed = Vec3::Zero();

    static PointExpr robot(const std::string& frame, const Vec3& local = Vec3::Zero()) {
        PointExpr e;
        e.kind = Kind::RobotFrame;
        e.frame = frame;
        e.local = local;
        return e;
    }
    static PointExpr vtree(const std::string& frame, const Vec3& local = Vec3::Zero()) {
        PointExpr e;
        e.kind = Kind::VTreeFrame;
        e.frame = frame;
        e.local = local;
        return e;
    }
    static PointExpr slider() {
        PointExpr e;
        e.kind = Kind::Slider;
        return e;
    }
    static PointExpr world(const Vec3& p) {
        PointExpr e;
        e.kind = Kind::FixedWorld;
        e.fixed = p;
        return e;
    }
    static PointExpr reference() {
        PointExpr e;
        e.kind = Kind::Reference;
        return e;
    }
};

// The frame a coordinate is expressed in.
struct FrameExpr {
    enum class Kind { World, RobotFrame, VTreeFrame, Fixed };
    Kind kind = Kind::World;
    std::string frame;
    Mat3 rotation = Mat3::Identity();

    static FrameExpr world() { return {}; }
    static FrameExpr robot(const std::string& frame) {
        FrameExpr e;
        e.kind = Kind::RobotFrame;
        e.frame = frame;
        return e;
    }
    static FrameExpr vtree(const std::string& frame) {
        FrameExpr e;
        e.kind = Kind::VTreeFrame;
        e.frame = frame;
        return e;
    }
    static FrameExpr fixed(const Mat3& R) {
        FrameExpr e;
        e.kind = Kind::Fixed;
        e.rotation = R;
        return e;
    }
};

// One scalar operation-space coordinate.
struct CoordinateRow {
    enum class Kind { PointDiff, JointOffset };
    std::string label;
    Kind kind = Kind::PointDiff;

    // PointDiff: z = e_comp . R_E^T (p_a - p_b)
    PointExpr a, b;
    FrameExpr expressed;
    int comp = 0;

    // JointOffset: z = qe[qe_index] - rest
    int qe_index = -1;
    double rest = 0.0;
};

struct PortSample {
    VecX z;
    VecX zdot;
};

// One-pass bank evaluation for the control loop.
struct BankSample {
    VecX z;
    VecX zdot;
    MatX J;
};

// An operation-space coordinate bank z = h(q_e) with its exact Jacobian.
// Rows that reference the surgeon signal take their offset from the
// ReferenceState passed at evaluation time.
class CoordinateMap {
public:
    CoordinateMap() = default;
    CoordinateMap(ModelPtr model, std::vector<CoordinateRow> rows);

    int arity() const { return static_cast<int>(rows_.size()); }
    int ne() const { return model_ ? model_->ne() : 0; }
    const ModelPtr& model() const { return model_; }
    const std::vector<CoordinateRow>& rows() const { return rows_; }
    std::vector<CoordinateRow>& mutable_rows() { return rows_; }

    VecX eval(const VecX& qe, const ReferenceState& ref = {}) const;
    // `ref` only matters for rows that both involve the reference point and
    // are expressed in a moving frame; no such row exists in the stock banks.
    MatX jacobian(const VecX& qe, const ReferenceState& ref = {}) const;
    // Explicit time derivative dz/dt from the moving reference.
    VecX time_partial(const VecX& qe, const ReferenceState& ref) const;

    PortSample evaluate(const VecX& qe, const VecX& qe_dot,
                        const ReferenceState& ref = {}) const;
    BankSample sample(const VecX& qe, const VecX& qe_dot,
                      const ReferenceState& ref = {}) const;
    VecX force_to_torque(const VecX& qe, const VecX& force) const;

private:
    ModelPtr model_;
    std::vector<CoordinateRow> rows_;
};

// --- constructors ---

// World-frame vector from the reference to a point on the robot. The
// reference is either a fixed world point or the surgeon signal.
CoordinateMap world_point_offset(ModelPtr model, const std::string& frame,
                                 const Vec3& local_point, const PointExpr& reference,
                                 const std::string& label_prefix);

// Scalar joint offset z = qe[index] - rest.
CoordinateMap joint_offset(ModelPtr model, int qe_index, double rest,
                           const std::string& label);

// Selected components of the vector between two points, expressed in a
// moving frame.
CoordinateMap frame_relative_displacement(ModelPtr model, const PointExpr& a,
                                          const PointExpr& b, const FrameExpr& expressed,
                                          const std::vector<int>& components,
                                          const std::string& label_prefix);

// Vector from a fixed world anchor to a point, optionally expressed in a
// fixed rotated axis set.
CoordinateMap world_point_to_fixed_point(ModelPtr model, const PointExpr& point,
                                         const Vec3& anchor,
                                         const std::string& label_prefix,
                                         const Mat3& axes = Mat3::Identity());

CoordinateMap stack(const std::vector<CoordinateMap>& maps);

}  // namespace vmc
