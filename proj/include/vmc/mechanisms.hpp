#pragma once

#include <vector>

#include "vmc/opspace.hpp"

namespace vmc {

// Spring characteristic F = f_s(z) with energy E(z), dE/dz = f_s, E(0) = 0.
struct SpringLaw {
    enum class Kind { Linear, Deadzone };
    Kind kind = Kind::Linear;
    double k = 0.0;           // stiffness (outer stiffness for deadzone)
    double half_width = 0.0;  // deadzone half-width a

    static SpringLaw linear(double k) {
        SpringLaw s;
        s.k = k;
        return s;
    }
    static SpringLaw deadzone(double k_outer, double half_width) {
        SpringLaw s;
        s.kind = Kind::Deadzone;
        s.k = k_outer;
        s.half_width = half_width;
        return s;
    }

    double force(double z) const {
        if (kind == Kind::Linear) return k * z;
        const double excess = std::abs(z) - half_width;
        return excess > 0 ? k * excess * (z > 0 ? 1.0 : -1.0) : 0.0;
    }
    double energy(double z) const {
        if (kind == Kind::Linear) return 0.5 * k * z * z;
        const double excess = std::abs(z) - half_width;
        return excess > 0 ? 0.5 * k * excess * excess : 0.0;
    }
};

// Linear damper f_d = c zdot; passive for c >= 0.
struct DamperLaw {
    double c = 0.0;
    double force(double zdot) const { return c * zdot; }
};

// Two-terminal inertance element F = m zdd.
struct Inerter {
    double inertance = 0.0;
};

// Controller-internal state of the dynamic extension.
struct ExtensionState {
    VecX qc;
    VecX qcd;
};

struct MechanismSpec {
    enum class Kind { Custom, PrismaticExtension, VirtualInstrument };
    Kind kind = Kind::Custom;

    ModelPtr model;
    CoordinateMap bank;
    std::vector<SpringLaw> springs;  // one per bank row
    std::vector<DamperLaw> dampers;  // one per bank row
    bool gravity_compensation = true;

    Vec3 rcm = Vec3::Zero();
    Vec3 default_reference = Vec3::Zero();
    double rest_j2 = 0.0;
    double rest_j4 = 0.0;

    int arity() const { return bank.arity(); }
    int n() const { return model->n(); }
    int ne() const { return model->ne(); }
};

// Prismatic-extension mechanism: a virtual slider riding the instrument with
// an inerter across the joint. Bank rows: ee_{x,y,z}, j2, j4, rcm_{x,y,z}.
MechanismSpec build_prismatic_extension(const KinematicTree& robot, const Vec3& rcm,
                                        const Vec3& reference, double rest_j2,
                                        double rest_j4, double inertance);

// Virtual-instrument mechanism: a massy virtual shaft pinned at the RCM
// (two revolute joints + one prismatic). Bank rows: ee_{x,y,z}, j2, j4,
// tip_{x,y}, centre_z, base_{x,y} in the instrument frame.
MechanismSpec build_virtual_instrument(const KinematicTree& robot, const Vec3& rcm,
                                       const Vec3& reference, double rest_j2,
                                       double rest_j4, double mass, const Mat3& inertia);

// Free-form assembly for tests and bespoke mechanisms.
MechanismSpec make_mechanism(ModelPtr model, CoordinateMap bank,
                             std::vector<SpringLaw> springs, std::vector<DamperLaw> dampers);

// F_c[i] = f_s,i(z_i) + f_d,i(zdot_i).
VecX controller_force(const MechanismSpec& spec, const VecX& z, const VecX& zdot);

// One controller tick: joint torques for the robot plus the extension state
// advanced by dt (robot state held across the substep).
struct ControlStepResult {
    VecX torque;
    ExtensionState state;
};
ControlStepResult control_step(const MechanismSpec& spec, const VecX& q, const VecX& qd,
                               const ReferenceState& ref, const ExtensionState& state,
                               double dt);

// Replaces the in-plane RCM springs with deadzone springs of widths a_x, a_y
// and scales their dampers; axes optionally rotate the tangent plane.
MechanismSpec relax_rcm_rectangular(const MechanismSpec& spec, double a_x, double a_y,
                                    double damper_scale,
                                    const Mat3& axes = Mat3::Identity());

// Robot + extension kinetic energy plus stored spring energy. Gravity
// potential is excluded: the feedforward term cancels it.
double total_energy(const MechanismSpec& spec, const VecX& q, const VecX& qd,
                    const ExtensionState& state, const ReferenceState& ref);

// Extension coordinates that minimise spring energy at the given robot pose
// (projection of the instrument onto the RCM constraint); rates start at 0.
ExtensionState init_extension_state(const MechanismSpec& spec, const VecX& q);

// Copy of the spec with row stiffness/damping replaced (law kinds preserved).
MechanismSpec apply_gains(const MechanismSpec& spec, const VecX& k, const VecX& c);

// blockdiag(M(q), M_c(q_c)).
MatX extended_mass_matrix(const MechanismSpec& spec, const VecX& qe);

}  // namespace vmc
