#include "vmc/mechanisms.hpp"

#include <Eigen/Cholesky>

#include "vmc/errors.hpp"

namespace vmc {
namespace {

void require_instrument(const KinematicTree& robot) {
    if (!robot.has_instrument())
        throw MissingInstrumentFrame(
            "mechanism needs instrument_base/instrument_tip frames on the robot");
    const RigidTransform b2t = robot.instrument_base_to_tip();
    const double len = b2t.p.norm();
    if (len < 1e-9) throw DegenerateAxis("instrument has zero length");
    if ((b2t.p / len - Vec3::UnitZ()).norm() > 1e-9)
        throw MissingInstrumentFrame(
            "instrument_base frame must have its +z axis towards instrument_tip");
}

void require_rest_joints(const KinematicTree& robot) {
    if (robot.dof() < 4)
        throw DimensionMismatch("jointspace rows j2/j4 need at least 4 robot joints");
}

CoordinateMap surgical_common_rows(const ModelPtr& model, double rest_j2, double rest_j4) {
    return stack({
        world_point_offset(model, "instrument_tip", Vec3::Zero(), PointExpr::reference(),
                           "ee"),
        joint_offset(model, 1, rest_j2, "j2"),
        joint_offset(model, 3, rest_j4, "j4"),
    });
}

// World-rooted virtual-instrument chain: Rx, Ry at the RCM, then a prismatic
// slide along the shaft. R0 orients the zero configuration along `axis0`.
KinematicTree make_virtual_instrument_tree(const Vec3& rcm, const Vec3& axis0,
                                           double length, double mass,
                                           const Mat3& inertia) {
    const Mat3 R0 = rotation_between(Vec3::UnitZ(), axis0);
    KinematicTree vt;
    Link world;
    world.name = "vworld";
    vt.add_root(world);

    Joint j1;
    j1.name = "vrot1";
    j1.parent_link = 0;
    j1.axis = Vec3::UnitX();
    j1.origin = RigidTransform{R0, rcm};
    Link l1;
    l1.name = "vlink1";
    vt.add_body(j1, l1);

    Joint j2;
    j2.name = "vrot2";
    j2.parent_link = 1;
    j2.axis = Vec3::UnitY();
    Link l2;
    l2.name = "vlink2";
    vt.add_body(j2, l2);

    Joint j3;
    j3.name = "vslide";
    j3.parent_link = 2;
    j3.type = JointType::Prismatic;
    j3.axis = Vec3::UnitZ();
    Link shaft;
    shaft.name = "vinstrument";
    shaft.mass = mass;
    shaft.com = Vec3(0, 0, length / 2);
    shaft.inertia = inertia;
    vt.add_body(j3, shaft);

    vt.add_frame("vbase", 3, RigidTransform::Identity());
    vt.add_frame("vcentre", 3, RigidTransform{Mat3::Identity(), Vec3(0, 0, length / 2)});
    vt.add_frame("vtip", 3, RigidTransform{Mat3::Identity(), Vec3(0, 0, length)});
    return vt;
}

}  // namespace

MechanismSpec build_prismatic_extension(const KinematicTree& robot, const Vec3& rcm,
                                        const Vec3& reference, double rest_j2,
                                        double rest_j4, double inertance) {
    require_instrument(robot);
    require_rest_joints(robot);
    if (inertance <= 0) throw SingularExtensionInertia("inertance must be positive");

    auto model = std::make_shared<ExtendedModel>();
    model->robot = robot;
    model->kind = ExtensionKind::SliderOnInstrument;
    model->ext_dof = 1;
    model->inertances = {inertance};

    MechanismSpec spec;
    spec.kind = MechanismSpec::Kind::PrismaticExtension;
    spec.model = model;
    spec.bank = stack({
        surgical_common_rows(model, rest_j2, rest_j4),
        world_point_to_fixed_point(model, PointExpr::slider(), rcm, "rcm"),
    });
    spec.springs.assign(static_cast<size_t>(spec.bank.arity()), SpringLaw::linear(0));
    spec.dampers.assign(static_cast<size_t>(spec.bank.arity()), DamperLaw{0});
    spec.rcm = rcm;
    spec.default_reference = reference;
    spec.rest_j2 = rest_j2;
    spec.rest_j4 = rest_j4;
    return spec;
}

MechanismSpec build_virtual_instrument(const KinematicTree& robot, const Vec3& rcm,
                                       const Vec3& reference, double rest_j2,
                                       double rest_j4, double mass, const Mat3& inertia) {
    require_instrument(robot);
    require_rest_joints(robot);
    if (mass <= 0) throw SingularExtensionInertia("virtual instrument mass must be positive");

    const double length = robot.instrument_length();
    Vec3 axis0 = reference - rcm;
    if (axis0.norm() < 1e-9) axis0 = -Vec3::UnitZ();
    axis0.normalize();

    auto model = std::make_shared<ExtendedModel>();
    model->robot = robot;
    model->kind = ExtensionKind::VirtualTree;
    model->ext_dof = 3;
    model->vtree = make_virtual_instrument_tree(rcm, axis0, length, mass, inertia);

    const FrameExpr instr = FrameExpr::robot("instrument_base");
    MechanismSpec spec;
    spec.kind = MechanismSpec::Kind::VirtualInstrument;
    spec.model = model;
    spec.bank = stack({
        surgical_common_rows(model, rest_j2, rest_j4),
        frame_relative_displacement(model, PointExpr::robot("instrument_tip"),
                                    PointExpr::vtree("vtip"), instr, {0, 1}, "tip"),
        frame_relative_displacement(model,
                                    PointExpr::robot("instrument_base", Vec3(0, 0, length / 2)),
                                    PointExpr::vtree("vcentre"), instr, {2}, "centre"),
        frame_relative_displacement(model, PointExpr::robot("instrument_base"),
                                    PointExpr::vtree("vbase"), instr, {0, 1}, "base"),
    });
    spec.springs.assign(static_cast<size_t>(spec.bank.arity()), SpringLaw::linear(0));
    spec.dampers.assign(static_cast<size_t>(spec.bank.arity()), DamperLaw{0});
    spec.rcm = rcm;
    spec.default_reference = reference;
    spec.rest_j2 = rest_j2;
    spec.rest_j4 = rest_j4;
    return spec;
}

MechanismSpec make_mechanism(ModelPtr model, CoordinateMap bank,
                             std::vector<SpringLaw> springs,
                             std::vector<DamperLaw> dampers) {
    if (static_cast<int>(springs.size()) != bank.arity() ||
        static_cast<int>(dampers.size()) != bank.arity())
        throw DimensionMismatch("one spring and one damper required per coordinate row");
    MechanismSpec spec;
    spec.model = std::move(model);
    spec.bank = std::move(bank);
    spec.springs = std::move(springs);
    spec.dampers = std::move(dampers);
    return spec;
}

VecX controller_force(const MechanismSpec& spec, const VecX& z, const VecX& zdot) {
    if (z.size() != spec.arity() || zdot.size() != spec.arity())
        throw DimensionMismatch("controller_force: expected arity " +
                                std::to_string(spec.arity()));
    VecX F(spec.arity());
    for (int i = 0; i < spec.arity(); ++i)
        F[i] = spec.springs[static_cast<size_t>(i)].force(z[i]) +
               spec.dampers[static_cast<size_t>(i)].force(zdot[i]);
    return F;
}

namespace {

// Extension acceleration with the robot state frozen.
VecX extension_accel(const MechanismSpec& spec, const VecX& q, const VecX& qd,
                     const ReferenceState& ref, const VecX& qc, const VecX& qcd) {
    const int n = spec.n();
    const int nc = spec.model->ext_dof;
    VecX qe(n + nc), qed(n + nc);
    qe << q, qc;
    qed << qd, qcd;
    const BankSample s = spec.bank.sample(qe, qed, ref);
    const VecX F = controller_force(spec, s.z, s.zdot);
    const VecX tau_ext = (s.J.transpose() * F).tail(nc);
    const MatX Mc = spec.model->ext_mass_matrix(qc);
    Eigen::LLT<MatX> llt(Mc);
    if (llt.info() != Eigen::Success)
        throw SingularExtensionInertia("extension inertia matrix is not positive definite");
    return llt.solve(-spec.model->ext_velocity_product(qc, qcd) - tau_ext);
}

}  // namespace

ControlStepResult control_step(const MechanismSpec& spec, const VecX& q, const VecX& qd,
                               const ReferenceState& ref, const ExtensionState& state,
                               double dt) {
    const int n = spec.n();
    const int nc = spec.model->ext_dof;
    if (q.size() != n || qd.size() != n || state.qc.size() != nc || state.qcd.size() != nc)
        throw DimensionMismatch("control_step: state dimensions do not match the model");

    VecX qe(n + nc), qed(n + nc);
    qe << q, state.qc;
    qed << qd, state.qcd;
    const BankSample s = spec.bank.sample(qe, qed, ref);
    const VecX F = controller_force(spec, s.z, s.zdot);
    const VecX tau = s.J.transpose() * F;

    VecX u = -tau.head(n);
    if (spec.gravity_compensation) u += gravity_vector(spec.model->robot, q);

    // RK4 on the extension substate, robot pose and reference held.
    auto accel = [&](const VecX& qc, const VecX& qcd) {
        return extension_accel(spec, q, qd, ref, qc, qcd);
    };
    const VecX& qc0 = state.qc;
    const VecX& qcd0 = state.qcd;
    ControlStepResult out;
    out.torque = std::move(u);
    if (nc == 0) {
        out.state = state;
        return out;
    }
    const VecX a1 = accel(qc0, qcd0);
    const VecX a2 = accel(qc0 + 0.5 * dt * qcd0, qcd0 + 0.5 * dt * a1);
    const VecX a3 = accel(qc0 + 0.5 * dt * (qcd0 + 0.5 * dt * a1), qcd0 + 0.5 * dt * a2);
    const VecX a4 = accel(qc0 + dt * (qcd0 + 0.5 * dt * a2), qcd0 + dt * a3);
    out.state.qc = qc0 + dt * qcd0 + dt * dt / 6.0 * (a1 + a2 + a3);
    out.state.qcd = qcd0 + dt / 6.0 * (a1 + 2 * a2 + 2 * a3 + a4);
    return out;
}

MechanismSpec relax_rcm_rectangular(const MechanismSpec& spec, double a_x, double a_y,
                                    double damper_scale, const Mat3& axes) {
    if (spec.kind != MechanismSpec::Kind::PrismaticExtension)
        throw WrongMechanismKind("rectangular relaxation applies to the prismatic extension");

    MechanismSpec out = spec;
    auto& rows = out.bank.mutable_rows();
    int idx_x = -1, idx_y = -1, idx_z = -1;
    for (size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].label == "rcm_x") idx_x = static_cast<int>(i);
        if (rows[i].label == "rcm_y") idx_y = static_cast<int>(i);
        if (rows[i].label == "rcm_z") idx_z = static_cast<int>(i);
    }
    if (idx_x < 0 || idx_y < 0 || idx_z < 0)
        throw WrongMechanismKind("prismatic-extension bank lacks rcm rows");

    if (!axes.isIdentity(0.0)) {
        for (int idx : {idx_x, idx_y, idx_z})
            rows[static_cast<size_t>(idx)].expressed = FrameExpr::fixed(axes);
    }
    out.springs[static_cast<size_t>(idx_x)] =
        SpringLaw::deadzone(spec.springs[static_cast<size_t>(idx_x)].k, a_x / 2);
    out.springs[static_cast<size_t>(idx_y)] =
        SpringLaw::deadzone(spec.springs[static_cast<size_t>(idx_y)].k, a_y / 2);
    out.dampers[static_cast<size_t>(idx_x)].c *= damper_scale;
    out.dampers[static_cast<size_t>(idx_y)].c *= damper_scale;
    return out;
}

double total_energy(const MechanismSpec& spec, const VecX& q, const VecX& qd,
                    const ExtensionState& state, const ReferenceState& ref) {
    const int n = spec.n();
    const int nc = spec.model->ext_dof;
    VecX qe(n + nc);
    qe << q, state.qc;
    const VecX z = spec.bank.eval(qe, ref);
    double E = kinetic_energy(spec.model->robot, q, qd) +
               spec.model->ext_kinetic_energy(state.qc, state.qcd);
    for (int i = 0; i < spec.arity(); ++i)
        E += spec.springs[static_cast<size_t>(i)].energy(z[i]);
    return E;
}

ExtensionState init_extension_state(const MechanismSpec& spec, const VecX& q) {
    ExtensionState state;
    state.qc = VecX::Zero(spec.model->ext_dof);
    state.qcd = VecX::Zero(spec.model->ext_dof);
    if (spec.model->kind == ExtensionKind::None) return state;

    const KinState kin = compute_kinematics(spec.model->robot, q);
    const Vec3 base = frame_pose(spec.model->robot, kin, "instrument_base").p;
    const Vec3 tip = frame_pose(spec.model->robot, kin, "instrument_tip").p;
    const double len = (tip - base).norm();
    if (len < 1e-12) throw DegenerateAxis("instrument has zero length");
    const Vec3 axis = (tip - base) / len;

    if (spec.model->kind == ExtensionKind::SliderOnInstrument) {
        // Slider at the orthogonal projection of the RCM onto the shaft line.
        state.qc[0] = axis.dot(spec.rcm - base);
        return state;
    }

    // Virtual instrument: align the virtual axis with the real shaft and
    // slide the virtual base onto the projection of the real base.
    const Mat3 R0 = spec.model->vtree.joint(0).origin.R;
    const Vec3 local = R0.transpose() * axis;
    if (std::abs(local.x()) > 0.99)
        throw SingularJacobian(
            "virtual instrument at gimbal lock: shaft parallel to the second axis");
    const double theta2 = std::asin(std::clamp(local.x(), -1.0, 1.0));
    const double theta1 = std::atan2(-local.y(), local.z());
    state.qc[0] = theta1;
    state.qc[1] = theta2;
    state.qc[2] = axis.dot(base - spec.rcm);
    return state;
}

MechanismSpec apply_gains(const MechanismSpec& spec, const VecX& k, const VecX& c) {
    if (k.size() != spec.arity() || c.size() != spec.arity())
        throw DimensionMismatch("apply_gains: expected one (k, c) pair per coordinate row");
    MechanismSpec out = spec;
    for (int i = 0; i < spec.arity(); ++i) {
        out.springs[static_cast<size_t>(i)].k = k[i];
        out.dampers[static_cast<size_t>(i)].c = c[i];
    }
    return out;
}

MatX extended_mass_matrix(const MechanismSpec& spec, const VecX& qe) {
    if (qe.size() != spec.ne())
        throw DimensionMismatch("extended_mass_matrix: wrong configuration length");
    const int n = spec.n();
    const int nc = spec.model->ext_dof;
    MatX Me = MatX::Zero(n + nc, n + nc);
    Me.topLeftCorner(n, n) = mass_matrix(spec.model->robot, qe.head(n));
    if (nc > 0) Me.bottomRightCorner(nc, nc) = spec.model->ext_mass_matrix(qe.tail(nc));
    return Me;
}

}  // namespace vmc
