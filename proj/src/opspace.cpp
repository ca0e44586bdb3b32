#include "vmc/opspace.hpp"

#include "vmc/errors.hpp"

namespace vmc {

MatX ExtendedModel::ext_mass_matrix(const VecX& qc) const {
    switch (kind) {
        case ExtensionKind::None:
            return MatX::Zero(0, 0);
        case ExtensionKind::SliderOnInstrument: {
            MatX M = MatX::Zero(ext_dof, ext_dof);
            for (int i = 0; i < ext_dof; ++i) M(i, i) = inertances[static_cast<size_t>(i)];
            return M;
        }
        case ExtensionKind::VirtualTree:
            return mass_matrix(vtree, qc);
    }
    return MatX::Zero(0, 0);
}

VecX ExtendedModel::ext_velocity_product(const VecX& qc, const VecX& qcd) const {
    switch (kind) {
        case ExtensionKind::None:
            return VecX::Zero(0);
        case ExtensionKind::SliderOnInstrument:
            return VecX::Zero(ext_dof);  // constant inertance, no Coriolis terms
        case ExtensionKind::VirtualTree:
            return velocity_product_torques(vtree, qc, qcd);
    }
    return VecX::Zero(0);
}

double ExtendedModel::ext_kinetic_energy(const VecX& qc, const VecX& qcd) const {
    switch (kind) {
        case ExtensionKind::None:
            return 0.0;
        case ExtensionKind::SliderOnInstrument: {
            double T = 0;
            for (int i = 0; i < ext_dof; ++i)
                T += 0.5 * inertances[static_cast<size_t>(i)] * qcd[i] * qcd[i];
            return T;
        }
        case ExtensionKind::VirtualTree:
            return kinetic_energy(vtree, qc, qcd);
    }
    return 0.0;
}

namespace {

// Shared per-evaluation kinematic data.
struct Workspace {
    const ExtendedModel* model;
    VecX q, qc;
    KinState robot;
    KinState vtree;
    bool has_vtree = false;

    // Slider geometry (SliderOnInstrument)
    Vec3 base = Vec3::Zero(), tip = Vec3::Zero(), axis = Vec3::Zero();
    double length = 0;
    MatX J_base, J_tip;

    Workspace(const ExtendedModel& m, const VecX& qe) : model(&m) {
        if (qe.size() != m.ne())
            throw DimensionMismatch("extended configuration: expected length " +
                                    std::to_string(m.ne()) + ", got " +
                                    std::to_string(qe.size()));
        q = qe.head(m.n());
        qc = qe.tail(m.ext_dof);
        robot = compute_kinematics(m.robot, q);
        if (m.kind == ExtensionKind::VirtualTree) {
            vtree = compute_kinematics(m.vtree, qc);
            has_vtree = true;
        }
        if (m.kind == ExtensionKind::SliderOnInstrument) {
            base = frame_pose(m.robot, robot, "instrument_base").p;
            tip = frame_pose(m.robot, robot, "instrument_tip").p;
            length = (tip - base).norm();
            if (length < 1e-12) throw DegenerateAxis("instrument has zero length");
            axis = (tip - base) / length;
            J_base = point_jacobian(m.robot, robot, "instrument_base", Vec3::Zero());
            J_tip = point_jacobian(m.robot, robot, "instrument_tip", Vec3::Zero());
        }
    }

    Vec3 point(const PointExpr& e, const ReferenceState& ref) const {
        switch (e.kind) {
            case PointExpr::Kind::RobotFrame:
                return frame_pose(model->robot, robot, e.frame) * e.local;
            case PointExpr::Kind::VTreeFrame:
                return frame_pose(model->vtree, vtree, e.frame) * e.local;
            case PointExpr::Kind::Slider:
                return base + qc[0] * axis;
            case PointExpr::Kind::FixedWorld:
                return e.fixed;
            case PointExpr::Kind::Reference:
                return ref.r;
        }
        return Vec3::Zero();
    }

    // 3 x ne jacobian of a point.
    MatX point_jac(const PointExpr& e) const {
        const int n = model->n();
        MatX J = MatX::Zero(3, model->ne());
        switch (e.kind) {
            case PointExpr::Kind::RobotFrame:
                J.leftCols(n) = point_jacobian(model->robot, robot, e.frame, e.local);
                break;
            case PointExpr::Kind::VTreeFrame:
                J.rightCols(model->ext_dof) =
                    point_jacobian(model->vtree, vtree, e.frame, e.local);
                break;
            case PointExpr::Kind::Slider:
                J.leftCols(n) = J_base + (qc[0] / length) * (J_tip - J_base);
                J.col(n) = axis;
                break;
            case PointExpr::Kind::FixedWorld:
            case PointExpr::Kind::Reference:
                break;
        }
        return J;
    }

    Mat3 frame_rotation(const FrameExpr& e) const {
        switch (e.kind) {
            case FrameExpr::Kind::World:
                return Mat3::Identity();
            case FrameExpr::Kind::RobotFrame:
                return frame_pose(model->robot, robot, e.frame).R;
            case FrameExpr::Kind::VTreeFrame:
                return frame_pose(model->vtree, vtree, e.frame).R;
            case FrameExpr::Kind::Fixed:
                return e.rotation;
        }
        return Mat3::Identity();
    }

    // 3 x ne angular jacobian of the expressed-in frame.
    MatX frame_ang_jac(const FrameExpr& e) const {
        MatX J = MatX::Zero(3, model->ne());
        if (e.kind == FrameExpr::Kind::RobotFrame)
            J.leftCols(model->n()) = frame_angular_jacobian(model->robot, robot, e.frame);
        else if (e.kind == FrameExpr::Kind::VTreeFrame)
            J.rightCols(model->ext_dof) =
                frame_angular_jacobian(model->vtree, vtree, e.frame);
        return J;
    }
};

VecX eval_impl(const std::vector<CoordinateRow>& rows, const Workspace& ws, const VecX& qe,
               const ReferenceState& ref) {
    VecX z(static_cast<int>(rows.size()));
    for (size_t i = 0; i < rows.size(); ++i) {
        const CoordinateRow& row = rows[i];
        if (row.kind == CoordinateRow::Kind::JointOffset) {
            z[static_cast<int>(i)] = qe[row.qe_index] - row.rest;
        } else {
            const Vec3 d = ws.point(row.a, ref) - ws.point(row.b, ref);
            z[static_cast<int>(i)] =
                (ws.frame_rotation(row.expressed).transpose() * d)[row.comp];
        }
    }
    return z;
}

MatX jacobian_impl(const std::vector<CoordinateRow>& rows, const Workspace& ws, int ne,
                   const ReferenceState& ref) {
    MatX J = MatX::Zero(static_cast<int>(rows.size()), ne);
    for (size_t i = 0; i < rows.size(); ++i) {
        const CoordinateRow& row = rows[i];
        if (row.kind == CoordinateRow::Kind::JointOffset) {
            J(static_cast<int>(i), row.qe_index) = 1.0;
            continue;
        }
        const Vec3 d = ws.point(row.a, ref) - ws.point(row.b, ref);
        const Mat3 Rt = ws.frame_rotation(row.expressed).transpose();
        MatX dJ = ws.point_jac(row.a) - ws.point_jac(row.b);
        if (row.expressed.kind == FrameExpr::Kind::RobotFrame ||
            row.expressed.kind == FrameExpr::Kind::VTreeFrame)
            dJ += skew(d) * ws.frame_ang_jac(row.expressed);
        J.row(static_cast<int>(i)) = (Rt * dJ).row(row.comp);
    }
    return J;
}

VecX time_partial_impl(const std::vector<CoordinateRow>& rows, const Workspace& ws,
                       const ReferenceState& ref) {
    VecX dz = VecX::Zero(static_cast<int>(rows.size()));
    for (size_t i = 0; i < rows.size(); ++i) {
        const CoordinateRow& row = rows[i];
        if (row.kind != CoordinateRow::Kind::PointDiff) continue;
        double sign = 0;
        if (row.a.kind == PointExpr::Kind::Reference) sign += 1;
        if (row.b.kind == PointExpr::Kind::Reference) sign -= 1;
        if (sign != 0)
            dz[static_cast<int>(i)] =
                sign * (ws.frame_rotation(row.expressed).transpose() * ref.rdot)[row.comp];
    }
    return dz;
}

}  // namespace

CoordinateMap::CoordinateMap(ModelPtr model, std::vector<CoordinateRow> rows)
    : model_(std::move(model)), rows_(std::move(rows)) {}

VecX CoordinateMap::eval(const VecX& qe, const ReferenceState& ref) const {
    return eval_impl(rows_, Workspace(*model_, qe), qe, ref);
}

MatX CoordinateMap::jacobian(const VecX& qe, const ReferenceState& ref) const {
    return jacobian_impl(rows_, Workspace(*model_, qe), ne(), ref);
}

VecX CoordinateMap::time_partial(const VecX& qe, const ReferenceState& ref) const {
    return time_partial_impl(rows_, Workspace(*model_, qe), ref);
}

PortSample CoordinateMap::evaluate(const VecX& qe, const VecX& qe_dot,
                                   const ReferenceState& ref) const {
    const BankSample s = sample(qe, qe_dot, ref);
    return PortSample{s.z, s.zdot};
}

BankSample CoordinateMap::sample(const VecX& qe, const VecX& qe_dot,
                                 const ReferenceState& ref) const {
    if (qe_dot.size() != qe.size())
        throw DimensionMismatch("sample: qe and qe_dot sizes differ");
    const Workspace ws(*model_, qe);
    BankSample out;
    out.z = eval_impl(rows_, ws, qe, ref);
    out.J = jacobian_impl(rows_, ws, ne(), ref);
    out.zdot = out.J * qe_dot + time_partial_impl(rows_, ws, ref);
    return out;
}

VecX CoordinateMap::force_to_torque(const VecX& qe, const VecX& force) const {
    if (force.size() != arity())
        throw DimensionMismatch("force_to_torque: expected force of length " +
                                std::to_string(arity()));
    return jacobian(qe).transpose() * force;
}

namespace {

const char* kAxisNames[3] = {"x", "y", "z"};

}  // namespace

CoordinateMap world_point_offset(ModelPtr model, const std::string& frame,
                                 const Vec3& local_point, const PointExpr& reference,
                                 const std::string& label_prefix) {
    std::vector<CoordinateRow> rows;
    for (int c = 0; c < 3; ++c) {
        CoordinateRow row;
        row.label = label_prefix + "_" + kAxisNames[c];
        row.kind = CoordinateRow::Kind::PointDiff;
        row.a = PointExpr::robot(frame, local_point);
        row.b = reference;
        row.expressed = FrameExpr::world();
        row.comp = c;
        rows.push_back(std::move(row));
    }
    return CoordinateMap(std::move(model), std::move(rows));
}

CoordinateMap joint_offset(ModelPtr model, int qe_index, double rest,
                           const std::string& label) {
    if (qe_index < 0 || qe_index >= model->ne())
        throw DimensionMismatch("joint_offset: index out of range");
    CoordinateRow row;
    row.label = label;
    row.kind = CoordinateRow::Kind::JointOffset;
    row.qe_index = qe_index;
    row.rest = rest;
    return CoordinateMap(std::move(model), {row});
}

CoordinateMap frame_relative_displacement(ModelPtr model, const PointExpr& a,
                                          const PointExpr& b, const FrameExpr& expressed,
                                          const std::vector<int>& components,
                                          const std::string& label_prefix) {
    std::vector<CoordinateRow> rows;
    for (int c : components) {
        if (c < 0 || c > 2) throw DimensionMismatch("component selector out of range");
        CoordinateRow row;
        row.label = label_prefix + "_" + kAxisNames[c];
        row.kind = CoordinateRow::Kind::PointDiff;
        row.a = a;
        row.b = b;
        row.expressed = expressed;
        row.comp = c;
        rows.push_back(std::move(row));
    }
    return CoordinateMap(std::move(model), std::move(rows));
}

CoordinateMap world_point_to_fixed_point(ModelPtr model, const PointExpr& point,
                                         const Vec3& anchor,
                                         const std::string& label_prefix,
                                         const Mat3& axes) {
    std::vector<CoordinateRow> rows;
    const bool rotated = !axes.isIdentity(0.0);
    for (int c = 0; c < 3; ++c) {
        CoordinateRow row;
        row.label = label_prefix + "_" + kAxisNames[c];
        row.kind = CoordinateRow::Kind::PointDiff;
        row.a = point;
        row.b = PointExpr::world(anchor);
        row.expressed = rotated ? FrameExpr::fixed(axes) : FrameExpr::world();
        row.comp = c;
        rows.push_back(std::move(row));
    }
    return CoordinateMap(std::move(model), std::move(rows));
}

CoordinateMap stack(const std::vector<CoordinateMap>& maps) {
    if (maps.empty()) throw DimensionMismatch("stack: no maps given");
    const ModelPtr& model = maps.front().model();
    std::vector<CoordinateRow> rows;
    for (const CoordinateMap& m : maps) {
        if (m.model() != model)
            throw DimensionMismatch("stack: maps built over different models");
        rows.insert(rows.end(), m.rows().begin(), m.rows().end());
    }
    return CoordinateMap(model, std::move(rows));
}

}  // namespace vmc
