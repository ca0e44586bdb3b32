#include "vmc/dynamics.hpp"

#include <Eigen/Dense>

#include "vmc/errors.hpp"

namespace vmc {
namespace {

void check_dim(const KinematicTree& tree, const VecX& v, const char* what) {
    if (v.size() != tree.dof())
        throw DimensionMismatch(std::string(what) + ": expected length " +
                                std::to_string(tree.dof()) + ", got " +
                                std::to_string(v.size()));
}

// Per-link spatial motion used by RNEA and the energy routines.
struct LinkMotion {
    std::vector<Vec3> omega;   // angular velocity
    std::vector<Vec3> alpha;   // angular acceleration
    std::vector<Vec3> x;       // reference point fixed to the link
    std::vector<Vec3> v_x;     // velocity of that point
    std::vector<Vec3> a_x;     // acceleration of that point
};

Vec3 point_velocity(const LinkMotion& m, int link, const Vec3& point) {
    return m.v_x[static_cast<size_t>(link)] +
           m.omega[static_cast<size_t>(link)].cross(point - m.x[static_cast<size_t>(link)]);
}

Vec3 point_acceleration(const LinkMotion& m, int link, const Vec3& point) {
    const auto l = static_cast<size_t>(link);
    const Vec3 r = point - m.x[l];
    return m.a_x[l] + m.alpha[l].cross(r) + m.omega[l].cross(m.omega[l].cross(r));
}

// Forward pass: propagates twists and accelerations root to leaves. Gravity
// enters as a fictitious base acceleration of -gravity.
LinkMotion forward_pass(const KinematicTree& tree, const KinState& kin, const VecX& qd,
                        const VecX& qdd, const Vec3& gravity) {
    const size_t nl = static_cast<size_t>(tree.link_count());
    LinkMotion m;
    m.omega.assign(nl, Vec3::Zero());
    m.alpha.assign(nl, Vec3::Zero());
    m.x.assign(nl, Vec3::Zero());
    m.v_x.assign(nl, Vec3::Zero());
    m.a_x.assign(nl, Vec3::Zero());
    m.a_x[0] = -gravity;

    for (int j = 0; j < tree.dof(); ++j) {
        const Joint& joint = tree.joint(j);
        const auto pl = static_cast<size_t>(joint.parent_link);
        const auto cl = static_cast<size_t>(joint.child_link);
        const Vec3& axis = kin.joint_axis[static_cast<size_t>(j)];
        const Vec3 child_origin = kin.p[cl];

        const Vec3 v_here = point_velocity(m, joint.parent_link, child_origin);
        const Vec3 a_here = point_acceleration(m, joint.parent_link, child_origin);

        m.x[cl] = child_origin;
        if (joint.type == JointType::Revolute) {
            m.omega[cl] = m.omega[pl] + axis * qd[j];
            m.alpha[cl] = m.alpha[pl] + axis * qdd[j] + m.omega[pl].cross(axis) * qd[j];
            m.v_x[cl] = v_here;
            m.a_x[cl] = a_here;
        } else {
            m.omega[cl] = m.omega[pl];
            m.alpha[cl] = m.alpha[pl];
            m.v_x[cl] = v_here + axis * qd[j];
            m.a_x[cl] = a_here + axis * qdd[j] + 2.0 * m.omega[pl].cross(axis * qd[j]);
        }
    }
    return m;
}

}  // namespace

KinState compute_kinematics(const KinematicTree& tree, const VecX& q) {
    check_dim(tree, q, "q");
    const size_t nl = static_cast<size_t>(tree.link_count());
    KinState kin;
    kin.R.assign(nl, Mat3::Identity());
    kin.p.assign(nl, Vec3::Zero());
    kin.joint_axis.assign(static_cast<size_t>(tree.dof()), Vec3::Zero());
    kin.joint_origin.assign(static_cast<size_t>(tree.dof()), Vec3::Zero());

    for (int j = 0; j < tree.dof(); ++j) {
        const Joint& joint = tree.joint(j);
        const auto pl = static_cast<size_t>(joint.parent_link);
        const auto cl = static_cast<size_t>(joint.child_link);
        const Mat3 R_mount = kin.R[pl] * joint.origin.R;
        const Vec3 p_mount = kin.p[pl] + kin.R[pl] * joint.origin.p;
        const Vec3 axis_w = R_mount * joint.axis;
        kin.joint_axis[static_cast<size_t>(j)] = axis_w;
        kin.joint_origin[static_cast<size_t>(j)] = p_mount;
        if (joint.type == JointType::Revolute) {
            kin.R[cl] = R_mount * axis_angle(joint.axis, q[j]);
            kin.p[cl] = p_mount;
        } else {
            kin.R[cl] = R_mount;
            kin.p[cl] = p_mount + axis_w * q[j];
        }
    }
    return kin;
}

RigidTransform frame_pose(const KinematicTree& tree, const KinState& kin,
                          const std::string& frame) {
    const Frame& f = tree.frame(frame);
    const auto l = static_cast<size_t>(f.link);
    return RigidTransform{kin.R[l], kin.p[l]} * f.offset;
}

RigidTransform forward_kinematics(const KinematicTree& tree, const VecX& q,
                                  const std::string& frame) {
    return frame_pose(tree, compute_kinematics(tree, q), frame);
}

MatX point_jacobian(const KinematicTree& tree, const KinState& kin,
                    const std::string& frame, const Vec3& local_point) {
    const Frame& f = tree.frame(frame);
    const Vec3 p_world =
        (RigidTransform{kin.R[static_cast<size_t>(f.link)], kin.p[static_cast<size_t>(f.link)]} *
         f.offset) *
        local_point;

    MatX J = MatX::Zero(3, tree.dof());
    int link = f.link;
    while (link > 0) {
        const Link& l = tree.link(link);
        const int j = l.parent_joint;
        const Joint& joint = tree.joint(j);
        const Vec3& axis = kin.joint_axis[static_cast<size_t>(j)];
        if (joint.type == JointType::Revolute)
            J.col(j) = axis.cross(p_world - kin.joint_origin[static_cast<size_t>(j)]);
        else
            J.col(j) = axis;
        link = l.parent_link;
    }
    return J;
}

MatX point_jacobian(const KinematicTree& tree, const VecX& q, const std::string& frame,
                    const Vec3& local_point) {
    return point_jacobian(tree, compute_kinematics(tree, q), frame, local_point);
}

MatX frame_angular_jacobian(const KinematicTree& tree, const KinState& kin,
                            const std::string& frame) {
    const Frame& f = tree.frame(frame);
    MatX J = MatX::Zero(3, tree.dof());
    int link = f.link;
    while (link > 0) {
        const Link& l = tree.link(link);
        const int j = l.parent_joint;
        if (tree.joint(j).type == JointType::Revolute)
            J.col(j) = kin.joint_axis[static_cast<size_t>(j)];
        link = l.parent_link;
    }
    return J;
}

MatX frame_angular_jacobian(const KinematicTree& tree, const VecX& q,
                            const std::string& frame) {
    return frame_angular_jacobian(tree, compute_kinematics(tree, q), frame);
}

MatX mass_matrix(const KinematicTree& tree, const VecX& q) {
    check_dim(tree, q, "q");
    const KinState kin = compute_kinematics(tree, q);
    const int n = tree.dof();
    const int nl = tree.link_count();

    // World-frame link inertials.
    std::vector<double> mass(static_cast<size_t>(nl));
    std::vector<Vec3> com(static_cast<size_t>(nl));
    std::vector<Mat3> inertia(static_cast<size_t>(nl));
    for (int i = 0; i < nl; ++i) {
        const Link& l = tree.link(i);
        const auto li = static_cast<size_t>(i);
        mass[li] = l.mass;
        com[li] = kin.p[li] + kin.R[li] * l.com;
        inertia[li] = kin.R[li] * l.inertia * kin.R[li].transpose();
    }

    // Composite inertia of each subtree, accumulated leaves to root.
    auto shift = [](double m, const Vec3& d) -> Mat3 {
        return m * (d.squaredNorm() * Mat3::Identity() - d * d.transpose());
    };
    std::vector<double> cm = mass;
    std::vector<Vec3> cc = com;
    std::vector<Mat3> ci = inertia;
    for (int i = nl - 1; i > 0; --i) {
        const auto li = static_cast<size_t>(i);
        const auto pi = static_cast<size_t>(tree.link(i).parent_link);
        const double total = cm[pi] + cm[li];
        if (total <= 0.0) continue;
        const Vec3 c_new = (cm[pi] * cc[pi] + cm[li] * cc[li]) / total;
        ci[pi] = ci[pi] + shift(cm[pi], cc[pi] - c_new) + ci[li] + shift(cm[li], cc[li] - c_new);
        cc[pi] = c_new;
        cm[pi] = total;
    }

    MatX M = MatX::Zero(n, n);
    for (int j = 0; j < n; ++j) {
        const Joint& jj = tree.joint(j);
        const auto cl = static_cast<size_t>(jj.child_link);
        const Vec3& axis_j = kin.joint_axis[static_cast<size_t>(j)];
        const Vec3& o_j = kin.joint_origin[static_cast<size_t>(j)];

        // Wrench at o_j for unit acceleration of joint j moving its subtree.
        Vec3 F, N;
        if (jj.type == JointType::Revolute) {
            const Vec3 r = cc[cl] - o_j;
            F = cm[cl] * axis_j.cross(r);
            N = ci[cl] * axis_j + r.cross(F);
        } else {
            F = cm[cl] * axis_j;
            N = (cc[cl] - o_j).cross(F);
        }

        int link = jj.child_link;
        while (link > 0) {
            const Link& l = tree.link(link);
            const int i = l.parent_joint;
            const Joint& ji = tree.joint(i);
            const Vec3& axis_i = kin.joint_axis[static_cast<size_t>(i)];
            double mij;
            if (ji.type == JointType::Revolute) {
                const Vec3 N_at_i = N + (o_j - kin.joint_origin[static_cast<size_t>(i)]).cross(F);
                mij = axis_i.dot(N_at_i);
            } else {
                mij = axis_i.dot(F);
            }
            M(i, j) = mij;
            M(j, i) = mij;
            link = l.parent_link;
        }
    }
    return M;
}

VecX inverse_dynamics(const KinematicTree& tree, const VecX& q, const VecX& qd,
                      const VecX& qdd, const Vec3& gravity) {
    check_dim(tree, q, "q");
    check_dim(tree, qd, "qd");
    check_dim(tree, qdd, "qdd");
    const KinState kin = compute_kinematics(tree, q);
    const LinkMotion m = forward_pass(tree, kin, qd, qdd, gravity);
    const int nl = tree.link_count();

    // Net wrench each link must exert on its subtree, about the link point x.
    std::vector<Vec3> F(static_cast<size_t>(nl), Vec3::Zero());
    std::vector<Vec3> N(static_cast<size_t>(nl), Vec3::Zero());
    for (int i = 0; i < nl; ++i) {
        const Link& l = tree.link(i);
        const auto li = static_cast<size_t>(i);
        const Vec3 c = kin.p[li] + kin.R[li] * l.com;
        const Mat3 I_w = kin.R[li] * l.inertia * kin.R[li].transpose();
        const Vec3 f = l.mass * point_acceleration(m, i, c);
        const Vec3 n =
            I_w * m.alpha[li] + m.omega[li].cross(I_w * m.omega[li]) + (c - m.x[li]).cross(f);
        F[li] = f;
        N[li] = n;
    }
    for (int i = nl - 1; i > 0; --i) {
        const auto li = static_cast<size_t>(i);
        const auto pi = static_cast<size_t>(tree.link(i).parent_link);
        N[pi] += N[li] + (m.x[li] - m.x[pi]).cross(F[li]);
        F[pi] += F[li];
    }

    VecX tau(tree.dof());
    for (int j = 0; j < tree.dof(); ++j) {
        const Joint& joint = tree.joint(j);
        const auto cl = static_cast<size_t>(joint.child_link);
        const Vec3& axis = kin.joint_axis[static_cast<size_t>(j)];
        tau[j] = (joint.type == JointType::Revolute) ? axis.dot(N[cl]) : axis.dot(F[cl]);
    }
    return tau;
}

VecX velocity_product_torques(const KinematicTree& tree, const VecX& q, const VecX& qd) {
    return inverse_dynamics(tree, q, qd, VecX::Zero(tree.dof()), Vec3::Zero());
}

MatX coriolis_matrix(const KinematicTree& tree, const VecX& q, const VecX& qd) {
    check_dim(tree, q, "q");
    check_dim(tree, qd, "qd");
    const int n = tree.dof();
    const double h = 1e-6;

    std::vector<MatX> dM(static_cast<size_t>(n));
    for (int k = 0; k < n; ++k) {
        VecX qp = q, qm = q;
        qp[k] += h;
        qm[k] -= h;
        dM[static_cast<size_t>(k)] = (mass_matrix(tree, qp) - mass_matrix(tree, qm)) / (2 * h);
    }

    MatX C = MatX::Zero(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            double cij = 0;
            for (int k = 0; k < n; ++k) {
                const double gamma = 0.5 * (dM[static_cast<size_t>(k)](i, j) +
                                            dM[static_cast<size_t>(j)](i, k) -
                                            dM[static_cast<size_t>(i)](j, k));
                cij += gamma * qd[k];
            }
            C(i, j) = cij;
        }
    return C;
}

VecX gravity_vector(const KinematicTree& tree, const VecX& q) {
    return gravity_vector(tree, q, kDefaultGravity);
}

VecX gravity_vector(const KinematicTree& tree, const VecX& q, const Vec3& gravity) {
    const VecX zero = VecX::Zero(tree.dof());
    return inverse_dynamics(tree, q, zero, zero, gravity);
}

double kinetic_energy(const KinematicTree& tree, const VecX& q, const VecX& qd) {
    check_dim(tree, q, "q");
    check_dim(tree, qd, "qd");
    const KinState kin = compute_kinematics(tree, q);
    const LinkMotion m =
        forward_pass(tree, kin, qd, VecX::Zero(tree.dof()), Vec3::Zero());
    double T = 0;
    for (int i = 0; i < tree.link_count(); ++i) {
        const Link& l = tree.link(i);
        const auto li = static_cast<size_t>(i);
        const Vec3 c = kin.p[li] + kin.R[li] * l.com;
        const Mat3 I_w = kin.R[li] * l.inertia * kin.R[li].transpose();
        const Vec3 v_c = point_velocity(m, i, c);
        T += 0.5 * l.mass * v_c.squaredNorm() + 0.5 * m.omega[li].dot(I_w * m.omega[li]);
    }
    return T;
}

double potential_energy(const KinematicTree& tree, const VecX& q, const Vec3& gravity) {
    check_dim(tree, q, "q");
    const KinState kin = compute_kinematics(tree, q);
    double V = 0;
    for (int i = 0; i < tree.link_count(); ++i) {
        const Link& l = tree.link(i);
        const auto li = static_cast<size_t>(i);
        const Vec3 c = kin.p[li] + kin.R[li] * l.com;
        V -= l.mass * gravity.dot(c);
    }
    return V;
}

DynamicsTerms dynamics_terms(const KinematicTree& tree, const VecX& q, const VecX& qd,
                             const Vec3& gravity) {
    DynamicsTerms out;
    out.M = mass_matrix(tree, q);
    out.C = coriolis_matrix(tree, q, qd);
    out.g = gravity_vector(tree, q, gravity);
    return out;
}

}  // namespace vmc
