#pragma once

#include <string>
#include <vector>

#include "vmc/model.hpp"

namespace vmc {

inline const Vec3 kDefaultGravity{0.0, 0.0, -9.81};

// World-frame kinematic data for one configuration.
struct KinState {
    std::vector<Mat3> R;           // link frame orientation
    std::vector<Vec3> p;           // link frame origin
    std::vector<Vec3> joint_axis;  // unit joint axis, world
    std::vector<Vec3> joint_origin;  // point on the joint axis (parent mount)
};

KinState compute_kinematics(const KinematicTree& tree, const VecX& q);

RigidTransform frame_pose(const KinematicTree& tree, const KinState& kin,
                          const std::string& frame);
RigidTransform forward_kinematics(const KinematicTree& tree, const VecX& q,
                                  const std::string& frame);

// World-frame linear-velocity Jacobian (3 x n) of a point given in the frame.
MatX point_jacobian(const KinematicTree& tree, const KinState& kin,
                    const std::string& frame, const Vec3& local_point);
MatX point_jacobian(const KinematicTree& tree, const VecX& q,
                    const std::string& frame, const Vec3& local_point);

// Angular-velocity Jacobian (3 x n) of the frame's link.
MatX frame_angular_jacobian(const KinematicTree& tree, const KinState& kin,
                            const std::string& frame);
MatX frame_angular_jacobian(const KinematicTree& tree, const VecX& q,
                            const std::string& frame);

// Joint-space inertia matrix via the composite-rigid-body algorithm.
MatX mass_matrix(const KinematicTree& tree, const VecX& q);

// Recursive Newton-Euler: u = M(q) qdd + C(q,qd) qd + g(q).
VecX inverse_dynamics(const KinematicTree& tree, const VecX& q, const VecX& qd,
                      const VecX& qdd, const Vec3& gravity);

// C(q,qd) qd, i.e. inverse dynamics with qdd = 0 and no gravity.
VecX velocity_product_torques(const KinematicTree& tree, const VecX& q,
                              const VecX& qd);

// Coriolis matrix from Christoffel symbols of M(q); dM/dq by central
// differences so that Mdot - 2C is exactly skew-symmetric up to FD error.
MatX coriolis_matrix(const KinematicTree& tree, const VecX& q, const VecX& qd);

VecX gravity_vector(const KinematicTree& tree, const VecX& q);
VecX gravity_vector(const KinematicTree& tree, const VecX& q, const Vec3& gravity);

// Energies from link twists (independent of mass_matrix).
double kinetic_energy(const KinematicTree& tree, const VecX& q, const VecX& qd);
double potential_energy(const KinematicTree& tree, const VecX& q, const Vec3& gravity);

struct DynamicsTerms {
    MatX M;
    MatX C;
    VecX g;
};
DynamicsTerms dynamics_terms(const KinematicTree& tree, const VecX& q,
                             const VecX& qd, const Vec3& gravity);

}  // namespace vmc
