#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <random>

#include "oracles.hpp"
#include "vmc/dynamics.hpp"
#include "vmc/errors.hpp"
#include "vmc/urdf.hpp"

using namespace vmc;

namespace {

std::string fixture_path(const std::string& name) {
    return std::string(VMC_FIXTURE_DIR) + "/" + name;
}

KinematicTree two_link() {
    return parse_urdf_file(fixture_path("two_link_planar.urdf"));
}

KinematicTree franka() {
    return parse_urdf_file(fixture_path("franka_instrument.urdf"));
}

// Pendulum about +x, com hanging at (0,0,-l); angle measured from vertical.
KinematicTree pendulum(double mass, double l) {
    KinematicTree tree;
    Link base;
    base.name = "base";
    base.mass = 1.0;
    base.inertia = 0.1 * Mat3::Identity();
    tree.add_root(base);
    Joint j;
    j.name = "swing";
    j.type = JointType::Revolute;
    j.parent_link = 0;
    j.axis = Vec3::UnitX();
    Link bob;
    bob.name = "bob";
    bob.mass = mass;
    bob.com = Vec3(0, 0, -l);
    bob.inertia = Mat3::Zero();
    tree.add_body(j, bob);
    return tree;
}

}  // namespace

TEST_CASE("fk: zero configuration composes fixed origins") {
    KinematicTree tree = franka();
    const VecX q = VecX::Zero(7);
    const RigidTransform base = forward_kinematics(tree, q, "instrument_base");
    // Composing the documented origins by hand: the alternating +-pi/2 rolls
    // leave the flange pointing down, 0.107 below the wrist.
    CHECK(base.p.z() == doctest::Approx(0.333 + 0.316 + 0.384 - 0.107).epsilon(1e-12));
    CHECK(base.p.x() == doctest::Approx(0.0825 - 0.0825 + 0.088).epsilon(1e-12));
    CHECK(std::abs(base.R.determinant() - 1.0) < 1e-10);
    // flange z axis points down at q = 0, so the instrument hangs vertically
    CHECK((base.R * Vec3::UnitZ() + Vec3::UnitZ()).norm() < 1e-12);
}

TEST_CASE("fk: planar two-link reaches (0, 2, 0)") {
    KinematicTree tree = two_link();
    VecX q(2);
    q << M_PI / 2, 0;
    const Vec3 tip = forward_kinematics(tree, q, "tip").p;
    CHECK(tip.x() == doctest::Approx(0.0));
    CHECK(tip.y() == doctest::Approx(2.0));
    CHECK(tip.z() == doctest::Approx(0.0));
}

TEST_CASE("fk: half turn flips a point") {
    KinematicTree tree = pendulum(1.0, 1.0);
    VecX q(1);
    q << M_PI;
    // com at (0,0,-1) rotates about +x to (0,0,1)
    const Vec3 p = forward_kinematics(tree, q, "bob") * Vec3(0, 0, -1);
    CHECK(p.y() == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(p.z() == doctest::Approx(1.0));
}

TEST_CASE("fk: rotations stay orthonormal at random q") {
    KinematicTree tree = franka();
    std::mt19937 rng(3);
    for (int t = 0; t < 20; ++t) {
        VecX q = oracle::random_vec(rng, 7, -2.5, 2.5);
        const Mat3 R = forward_kinematics(tree, q, "instrument_tip").R;
        CHECK((R * R.transpose() - Mat3::Identity()).norm() < 1e-12);
        CHECK(std::abs(R.determinant() - 1.0) < 1e-10);
    }
}

TEST_CASE("point jacobian matches finite differences") {
    KinematicTree tree = franka();
    std::mt19937 rng(5);
    const Vec3 local(0.01, -0.02, 0.05);
    for (int t = 0; t < 25; ++t) {
        VecX q = oracle::random_vec(rng, 7, -2.5, 2.5);
        VecX qd = oracle::random_vec(rng, 7, -1, 1);
        const MatX J = point_jacobian(tree, q, "instrument_tip", local);
        const double h = 1e-6;
        const Vec3 plus = forward_kinematics(tree, q + h * qd, "instrument_tip") * local;
        const Vec3 minus = forward_kinematics(tree, q - h * qd, "instrument_tip") * local;
        const Vec3 fd = (plus - minus) / (2 * h);
        const Vec3 an = J * qd;
        CHECK((an - fd).norm() <= 1e-5 * std::max(1.0, fd.norm()));
    }
}

TEST_CASE("point jacobian: prismatic column is the axis") {
    KinematicTree tree;
    Link base;
    base.name = "base";
    base.mass = 1;
    base.inertia = 0.1 * Mat3::Identity();
    tree.add_root(base);
    Joint j;
    j.name = "slide";
    j.type = JointType::Prismatic;
    j.parent_link = 0;
    j.axis = Vec3::UnitZ();
    Link carriage;
    carriage.name = "carriage";
    carriage.mass = 2.0;
    tree.add_body(j, carriage);

    VecX q(1);
    q << 0.3;
    const MatX J = point_jacobian(tree, q, "carriage", Vec3(0.1, 0.2, 0.3));
    CHECK((J.col(0) - Vec3(0, 0, 1)).norm() < 1e-14);

    // single prismatic joint carrying a 2 kg body: M = [2]
    const MatX M = mass_matrix(tree, q);
    CHECK(M(0, 0) == doctest::Approx(2.0));
}

TEST_CASE("point jacobian: point on a revolute axis gives a zero column") {
    KinematicTree tree = pendulum(1.0, 1.0);
    VecX q(1);
    q << 0.7;
    // the joint axis is +x through the origin; take a point on it
    const MatX J = point_jacobian(tree, q, "bob", Vec3(0.5, 0, 0));
    CHECK(J.col(0).norm() < 1e-14);
}

TEST_CASE("two-link closed-form oracle: M, C, g") {
    KinematicTree tree = two_link();
    oracle::TwoLink ref;
    const double g0 = 9.81;
    const Vec3 gravity(0, -g0, 0);  // in-plane gravity
    std::mt19937 rng(11);
    for (int t = 0; t < 200; ++t) {
        VecX q = oracle::random_vec(rng, 2, -3, 3);
        VecX qd = oracle::random_vec(rng, 2, -2, 2);
        VecX qdd = oracle::random_vec(rng, 2, -2, 2);

        CHECK((mass_matrix(tree, q) - ref.mass(q)).cwiseAbs().maxCoeff() < 1e-10);
        CHECK((coriolis_matrix(tree, q, qd) - ref.coriolis(q, qd)).cwiseAbs().maxCoeff() <
              1e-7);
        CHECK((gravity_vector(tree, q, gravity) - ref.gravity(q, g0)).cwiseAbs().maxCoeff() <
              1e-10);
        CHECK((inverse_dynamics(tree, q, qd, qdd, gravity) - ref.torque(q, qd, qdd, g0))
                  .cwiseAbs()
                  .maxCoeff() < 1e-9);
    }
}

TEST_CASE("mass matrix equals the kinetic-energy Hessian identity") {
    KinematicTree tree = franka();
    std::mt19937 rng(13);
    for (int t = 0; t < 30; ++t) {
        VecX q = oracle::random_vec(rng, 7, -2.5, 2.5);
        VecX qd = oracle::random_vec(rng, 7, -2, 2);
        const double quad = qd.dot(mass_matrix(tree, q) * qd);
        CHECK(quad == doctest::Approx(2.0 * kinetic_energy(tree, q, qd)).epsilon(1e-10));
    }
}

TEST_CASE("mass matrix: symmetric positive definite at random q") {
    KinematicTree tree = franka();
    std::mt19937 rng(17);
    for (int t = 0; t < 100; ++t) {
        VecX q = oracle::random_vec(rng, 7, -2.8, 2.8);
        const MatX M = mass_matrix(tree, q);
        CHECK((M - M.transpose()).cwiseAbs().maxCoeff() < 1e-10);
        Eigen::SelfAdjointEigenSolver<MatX> es(M);
        CHECK(es.eigenvalues().minCoeff() > 0.0);
    }
}

TEST_CASE("inverse dynamics: static case returns gravity vector") {
    KinematicTree tree = franka();
    std::mt19937 rng(19);
    const Vec3 gravity(0, 0, -9.81);
    VecX q = oracle::random_vec(rng, 7, -2, 2);
    const VecX zero = VecX::Zero(7);
    CHECK((inverse_dynamics(tree, q, zero, zero, gravity) - gravity_vector(tree, q, gravity))
              .norm() == doctest::Approx(0.0));
}

TEST_CASE("inverse dynamics: zero gravity, zero velocity gives M qdd") {
    KinematicTree tree = franka();
    std::mt19937 rng(23);
    for (int t = 0; t < 20; ++t) {
        VecX q = oracle::random_vec(rng, 7, -2, 2);
        VecX qdd = oracle::random_vec(rng, 7, -3, 3);
        const VecX lhs = inverse_dynamics(tree, q, VecX::Zero(7), qdd, Vec3::Zero());
        const VecX rhs = mass_matrix(tree, q) * qdd;
        CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-9);
    }
}

TEST_CASE("inverse dynamics is linear in qdd") {
    KinematicTree tree = franka();
    std::mt19937 rng(29);
    for (int t = 0; t < 20; ++t) {
        VecX q = oracle::random_vec(rng, 7, -2, 2);
        VecX qd = oracle::random_vec(rng, 7, -2, 2);
        VecX qdd = oracle::random_vec(rng, 7, -3, 3);
        const Vec3 gravity(0, 0, -9.81);
        const VecX with = inverse_dynamics(tree, q, qd, qdd, gravity);
        const VecX without = inverse_dynamics(tree, q, qd, VecX::Zero(7), gravity);
        const VecX Mqdd = mass_matrix(tree, q) * qdd;
        CHECK((with - without - Mqdd).cwiseAbs().maxCoeff() < 1e-9);
    }
}

TEST_CASE("coriolis: zero velocity gives zero matrix") {
    KinematicTree tree = two_link();
    VecX q(2);
    q << 0.4, -1.1;
    CHECK(coriolis_matrix(tree, q, VecX::Zero(2)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("coriolis: C qd matches RNEA velocity products") {
    KinematicTree tree = franka();
    std::mt19937 rng(31);
    for (int t = 0; t < 10; ++t) {
        VecX q = oracle::random_vec(rng, 7, -2, 2);
        VecX qd = oracle::random_vec(rng, 7, -2, 2);
        const VecX via_matrix = coriolis_matrix(tree, q, qd) * qd;
        const VecX via_rnea = velocity_product_torques(tree, q, qd);
        CHECK((via_matrix - via_rnea).cwiseAbs().maxCoeff() < 1e-8);
    }
}

TEST_CASE("power balance: Mdot - 2C skew symmetric") {
    KinematicTree tree = franka();
    std::mt19937 rng(37);
    for (int t = 0; t < 10; ++t) {
        VecX q = oracle::random_vec(rng, 7, -2, 2);
        VecX qd = oracle::random_vec(rng, 7, -2, 2);
        const MatX C = coriolis_matrix(tree, q, qd);
        // Mdot by central difference along qd
        const double h = 1e-6;
        const MatX Mdot =
            (mass_matrix(tree, q + h * qd) - mass_matrix(tree, q - h * qd)) / (2 * h);
        const MatX S = Mdot - 2 * C;
        CHECK((S + S.transpose()).cwiseAbs().maxCoeff() < 1e-8);
        CHECK(std::abs(qd.dot(S * qd)) < 1e-8);
    }
}

TEST_CASE("gravity: zero field gives zero torques") {
    KinematicTree tree = franka();
    std::mt19937 rng(41);
    VecX q = oracle::random_vec(rng, 7, -2, 2);
    CHECK(gravity_vector(tree, q, Vec3::Zero()).norm() == doctest::Approx(0.0));
}

TEST_CASE("gravity: pendulum oracle m g l sin(q)") {
    const double m = 1.7, l = 0.6;
    KinematicTree tree = pendulum(m, l);
    for (double angle : {0.0, 0.3, 1.0, -0.8, 2.9}) {
        VecX q(1);
        q << angle;
        const VecX g = gravity_vector(tree, q, Vec3(0, 0, -9.81));
        CHECK(g[0] == doctest::Approx(m * 9.81 * l * std::sin(angle)).epsilon(1e-12));
    }
}

TEST_CASE("gravity equals the potential-energy gradient") {
    KinematicTree tree = franka();
    std::mt19937 rng(43);
    const Vec3 gravity(0, 0, -9.81);
    for (int t = 0; t < 10; ++t) {
        VecX q = oracle::random_vec(rng, 7, -2, 2);
        const VecX g = gravity_vector(tree, q, gravity);
        for (int j = 0; j < 7; ++j) {
            VecX qp = q, qm = q;
            qp[j] += 1e-6;
            qm[j] -= 1e-6;
            const double fd =
                (potential_energy(tree, qp, gravity) - potential_energy(tree, qm, gravity)) /
                2e-6;
            CHECK(g[j] == doctest::Approx(fd).epsilon(1e-6));
        }
    }
}

TEST_CASE("dimension mismatches are rejected") {
    KinematicTree tree = two_link();
    CHECK_THROWS_AS(mass_matrix(tree, VecX::Zero(3)), DimensionMismatch);
    CHECK_THROWS_AS(forward_kinematics(tree, VecX::Zero(1), "tip"), DimensionMismatch);
    CHECK_THROWS_AS(
        inverse_dynamics(tree, VecX::Zero(2), VecX::Zero(2), VecX::Zero(1), Vec3::Zero()),
        DimensionMismatch);
    CHECK_THROWS_AS(forward_kinematics(tree, VecX::Zero(2), "nope"), UnknownFrame);
}
