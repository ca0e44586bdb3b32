#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace vmc {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using VecX = Eigen::VectorXd;
using MatX = Eigen::MatrixXd;

inline Mat3 skew(const Vec3& v) {
    Mat3 s;
    s << 0, -v.z(), v.y(),
         v.z(), 0, -v.x(),
         -v.y(), v.x(), 0;
    return s;
}

// Rotation from URDF roll-pitch-yaw (fixed-axis XYZ): R = Rz(y) * Ry(p) * Rx(r).
inline Mat3 rpy_to_matrix(double roll, double pitch, double yaw) {
    return (Eigen::AngleAxisd(yaw, Vec3::UnitZ()) *
            Eigen::AngleAxisd(pitch, Vec3::UnitY()) *
            Eigen::AngleAxisd(roll, Vec3::UnitX()))
        .toRotationMatrix();
}

inline Mat3 axis_angle(const Vec3& unit_axis, double angle) {
    return Eigen::AngleAxisd(angle, unit_axis).toRotationMatrix();
}

// Minimal-angle rotation taking unit vector `from` to unit vector `to`.
inline Mat3 rotation_between(const Vec3& from, const Vec3& to) {
    return Eigen::Quaterniond::FromTwoVectors(from, to).toRotationMatrix();
}

struct RigidTransform {
    Mat3 R = Mat3::Identity();
    Vec3 p = Vec3::Zero();

    static RigidTransform Identity() { return {}; }

    RigidTransform operator*(const RigidTransform& other) const {
        return {R * other.R, p + R * other.p};
    }
    Vec3 operator*(const Vec3& x) const { return p + R * x; }

    RigidTransform inverse() const {
        Mat3 Rt = R.transpose();
        return {Rt, -(Rt * p)};
    }
};

inline RigidTransform make_transform(const Vec3& xyz, const Vec3& rpy) {
    return {rpy_to_matrix(rpy.x(), rpy.y(), rpy.z()), xyz};
}

}  // namespace vmc
