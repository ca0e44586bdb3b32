#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "vmc/geometry.hpp"

namespace vmc {

enum class JointType { Revolute, Prismatic };

struct JointLimits {
    double lower = 0.0;
    double upper = 0.0;
};

// Rigid body with inertial data expressed in its own link frame.
struct Link {
    std::string name;
    double mass = 0.0;
    Vec3 com = Vec3::Zero();      // centre of mass, link frame
    Mat3 inertia = Mat3::Zero();  // about com, link frame
    int parent_joint = -1;        // index into joints(), -1 for the root link
    int parent_link = -1;
};

// Movable joint. `origin` maps points from the child/joint frame into the
// parent link frame at q = 0; `axis` is a unit vector in the joint frame.
struct Joint {
    std::string name;
    JointType type = JointType::Revolute;
    int parent_link = -1;
    int child_link = -1;
    RigidTransform origin;
    Vec3 axis = Vec3::UnitZ();
    std::optional<JointLimits> limits;
};

// Named frame: fixed offset on a link. Fixed URDF joints fold into these.
struct Frame {
    int link = -1;
    RigidTransform offset;
};

class KinematicTree {
public:
    int dof() const { return static_cast<int>(joints_.size()); }
    int link_count() const { return static_cast<int>(links_.size()); }

    const std::vector<Link>& links() const { return links_; }
    const std::vector<Joint>& joints() const { return joints_; }
    const Link& link(int i) const { return links_[static_cast<size_t>(i)]; }
    const Joint& joint(int i) const { return joints_[static_cast<size_t>(i)]; }

    bool has_frame(const std::string& name) const { return frames_.count(name) > 0; }
    const Frame& frame(const std::string& name) const;  // throws UnknownFrame
    const std::map<std::string, Frame>& frames() const { return frames_; }

    bool has_instrument() const {
        return has_frame("instrument_base") && has_frame("instrument_tip");
    }
    // |tip - base|; requires both frames on the same rigid link.
    double instrument_length() const;
    // Fixed transform base -> tip on their common link.
    RigidTransform instrument_base_to_tip() const;

    // One-line-per-item canonical description; stable across parses.
    std::string summary() const;

    // --- construction (parser and in-code test models) ---
    int add_root(Link link);
    // Appends a movable joint and its child link; parent must already exist,
    // so joints are topologically ordered by construction. Returns the joint
    // index (== dof order).
    int add_body(Joint joint, Link link);
    void add_frame(const std::string& name, int link, const RigidTransform& offset);
    // Composes an extra rigid body (fixed at `where` on `link`) into that
    // link's inertial parameters.
    void merge_inertial(int link, const RigidTransform& where, double mass,
                        const Vec3& com, const Mat3& inertia_about_com);

private:
    std::vector<Link> links_;
    std::vector<Joint> joints_;
    std::map<std::string, Frame> frames_;
};

}  // namespace vmc
