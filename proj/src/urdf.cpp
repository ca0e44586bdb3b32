#include "vmc/urdf.hpp"

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>

#include <Eigen/Eigenvalues>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <vector>

#include "vmc/errors.hpp"

namespace vmc {
namespace {

namespace bpt = boost::property_tree;

Vec3 parse_vec3(const std::string& text, const std::string& where) {
    std::istringstream in(text);
    Vec3 v;
    if (!(in >> v.x() >> v.y() >> v.z()))
        throw MalformedXml("cannot parse 3-vector '" + text + "' in " + where);
    return v;
}

RigidTransform parse_origin(const bpt::ptree& node) {
    Vec3 xyz = Vec3::Zero(), rpy = Vec3::Zero();
    if (auto origin = node.get_child_optional("origin")) {
        if (auto s = origin->get_optional<std::string>("<xmlattr>.xyz"))
            xyz = parse_vec3(*s, "origin");
        if (auto s = origin->get_optional<std::string>("<xmlattr>.rpy"))
            rpy = parse_vec3(*s, "origin");
    }
    return make_transform(xyz, rpy);
}

struct RawInertial {
    double mass = 0.0;
    Vec3 com = Vec3::Zero();
    Mat3 inertia = Mat3::Zero();  // about com, link frame
};

struct RawLink {
    std::string name;
    std::optional<RawInertial> inertial;
};

struct RawJoint {
    std::string name;
    std::string type;
    std::string parent, child;
    RigidTransform origin;
    Vec3 axis = Vec3::UnitX();  // URDF default
    std::optional<JointLimits> limits;
};

void validate_inertial(const RawInertial& in, const std::string& link_name) {
    if (in.mass < 0.0)
        throw MalformedXml("negative mass on link " + link_name);
    Eigen::SelfAdjointEigenSolver<Mat3> es(in.inertia);
    const Vec3 moments = es.eigenvalues();
    const double tol = 1e-9 * std::max(1.0, in.inertia.trace());
    if (moments.minCoeff() < -tol)
        throw MalformedXml("inertia of link " + link_name + " is not positive semidefinite");
    if (in.mass > 0.0) {
        // Triangle inequality on the principal moments.
        const double a = moments(0), b = moments(1), c = moments(2);
        if (a + b < c - tol)
            throw MalformedXml("inertia of link " + link_name +
                               " violates the principal-moment triangle inequality");
    }
}

RawInertial parse_inertial(const bpt::ptree& node, const std::string& link_name) {
    RawInertial out;
    out.mass = node.get<double>("mass.<xmlattr>.value", 0.0);
    RigidTransform pose = parse_origin(node);
    out.com = pose.p;
    if (auto in = node.get_child_optional("inertia")) {
        Mat3 I;
        const double ixx = in->get<double>("<xmlattr>.ixx", 0.0);
        const double ixy = in->get<double>("<xmlattr>.ixy", 0.0);
        const double ixz = in->get<double>("<xmlattr>.ixz", 0.0);
        const double iyy = in->get<double>("<xmlattr>.iyy", 0.0);
        const double iyz = in->get<double>("<xmlattr>.iyz", 0.0);
        const double izz = in->get<double>("<xmlattr>.izz", 0.0);
        I << ixx, ixy, ixz, ixy, iyy, iyz, ixz, iyz, izz;
        out.inertia = pose.R * I * pose.R.transpose();
    }
    validate_inertial(out, link_name);
    return out;
}

}  // namespace

KinematicTree parse_urdf(const std::string& xml_text) {
    bpt::ptree doc;
    try {
        std::istringstream in(xml_text);
        bpt::read_xml(in, doc);
    } catch (const bpt::xml_parser_error& e) {
        throw MalformedXml(std::string("XML parse error: ") + e.what());
    }

    auto robot = doc.get_child_optional("robot");
    if (!robot) throw MalformedXml("missing <robot> root element");

    std::vector<RawLink> raw_links;
    std::vector<RawJoint> raw_joints;
    std::map<std::string, int> link_by_name;

    for (const auto& [key, node] : *robot) {
        if (key == "link") {
            RawLink l;
            l.name = node.get<std::string>("<xmlattr>.name", "");
            if (l.name.empty()) throw MalformedXml("link without a name");
            if (link_by_name.count(l.name))
                throw MalformedXml("duplicate link name: " + l.name);
            if (auto in = node.get_child_optional("inertial"))
                l.inertial = parse_inertial(*in, l.name);
            link_by_name[l.name] = static_cast<int>(raw_links.size());
            raw_links.push_back(std::move(l));
        } else if (key == "joint") {
            RawJoint j;
            j.name = node.get<std::string>("<xmlattr>.name", "");
            j.type = node.get<std::string>("<xmlattr>.type", "");
            j.parent = node.get<std::string>("parent.<xmlattr>.link", "");
            j.child = node.get<std::string>("child.<xmlattr>.link", "");
            if (j.name.empty() || j.parent.empty() || j.child.empty())
                throw MalformedXml("joint " + j.name + " lacks a name/parent/child");
            if (j.type != "revolute" && j.type != "continuous" && j.type != "prismatic" &&
                j.type != "fixed")
                throw UnsupportedJointType("joint " + j.name + " has unsupported type '" +
                                           j.type + "'");
            j.origin = parse_origin(node);
            if (auto s = node.get_optional<std::string>("axis.<xmlattr>.xyz"))
                j.axis = parse_vec3(*s, "axis of joint " + j.name);
            if (j.axis.norm() < 1e-12)
                throw MalformedXml("joint " + j.name + " has a zero axis");
            j.axis.normalize();
            if (j.type == "revolute" || j.type == "prismatic") {
                if (auto lim = node.get_child_optional("limit")) {
                    JointLimits lims;
                    lims.lower = lim->get<double>("<xmlattr>.lower", 0.0);
                    lims.upper = lim->get<double>("<xmlattr>.upper", 0.0);
                    j.limits = lims;
                }
            }
            raw_joints.push_back(std::move(j));
        }
    }
    if (raw_links.empty()) throw MalformedXml("URDF contains no links");

    // Locate the unique root link.
    std::map<std::string, int> parent_joint_count;
    for (const auto& j : raw_joints) {
        if (!link_by_name.count(j.parent))
            throw MalformedXml("joint " + j.name + " references unknown parent " + j.parent);
        if (!link_by_name.count(j.child))
            throw MalformedXml("joint " + j.name + " references unknown child " + j.child);
        if (++parent_joint_count[j.child] > 1)
            throw CyclicGraph("link " + j.child + " has multiple parent joints");
    }
    std::string root_name;
    for (const auto& l : raw_links) {
        if (parent_joint_count.count(l.name)) continue;
        if (!root_name.empty())
            throw MalformedXml("multiple root links: " + root_name + " and " + l.name);
        root_name = l.name;
    }
    if (root_name.empty()) throw CyclicGraph("no root link (joint graph has a cycle)");

    // Inertial requirement: any link that moves, or that carries a movable
    // joint, must specify an inertial.
    std::map<std::string, bool> moves, carries_movable;
    for (const auto& j : raw_joints) {
        if (j.type == "fixed") continue;
        moves[j.child] = true;
        carries_movable[j.parent] = true;
    }
    for (const auto& l : raw_links) {
        if ((moves.count(l.name) || carries_movable.count(l.name)) && !l.inertial)
            throw MissingInertial("link " + l.name + " needs an <inertial> element");
    }

    // Assemble the tree, folding fixed joints into frames. `placement` maps a
    // raw link name to its tree link and fixed offset within it.
    KinematicTree tree;
    std::map<std::string, Frame> placement;

    {
        const RawLink& root = raw_links[static_cast<size_t>(link_by_name[root_name])];
        Link l;
        l.name = root.name;
        if (root.inertial) {
            l.mass = root.inertial->mass;
            l.com = root.inertial->com;
            l.inertia = root.inertial->inertia;
        }
        tree.add_root(std::move(l));
        placement[root_name] = Frame{0, RigidTransform::Identity()};
    }

    std::vector<bool> done(raw_joints.size(), false);
    size_t remaining = raw_joints.size();
    while (remaining > 0) {
        bool progressed = false;
        for (size_t ji = 0; ji < raw_joints.size(); ++ji) {
            if (done[ji]) continue;
            const RawJoint& rj = raw_joints[ji];
            auto it = placement.find(rj.parent);
            if (it == placement.end()) continue;
            const Frame& at = it->second;
            const RawLink& child = raw_links[static_cast<size_t>(link_by_name[rj.child])];

            if (rj.type == "fixed") {
                const RigidTransform offset = at.offset * rj.origin;
                if (child.inertial)
                    tree.merge_inertial(at.link, offset, child.inertial->mass,
                                        child.inertial->com, child.inertial->inertia);
                tree.add_frame(child.name, at.link, offset);
                placement[rj.child] = Frame{at.link, offset};
            } else {
                Joint j;
                j.name = rj.name;
                j.type = (rj.type == "prismatic") ? JointType::Prismatic : JointType::Revolute;
                j.parent_link = at.link;
                j.origin = at.offset * rj.origin;
                j.axis = rj.axis;
                if (rj.type != "continuous") j.limits = rj.limits;
                Link l;
                l.name = child.name;
                if (child.inertial) {
                    l.mass = child.inertial->mass;
                    l.com = child.inertial->com;
                    l.inertia = child.inertial->inertia;
                }
                const int jidx = tree.add_body(std::move(j), std::move(l));
                placement[rj.child] =
                    Frame{tree.joint(jidx).child_link, RigidTransform::Identity()};
            }
            done[ji] = true;
            --remaining;
            progressed = true;
        }
        if (!progressed)
            throw CyclicGraph("joint graph contains a cycle or unreachable subtree");
    }
    return tree;
}

KinematicTree parse_urdf_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open URDF file: " + path);
    std::ostringstream text;
    text << in.rdbuf();
    return parse_urdf(text.str());
}

KinematicTree attach_instrument(const KinematicTree& tree,
                                const std::string& parent_frame,
                                const RigidTransform& offset, double length,
                                double mass) {
    const Frame& at = tree.frame(parent_frame);  // throws UnknownFrame
    KinematicTree out = tree;

    const RigidTransform base = at.offset * offset;
    const RigidTransform tip = base * RigidTransform{Mat3::Identity(), Vec3(0, 0, length)};
    out.add_frame("instrument_base", at.link, base);
    out.add_frame("instrument_tip", at.link, tip);

    if (mass > 0.0) {
        // Thin rod along +z of the attachment frame, 5 mm radius.
        const double r = 0.005;
        Mat3 I = Mat3::Zero();
        if (length > 0.0) {
            I(0, 0) = I(1, 1) = mass * length * length / 12.0 + mass * r * r / 4.0;
            I(2, 2) = mass * r * r / 2.0;
        }
        out.merge_inertial(at.link, base, mass, Vec3(0, 0, length / 2.0), I);
    }
    return out;
}

}  // namespace vmc
