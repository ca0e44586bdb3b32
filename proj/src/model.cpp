#include "vmc/model.hpp"

#include <cstdio>
#include <sstream>

#include "vmc/errors.hpp"

namespace vmc {

const Frame& KinematicTree::frame(const std::string& name) const {
    auto it = frames_.find(name);
    if (it == frames_.end()) throw UnknownFrame("unknown frame: " + name);
    return it->second;
}

RigidTransform KinematicTree::instrument_base_to_tip() const {
    const Frame& base = frame("instrument_base");
    const Frame& tip = frame("instrument_tip");
    if (base.link != tip.link)
        throw MissingInstrumentFrame(
            "instrument_base and instrument_tip must sit on the same rigid link");
    return base.offset.inverse() * tip.offset;
}

double KinematicTree::instrument_length() const {
    return instrument_base_to_tip().p.norm();
}

int KinematicTree::add_root(Link link) {
    if (!links_.empty()) throw Error("root link must be added first");
    link.parent_joint = -1;
    link.parent_link = -1;
    links_.push_back(std::move(link));
    add_frame(links_.back().name, 0, RigidTransform::Identity());
    return 0;
}

int KinematicTree::add_body(Joint joint, Link link) {
    if (joint.parent_link < 0 || joint.parent_link >= link_count())
        throw Error("add_body: parent link out of range");
    const int joint_idx = dof();
    const int link_idx = link_count();
    joint.child_link = link_idx;
    joint.axis.normalize();
    link.parent_joint = joint_idx;
    link.parent_link = joint.parent_link;
    joints_.push_back(std::move(joint));
    links_.push_back(std::move(link));
    add_frame(links_.back().name, link_idx, RigidTransform::Identity());
    return joint_idx;
}

void KinematicTree::add_frame(const std::string& name, int link,
                              const RigidTransform& offset) {
    frames_[name] = Frame{link, offset};
}

void KinematicTree::merge_inertial(int link_idx, const RigidTransform& where,
                                   double mass, const Vec3& com,
                                   const Mat3& inertia_about_com) {
    Link& l = links_[static_cast<size_t>(link_idx)];
    const Vec3 com_in_link = where * com;
    const Mat3 inertia_in_link = where.R * inertia_about_com * where.R.transpose();

    const double total = l.mass + mass;
    if (total <= 0.0) return;
    const Vec3 new_com = (l.mass * l.com + mass * com_in_link) / total;

    auto shift = [](double m, const Vec3& d) -> Mat3 {
        return m * (d.squaredNorm() * Mat3::Identity() - d * d.transpose());
    };
    l.inertia = l.inertia + shift(l.mass, l.com - new_com) + inertia_in_link +
                shift(mass, com_in_link - new_com);
    l.com = new_com;
    l.mass = total;
}

std::string KinematicTree::summary() const {
    std::ostringstream out;
    char buf[256];
    auto num = [&](double v) {
        std::snprintf(buf, sizeof(buf), "%.12g", v);
        return std::string(buf);
    };
    for (const Link& l : links_) {
        out << "link " << l.name << " mass=" << num(l.mass) << " com=[" << num(l.com.x())
            << " " << num(l.com.y()) << " " << num(l.com.z()) << "]";
        out << " inertia=[";
        for (int r = 0; r < 3; ++r)
            for (int c = 0; c < 3; ++c)
                out << num(l.inertia(r, c)) << ((r == 2 && c == 2) ? "]" : " ");
        out << "\n";
    }
    for (const Joint& j : joints_) {
        out << "joint " << j.name << " type="
            << (j.type == JointType::Revolute ? "revolute" : "prismatic")
            << " parent=" << links_[static_cast<size_t>(j.parent_link)].name
            << " child=" << links_[static_cast<size_t>(j.child_link)].name << " axis=["
            << num(j.axis.x()) << " " << num(j.axis.y()) << " " << num(j.axis.z()) << "]";
        if (j.limits)
            out << " limits=[" << num(j.limits->lower) << " " << num(j.limits->upper) << "]";
        out << "\n";
    }
    for (const auto& [name, f] : frames_) {
        out << "frame " << name << " link=" << links_[static_cast<size_t>(f.link)].name
            << " p=[" << num(f.offset.p.x()) << " " << num(f.offset.p.y()) << " "
            << num(f.offset.p.z()) << "]\n";
    }
    return out.str();
}

}  // namespace vmc
