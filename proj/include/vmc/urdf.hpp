#pragma once

#include <string>

#include "vmc/model.hpp"

namespace vmc {

// Parses the URDF subset used here: revolute/continuous/prismatic/fixed
// joints and inertials. Fixed joints are folded into named frames on their
// parent link; visual/collision elements are ignored.
KinematicTree parse_urdf(const std::string& xml_text);
KinematicTree parse_urdf_file(const std::string& path);

// Returns a copy of `tree` with a rod instrument fixed to `parent_frame`.
// The instrument extends `length` metres along the +z axis of the attachment
// frame and defines the frames "instrument_base" and "instrument_tip".
KinematicTree attach_instrument(const KinematicTree& tree,
                                const std::string& parent_frame,
                                const RigidTransform& offset, double length,
                                double mass);

}  // namespace vmc
