#pragma once

#include <array>
#include <cstddef>
#include <string_view>

#include <Eigen/Core>

namespace limbmap {

enum class Joint { Shoulder = 0, Elbow = 1, Hip = 2, Knee = 3 };

inline constexpr std::size_t kJointCount = 4;
inline constexpr std::array<Joint, kJointCount> kAllJoints{Joint::Shoulder, Joint::Elbow,
                                                           Joint::Hip, Joint::Knee};

constexpr std::size_t index_of(Joint j) { return static_cast<std::size_t>(j); }

std::string_view joint_name(Joint j);
/// Inverse of joint_name; throws Error(BadModelFile) on an unknown name.
Joint joint_from_name(std::string_view name);

/// Four-component peak/trough amplitude vector, degrees.
using Vec4 = Eigen::Vector4d;
using Mat4 = Eigen::Matrix4d;

template <typename T>
using PerJoint = std::array<T, kJointCount>;

}  // namespace limbmap
