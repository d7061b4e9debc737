#pragma once

#include <cmath>
#include <numbers>

namespace langnav {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  friend Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
  friend Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
  friend Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
  friend Vec2 operator*(Vec2 a, double s) { return {s * a.x, s * a.y}; }
  friend bool operator==(Vec2 a, Vec2 b) = default;
};

inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double norm(Vec2 a) { return std::hypot(a.x, a.y); }
inline double distance(Vec2 a, Vec2 b) { return norm(a - b); }
inline double squared_distance(Vec2 a, Vec2 b) {
  const double dx = a.x - b.x;
  const double dy = a.y - b.y;
  return dx * dx + dy * dy;
}

// Wraps to (-pi, pi].
inline double wrap_angle(double a) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  a = std::fmod(a + std::numbers::pi, two_pi);
  if (a < 0.0) a += two_pi;
  a -= std::numbers::pi;
  return a == -std::numbers::pi ? std::numbers::pi : a;
}

struct Pose {
  Vec2 position;
  double heading = 0.0;
};

// World point expressed in the frame of `pose` (x forward, y left).
inline Vec2 to_local(const Pose& pose, Vec2 world) {
  const Vec2 d = world - pose.position;
  const double c = std::cos(pose.heading);
  const double s = std::sin(pose.heading);
  return {c * d.x + s * d.y, -s * d.x + c * d.y};
}

inline Vec2 to_world(const Pose& pose, Vec2 local) {
  const double c = std::cos(pose.heading);
  const double s = std::sin(pose.heading);
  return {pose.position.x + c * local.x - s * local.y,
          pose.position.y + s * local.x + c * local.y};
}

}  // namespace langnav
