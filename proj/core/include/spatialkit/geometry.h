#pragma once

#include <array>
#include <optional>
#include <span>
#include <string_view>

#include "spatialkit/scene.h"

namespace spatialkit {

// Points at or closer than this camera-frame depth are treated as behind
// the camera.
inline constexpr double kMinDepth = 1e-6;

struct Projection2D {
  double u = 0.0;
  double v = 0.0;
  double depth = 0.0;
};

struct BBox2D {
  double x_min = 0.0;
  double y_min = 0.0;
  double x_max = 0.0;
  double y_max = 0.0;

  double area() const { return (x_max - x_min) * (y_max - y_min); }

  friend bool operator==(const BBox2D&, const BBox2D&) = default;
};

enum class DirectionLabel {
  // single image, camera-relative
  kLeft,
  kRight,
  kFront,
  kBack,
  kLeftFront,
  kLeftBack,
  kRightFront,
  kRightBack,
  // multi-view quadrants
  kFrontLeft,
  kFrontRight,
  kBackLeft,
  kBackRight,
};

std::string_view to_string(DirectionLabel label);
std::optional<DirectionLabel> direction_from_string(std::string_view text);

std::span<const DirectionLabel> single_image_labels();
std::span<const DirectionLabel> quadrant_labels();

struct DirectionMargins {
  double eps_x = 0.05;           // fraction of image width
  double eps_z = 0.10;           // relative depth difference
  double axis_margin_deg = 10.0; // quadrant rejection band around each axis
};

// Ground-plane quantities behind a multi-view direction label.
struct DirectionComputation {
  std::array<double, 2> vec_a{};  // positioning -> orienting
  std::array<double, 2> vec_b{};  // positioning -> querying
  double theta_deg = 0.0;         // unsigned angle in [0, 180]
  double signed_phi_deg = 0.0;    // counter-clockwise from vec_a, in (-180, 180]
  double x_rot = 0.0;             // vec_b in the frame where vec_a is +y
  double y_rot = 0.0;
};

// Camera-relative offsets used by the single-image classifier.
struct SingleImageOffsets {
  double du = 0.0;  // (u_a - u_b) / width
  double dz = 0.0;  // (z_a - z_b) / z_b
};

std::optional<Projection2D> project_point(const CameraView& view, const Vec3& p);

// Eight corners of the box, in (x, y, z) bit order: corner i takes the max
// coordinate on axis k when bit k of i is set.
std::array<Vec3, 8> box_corners(const Object3D& obj);

std::optional<BBox2D> project_bbox(const CameraView& view, const Object3D& obj);

// The 64 fixed sample points used for visibility: the 4x4x4 lattice at
// fractions {0, 1/3, 2/3, 1} of the box along each axis. That is the 8
// corners, 2 points on each of the 12 edges, 4 points on each of the 6
// faces and 8 interior points.
std::array<Vec3, 64> visibility_samples(const Object3D& obj);

// Fraction of the visibility samples with positive depth that land inside
// [0, width] x [0, height]. No occlusion modelling.
double visibility_ratio(const CameraView& view, const Object3D& obj);

double centroid_distance(const Object3D& a, const Object3D& b);
double closest_point_distance(const Object3D& a, const Object3D& b);

// Largest box extent in centimeters.
double max_dimension_cm(const Object3D& obj);

std::optional<SingleImageOffsets> single_image_offsets(const CameraView& view, const Object3D& a,
                                                       const Object3D& b);
std::optional<DirectionLabel> classify_single_image(const SingleImageOffsets& offsets,
                                                    const DirectionMargins& margins);

// Where `a` lies relative to `b` from the camera's point of view. nullopt
// when either centroid is behind the camera or the pair is within both
// margins.
std::optional<DirectionLabel> relative_direction_single(const CameraView& view, const Object3D& a,
                                                        const Object3D& b,
                                                        const DirectionMargins& margins = {});

struct MultiviewDirection {
  DirectionLabel label;
  DirectionComputation computation;
};

// Computes the ground-plane geometry only. Throws DegenerateGeometry when
// either ground vector is shorter than 1e-6.
DirectionComputation multiview_computation(const Object3D& positioning, const Object3D& orienting,
                                           const Object3D& querying);

// Angular distance in degrees from vec_b to the nearest quadrant axis.
double axis_distance_deg(const DirectionComputation& c);

// Quadrant of the querying object for an observer standing at the
// positioning object and facing the orienting object. nullopt when vec_b
// lies within axis_margin_deg of an axis.
std::optional<MultiviewDirection> relative_direction_multiview(const Object3D& positioning,
                                                               const Object3D& orienting,
                                                               const Object3D& querying,
                                                               double axis_margin_deg = 10.0);

}  // namespace spatialkit
