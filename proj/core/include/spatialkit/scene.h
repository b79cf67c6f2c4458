#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace spatialkit {

// World frame is z-up, in meters.
struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  friend bool operator==(const Vec3&, const Vec3&) = default;
};

inline Vec3 operator+(const Vec3& a, const Vec3& b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
inline Vec3 operator-(const Vec3& a, const Vec3& b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
inline Vec3 operator*(double s, const Vec3& v) { return {s * v.x, s * v.y, s * v.z}; }

struct Object3D {
  std::string id;
  std::string category;
  Vec3 centroid;
  Vec3 aabb_min;
  Vec3 aabb_max;

  Vec3 extent() const { return aabb_max - aabb_min; }

  friend bool operator==(const Object3D&, const Object3D&) = default;
};

// A calibrated pinhole view. `rotation` is the row-major world-to-camera
// matrix, so a world point p maps to the camera frame as R * p + t. The
// camera frame follows the usual vision convention: x right, y down, z
// forward.
struct CameraView {
  std::string id;
  std::int64_t frame_index = 0;
  std::array<double, 9> rotation{1, 0, 0, 0, 1, 0, 0, 0, 1};
  Vec3 translation;
  double fx = 1.0;
  double fy = 1.0;
  double cx = 0.0;
  double cy = 0.0;
  double width = 1.0;
  double height = 1.0;

  Vec3 to_camera(const Vec3& world) const;

  friend bool operator==(const CameraView&, const CameraView&) = default;
};

struct FloorExtent {
  double min_x = 0.0;
  double min_y = 0.0;
  double max_x = 0.0;
  double max_y = 0.0;

  double area() const { return (max_x - min_x) * (max_y - min_y); }

  friend bool operator==(const FloorExtent&, const FloorExtent&) = default;
};

struct Scene {
  std::string id;
  std::vector<Object3D> objects;
  std::vector<CameraView> views;  // ordered by frame_index
  std::optional<FloorExtent> floor_extent;

  const Object3D* find_object(std::string_view object_id) const;
  const CameraView* find_view(std::string_view view_id) const;

  // floor_extent when present, otherwise the xy bounding rectangle of all
  // object boxes. Returns nullopt for a scene with no objects and no extent.
  std::optional<FloorExtent> effective_floor_extent() const;

  friend bool operator==(const Scene&, const Scene&) = default;
};

struct Violation {
  std::string entity_id;
  std::string rule;
  std::string detail;
};

// Rule names reported by validate_scene.
namespace rules {
inline constexpr std::string_view kNonFinite = "non_finite";
inline constexpr std::string_view kAabbOrder = "aabb_order";
inline constexpr std::string_view kCentroidInside = "centroid_inside";
inline constexpr std::string_view kCategoryEmpty = "category_empty";
inline constexpr std::string_view kCategoryCase = "category_lowercase";
inline constexpr std::string_view kDuplicateObject = "duplicate_object_id";
inline constexpr std::string_view kDuplicateView = "duplicate_view_id";
inline constexpr std::string_view kRotation = "rotation_orthonormal";
inline constexpr std::string_view kFocal = "focal_positive";
inline constexpr std::string_view kImageSize = "image_size_positive";
inline constexpr std::string_view kFrameIndex = "frame_index_nonnegative";
inline constexpr std::string_view kViewOrder = "view_order";
inline constexpr std::string_view kFloorOrder = "floor_extent_order";
}  // namespace rules

inline constexpr double kRotationTolerance = 1e-6;

// Total: never throws. Empty iff every type invariant holds.
std::vector<Violation> validate_scene(const Scene& scene);

// Parses one scene document. Throws SchemaError for missing or ill-typed
// fields (message carries the JSON path) and InvariantError for the first
// invariant violation (message carries entity id and rule).
Scene parse_scene(std::string_view document);
Scene scene_from_json(const nlohmann::json& doc);

// Schema checks only; pair with validate_scene to list every violation.
Scene scene_from_json_unchecked(const nlohmann::json& doc);

nlohmann::json scene_to_json(const Scene& scene);
std::string serialize_scene(const Scene& scene);

}  // namespace spatialkit
