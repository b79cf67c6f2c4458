#include "spatialkit/geometry.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "spatialkit/errors.h"

namespace spatialkit {

namespace {

constexpr std::array<DirectionLabel, 8> kSingleLabels = {
    DirectionLabel::kLeft,      DirectionLabel::kRight,     DirectionLabel::kFront,
    DirectionLabel::kBack,      DirectionLabel::kLeftFront, DirectionLabel::kLeftBack,
    DirectionLabel::kRightFront, DirectionLabel::kRightBack,
};

constexpr std::array<DirectionLabel, 4> kQuadrantLabels = {
    DirectionLabel::kFrontLeft,
    DirectionLabel::kFrontRight,
    DirectionLabel::kBackLeft,
    DirectionLabel::kBackRight,
};

constexpr double kRadToDeg = 180.0 / std::numbers::pi;

}  // namespace

std::string_view to_string(DirectionLabel label) {
  switch (label) {
    case DirectionLabel::kLeft: return "left";
    case DirectionLabel::kRight: return "right";
    case DirectionLabel::kFront: return "front";
    case DirectionLabel::kBack: return "back";
    case DirectionLabel::kLeftFront: return "left-front";
    case DirectionLabel::kLeftBack: return "left-back";
    case DirectionLabel::kRightFront: return "right-front";
    case DirectionLabel::kRightBack: return "right-back";
    case DirectionLabel::kFrontLeft: return "front-left";
    case DirectionLabel::kFrontRight: return "front-right";
    case DirectionLabel::kBackLeft: return "back-left";
    case DirectionLabel::kBackRight: return "back-right";
  }
  return "";
}

std::optional<DirectionLabel> direction_from_string(std::string_view text) {
  for (auto l : kSingleLabels) {
    if (to_string(l) == text) return l;
  }
  for (auto l : kQuadrantLabels) {
    if (to_string(l) == text) return l;
  }
  return std::nullopt;
}

std::span<const DirectionLabel> single_image_labels() { return kSingleLabels; }
std::span<const DirectionLabel> quadrant_labels() { return kQuadrantLabels; }

std::optional<Projection2D> project_point(const CameraView& view, const Vec3& p) {
  const Vec3 c = view.to_camera(p);
  if (c.z <= kMinDepth) return std::nullopt;
  return Projection2D{view.fx * c.x / c.z + view.cx, view.fy * c.y / c.z + view.cy, c.z};
}

std::array<Vec3, 8> box_corners(const Object3D& obj) {
  std::array<Vec3, 8> out;
  for (int i = 0; i < 8; ++i) {
    out[i] = {(i & 1) ? obj.aabb_max.x : obj.aabb_min.x, (i & 2) ? obj.aabb_max.y : obj.aabb_min.y,
              (i & 4) ? obj.aabb_max.z : obj.aabb_min.z};
  }
  return out;
}

std::optional<BBox2D> project_bbox(const CameraView& view, const Object3D& obj) {
  bool any = false;
  BBox2D box{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(),
             -std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
  for (const auto& corner : box_corners(obj)) {
    auto p = project_point(view, corner);
    if (!p) continue;
    any = true;
    box.x_min = std::min(box.x_min, p->u);
    box.y_min = std::min(box.y_min, p->v);
    box.x_max = std::max(box.x_max, p->u);
    box.y_max = std::max(box.y_max, p->v);
  }
  if (!any) return std::nullopt;
  box.x_min = std::clamp(box.x_min, 0.0, view.width);
  box.x_max = std::clamp(box.x_max, 0.0, view.width);
  box.y_min = std::clamp(box.y_min, 0.0, view.height);
  box.y_max = std::clamp(box.y_max, 0.0, view.height);
  return box;
}

std::array<Vec3, 64> visibility_samples(const Object3D& obj) {
  static constexpr std::array<double, 4> kFractions = {0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0};
  const Vec3 lo = obj.aabb_min;
  const Vec3 ext = obj.extent();
  std::array<Vec3, 64> out;
  std::size_t n = 0;
  for (double fz : kFractions) {
    for (double fy : kFractions) {
      for (double fx : kFractions) {
        out[n++] = {lo.x + fx * ext.x, lo.y + fy * ext.y, lo.z + fz * ext.z};
      }
    }
  }
  return out;
}

double visibility_ratio(const CameraView& view, const Object3D& obj) {
  int inside = 0;
  const auto samples = visibility_samples(obj);
  for (const auto& s : samples) {
    auto p = project_point(view, s);
    if (p && p->u >= 0.0 && p->u <= view.width && p->v >= 0.0 && p->v <= view.height) ++inside;
  }
  return static_cast<double>(inside) / static_cast<double>(samples.size());
}

double centroid_distance(const Object3D& a, const Object3D& b) {
  const Vec3 d = a.centroid - b.centroid;
  return std::sqrt(d.x * d.x + d.y * d.y + d.z * d.z);
}

double closest_point_distance(const Object3D& a, const Object3D& b) {
  auto gap = [](double a_min, double a_max, double b_min, double b_max) {
    return std::max(0.0, std::max(a_min - b_max, b_min - a_max));
  };
  const double gx = gap(a.aabb_min.x, a.aabb_max.x, b.aabb_min.x, b.aabb_max.x);
  const double gy = gap(a.aabb_min.y, a.aabb_max.y, b.aabb_min.y, b.aabb_max.y);
  const double gz = gap(a.aabb_min.z, a.aabb_max.z, b.aabb_min.z, b.aabb_max.z);
  return std::sqrt(gx * gx + gy * gy + gz * gz);
}

double max_dimension_cm(const Object3D& obj) {
  const Vec3 e = obj.extent();
  return 100.0 * std::max({e.x, e.y, e.z});
}

std::optional<SingleImageOffsets> single_image_offsets(const CameraView& view, const Object3D& a,
                                                       const Object3D& b) {
  auto pa = project_point(view, a.centroid);
  auto pb = project_point(view, b.centroid);
  if (!pa || !pb) return std::nullopt;
  return SingleImageOffsets{(pa->u - pb->u) / view.width, (pa->depth - pb->depth) / pb->depth};
}

std::optional<DirectionLabel> classify_single_image(const SingleImageOffsets& o,
                                                    const DirectionMargins& margins) {
  enum class H { kNone, kLeft, kRight } h = H::kNone;
  enum class D { kNone, kFront, kBack } d = D::kNone;
  if (o.du <= -margins.eps_x) h = H::kLeft;
  else if (o.du >= margins.eps_x) h = H::kRight;
  if (o.dz <= -margins.eps_z) d = D::kFront;
  else if (o.dz >= margins.eps_z) d = D::kBack;

  switch (h) {
    case H::kNone:
      if (d == D::kFront) return DirectionLabel::kFront;
      if (d == D::kBack) return DirectionLabel::kBack;
      return std::nullopt;
    case H::kLeft:
      if (d == D::kFront) return DirectionLabel::kLeftFront;
      if (d == D::kBack) return DirectionLabel::kLeftBack;
      return DirectionLabel::kLeft;
    case H::kRight:
      if (d == D::kFront) return DirectionLabel::kRightFront;
      if (d == D::kBack) return DirectionLabel::kRightBack;
      return DirectionLabel::kRight;
  }
  return std::nullopt;
}

std::optional<DirectionLabel> relative_direction_single(const CameraView& view, const Object3D& a,
                                                        const Object3D& b,
                                                        const DirectionMargins& margins) {
  auto offsets = single_image_offsets(view, a, b);
  if (!offsets) return std::nullopt;
  return classify_single_image(*offsets, margins);
}

DirectionComputation multiview_computation(const Object3D& positioning, const Object3D& orienting,
                                           const Object3D& querying) {
  DirectionComputation c;
  c.vec_a = {orienting.centroid.x - positioning.centroid.x,
             orienting.centroid.y - positioning.centroid.y};
  c.vec_b = {querying.centroid.x - positioning.centroid.x,
             querying.centroid.y - positioning.centroid.y};
  const double len_a = std::hypot(c.vec_a[0], c.vec_a[1]);
  const double len_b = std::hypot(c.vec_b[0], c.vec_b[1]);
  if (len_a <= 1e-6 || len_b <= 1e-6) {
    throw DegenerateGeometry("ground-plane vector shorter than 1e-6 (positioning '" +
                             positioning.id + "')");
  }
  const double dot = c.vec_a[0] * c.vec_b[0] + c.vec_a[1] * c.vec_b[1];
  const double cross = c.vec_a[0] * c.vec_b[1] - c.vec_a[1] * c.vec_b[0];
  double phi = std::atan2(cross, dot) * kRadToDeg;
  if (phi <= -180.0) phi = 180.0;
  c.signed_phi_deg = phi;
  c.theta_deg = std::abs(phi);

  // Observer faces +y along vec_a; +x is to the observer's right.
  const double fwd_x = c.vec_a[0] / len_a;
  const double fwd_y = c.vec_a[1] / len_a;
  const double right_x = fwd_y;
  const double right_y = -fwd_x;
  c.x_rot = c.vec_b[0] * right_x + c.vec_b[1] * right_y;
  c.y_rot = c.vec_b[0] * fwd_x + c.vec_b[1] * fwd_y;
  return c;
}

double axis_distance_deg(const DirectionComputation& c) {
  double best = 360.0;
  for (int k = -2; k <= 2; ++k) best = std::min(best, std::abs(c.signed_phi_deg - 90.0 * k));
  return best;
}

std::optional<MultiviewDirection> relative_direction_multiview(const Object3D& positioning,
                                                               const Object3D& orienting,
                                                               const Object3D& querying,
                                                               double axis_margin_deg) {
  const DirectionComputation c = multiview_computation(positioning, orienting, querying);
  if (c.x_rot == 0.0 || c.y_rot == 0.0 || axis_distance_deg(c) < axis_margin_deg) {
    return std::nullopt;
  }
  DirectionLabel label;
  if (c.y_rot > 0.0) {
    label = c.x_rot > 0.0 ? DirectionLabel::kFrontRight : DirectionLabel::kFrontLeft;
  } else {
    label = c.x_rot > 0.0 ? DirectionLabel::kBackRight : DirectionLabel::kBackLeft;
  }
  return MultiviewDirection{label, c};
}

}  // namespace spatialkit
