#include "spatialkit/scene.h"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <set>

#include "spatialkit/errors.h"

namespace spatialkit {

using nlohmann::json;

Vec3 CameraView::to_camera(const Vec3& p) const {
  const auto& r = rotation;
  return {r[0] * p.x + r[1] * p.y + r[2] * p.z + translation.x,
          r[3] * p.x + r[4] * p.y + r[5] * p.z + translation.y,
          r[6] * p.x + r[7] * p.y + r[8] * p.z + translation.z};
}

const Object3D* Scene::find_object(std::string_view object_id) const {
  for (const auto& o : objects) {
    if (o.id == object_id) return &o;
  }
  return nullptr;
}

const CameraView* Scene::find_view(std::string_view view_id) const {
  for (const auto& v : views) {
    if (v.id == view_id) return &v;
  }
  return nullptr;
}

std::optional<FloorExtent> Scene::effective_floor_extent() const {
  if (floor_extent) return floor_extent;
  if (objects.empty()) return std::nullopt;
  FloorExtent e{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(),
                -std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
  for (const auto& o : objects) {
    e.min_x = std::min(e.min_x, o.aabb_min.x);
    e.min_y = std::min(e.min_y, o.aabb_min.y);
    e.max_x = std::max(e.max_x, o.aabb_max.x);
    e.max_y = std::max(e.max_y, o.aabb_max.y);
  }
  return e;
}

namespace {

bool finite(const Vec3& v) { return std::isfinite(v.x) && std::isfinite(v.y) && std::isfinite(v.z); }

bool is_lowercase(const std::string& s) {
  return std::none_of(s.begin(), s.end(), [](unsigned char c) { return std::isupper(c); });
}

bool orthonormal(const std::array<double, 9>& r) {
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      // (R^T R)_ij = sum_k R_ki R_kj
      double dot = 0.0;
      for (int k = 0; k < 3; ++k) dot += r[3 * k + i] * r[3 * k + j];
      if (std::abs(dot - (i == j ? 1.0 : 0.0)) > kRotationTolerance) return false;
    }
  }
  return true;
}

void add(std::vector<Violation>& out, const std::string& id, std::string_view rule,
         std::string detail) {
  out.push_back({id, std::string(rule), std::move(detail)});
}

}  // namespace

std::vector<Violation> validate_scene(const Scene& scene) {
  std::vector<Violation> out;

  std::set<std::string> seen_objects;
  for (const auto& o : scene.objects) {
    if (!seen_objects.insert(o.id).second) {
      add(out, o.id, rules::kDuplicateObject, "object id appears more than once");
    }
    if (!finite(o.centroid) || !finite(o.aabb_min) || !finite(o.aabb_max)) {
      add(out, o.id, rules::kNonFinite, "object coordinates must be finite");
      continue;
    }
    if (o.category.empty()) {
      add(out, o.id, rules::kCategoryEmpty, "category is empty");
    } else if (!is_lowercase(o.category)) {
      add(out, o.id, rules::kCategoryCase, "category '" + o.category + "' is not lowercase");
    }
    const Vec3& lo = o.aabb_min;
    const Vec3& hi = o.aabb_max;
    if (lo.x > hi.x || lo.y > hi.y || lo.z > hi.z) {
      add(out, o.id, rules::kAabbOrder, "aabb_min exceeds aabb_max");
    } else {
      const Vec3& c = o.centroid;
      if (c.x < lo.x || c.x > hi.x || c.y < lo.y || c.y > hi.y || c.z < lo.z || c.z > hi.z) {
        add(out, o.id, rules::kCentroidInside, "centroid lies outside the box");
      }
    }
  }

  std::set<std::string> seen_views;
  for (std::size_t i = 0; i < scene.views.size(); ++i) {
    const auto& v = scene.views[i];
    if (!seen_views.insert(v.id).second) {
      add(out, v.id, rules::kDuplicateView, "view id appears more than once");
    }
    const bool numbers_finite =
        std::all_of(v.rotation.begin(), v.rotation.end(), [](double d) { return std::isfinite(d); }) &&
        finite(v.translation) && std::isfinite(v.fx) && std::isfinite(v.fy) && std::isfinite(v.cx) &&
        std::isfinite(v.cy) && std::isfinite(v.width) && std::isfinite(v.height);
    if (!numbers_finite) {
      add(out, v.id, rules::kNonFinite, "camera parameters must be finite");
    } else {
      if (!orthonormal(v.rotation)) add(out, v.id, rules::kRotation, "rotation is not orthonormal");
      if (!(v.fx > 0.0 && v.fy > 0.0)) add(out, v.id, rules::kFocal, "fx and fy must be positive");
      if (!(v.width > 0.0 && v.height > 0.0)) {
        add(out, v.id, rules::kImageSize, "width and height must be positive");
      }
    }
    if (v.frame_index < 0) add(out, v.id, rules::kFrameIndex, "frame_index is negative");
    if (i > 0 && v.frame_index < scene.views[i - 1].frame_index) {
      add(out, v.id, rules::kViewOrder,
          "frame_index " + std::to_string(v.frame_index) + " follows " +
              std::to_string(scene.views[i - 1].frame_index));
    }
  }

  if (scene.floor_extent) {
    const auto& f = *scene.floor_extent;
    if (!(std::isfinite(f.min_x) && std::isfinite(f.min_y) && std::isfinite(f.max_x) &&
          std::isfinite(f.max_y))) {
      add(out, scene.id, rules::kNonFinite, "floor_extent must be finite");
    } else if (f.min_x > f.max_x || f.min_y > f.max_y) {
      add(out, scene.id, rules::kFloorOrder, "floor_extent min exceeds max");
    }
  }
  return out;
}

namespace {

class Reader {
 public:
  const json& field(const json& obj, const std::string& key, const std::string& path) {
    auto it = obj.find(key);
    if (it == obj.end()) throw SchemaError(path + "." + key + ": missing field");
    return *it;
  }

  std::string string(const json& obj, const std::string& key, const std::string& path) {
    const json& v = field(obj, key, path);
    if (!v.is_string()) throw SchemaError(path + "." + key + ": expected string");
    return v.get<std::string>();
  }

  double number(const json& v, const std::string& path) {
    if (!v.is_number()) throw SchemaError(path + ": expected number");
    return v.get<double>();
  }

  double number(const json& obj, const std::string& key, const std::string& path) {
    return number(field(obj, key, path), path + "." + key);
  }

  template <std::size_t N>
  std::array<double, N> numbers(const json& obj, const std::string& key, const std::string& path) {
    const json& v = field(obj, key, path);
    const std::string p = path + "." + key;
    if (!v.is_array() || v.size() != N) {
      throw SchemaError(p + ": expected array of " + std::to_string(N) + " numbers");
    }
    std::array<double, N> out{};
    for (std::size_t i = 0; i < N; ++i) out[i] = number(v[i], p + "[" + std::to_string(i) + "]");
    return out;
  }

  Vec3 vec3(const json& obj, const std::string& key, const std::string& path) {
    auto a = numbers<3>(obj, key, path);
    return {a[0], a[1], a[2]};
  }
};

json vec_json(const Vec3& v) { return json::array({v.x, v.y, v.z}); }

}  // namespace

Scene scene_from_json_unchecked(const json& doc) {
  Reader r;
  if (!doc.is_object()) throw SchemaError("$: expected object");
  Scene scene;
  scene.id = r.string(doc, "scene_id", "$");

  const json& objects = r.field(doc, "objects", "$");
  if (!objects.is_array()) throw SchemaError("$.objects: expected array");
  for (std::size_t i = 0; i < objects.size(); ++i) {
    const std::string path = "$.objects[" + std::to_string(i) + "]";
    const json& o = objects[i];
    if (!o.is_object()) throw SchemaError(path + ": expected object");
    Object3D obj;
    obj.id = r.string(o, "id", path);
    obj.category = r.string(o, "category", path);
    obj.centroid = r.vec3(o, "centroid", path);
    obj.aabb_min = r.vec3(o, "aabb_min", path);
    obj.aabb_max = r.vec3(o, "aabb_max", path);
    scene.objects.push_back(std::move(obj));
  }

  const json& views = r.field(doc, "views", "$");
  if (!views.is_array()) throw SchemaError("$.views: expected array");
  for (std::size_t i = 0; i < views.size(); ++i) {
    const std::string path = "$.views[" + std::to_string(i) + "]";
    const json& v = views[i];
    if (!v.is_object()) throw SchemaError(path + ": expected object");
    CameraView view;
    view.id = r.string(v, "id", path);
    const json& frame = r.field(v, "frame_index", path);
    if (!frame.is_number_integer()) throw SchemaError(path + ".frame_index: expected integer");
    view.frame_index = frame.get<std::int64_t>();
    view.rotation = r.numbers<9>(v, "rotation", path);
    view.translation = r.vec3(v, "translation", path);
    view.fx = r.number(v, "fx", path);
    view.fy = r.number(v, "fy", path);
    view.cx = r.number(v, "cx", path);
    view.cy = r.number(v, "cy", path);
    view.width = r.number(v, "width", path);
    view.height = r.number(v, "height", path);
    scene.views.push_back(std::move(view));
  }

  if (auto it = doc.find("floor_extent"); it != doc.end() && !it->is_null()) {
    if (!it->is_object()) throw SchemaError("$.floor_extent: expected object");
    auto lo = r.numbers<2>(*it, "min_xy", "$.floor_extent");
    auto hi = r.numbers<2>(*it, "max_xy", "$.floor_extent");
    scene.floor_extent = FloorExtent{lo[0], lo[1], hi[0], hi[1]};
  }
  return scene;
}

Scene scene_from_json(const json& doc) {
  Scene scene = scene_from_json_unchecked(doc);
  auto violations = validate_scene(scene);
  if (!violations.empty()) {
    const auto& v = violations.front();
    throw InvariantError(v.entity_id + ": " + v.rule + " (" + v.detail + ")");
  }
  return scene;
}

Scene parse_scene(std::string_view document) {
  json doc;
  try {
    doc = json::parse(document.begin(), document.end());
  } catch (const json::parse_error& e) {
    throw SchemaError(std::string("$: malformed JSON: ") + e.what());
  }
  return scene_from_json(doc);
}

json scene_to_json(const Scene& scene) {
  json doc;
  doc["scene_id"] = scene.id;
  doc["objects"] = json::array();
  for (const auto& o : scene.objects) {
    doc["objects"].push_back({{"id", o.id},
                              {"category", o.category},
                              {"centroid", vec_json(o.centroid)},
                              {"aabb_min", vec_json(o.aabb_min)},
                              {"aabb_max", vec_json(o.aabb_max)}});
  }
  doc["views"] = json::array();
  for (const auto& v : scene.views) {
    doc["views"].push_back({{"id", v.id},
                            {"frame_index", v.frame_index},
                            {"rotation", v.rotation},
                            {"translation", vec_json(v.translation)},
                            {"fx", v.fx},
                            {"fy", v.fy},
                            {"cx", v.cx},
                            {"cy", v.cy},
                            {"width", v.width},
                            {"height", v.height}});
  }
  if (scene.floor_extent) {
    const auto& f = *scene.floor_extent;
    doc["floor_extent"] = {{"min_xy", {f.min_x, f.min_y}}, {"max_xy", {f.max_x, f.max_y}}};
  }
  return doc;
}

std::string serialize_scene(const Scene& scene) { return scene_to_json(scene).dump(); }

}  // namespace spatialkit
