#include "spherefield/scene.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>

#include "spherefield/error.hpp"
#include "spherefield/parallel.hpp"
#include "spherefield/rng.hpp"

namespace spherefield {

namespace {

constexpr double kHitEpsilon = 1e-9;
constexpr double kGoldenRatio = 1.6180339887498949;
constexpr double kSilverRatio = 2.4142135623730951;

}  // namespace

namespace {

// Smoothly interpolated random lattice values in [-1, 1].
double value_noise(const Vec3& p, unsigned seed, unsigned layer) {
  const double fx = std::floor(p.x()), fy = std::floor(p.y()), fz = std::floor(p.z());
  const Vec3 f(p.x() - fx, p.y() - fy, p.z() - fz);
  const Vec3 s = f.array() * f.array() * (3.0 - 2.0 * f.array());
  const auto ix = static_cast<std::int64_t>(fx), iy = static_cast<std::int64_t>(fy), iz = static_cast<std::int64_t>(fz);
  const std::uint64_t key = splitmix64((static_cast<std::uint64_t>(seed) << 8) ^ layer);
  auto lattice = [&](std::int64_t x, std::int64_t y, std::int64_t z) {
    std::uint64_t h = splitmix64(key ^ static_cast<std::uint64_t>(x));
    h = splitmix64(h ^ static_cast<std::uint64_t>(y));
    h = splitmix64(h ^ static_cast<std::uint64_t>(z));
    return static_cast<double>(h >> 11) * 0x1.0p-52 - 1.0;
  };
  double acc = 0.0;
  for (int corner = 0; corner < 8; ++corner) {
    const int dx = corner & 1, dy = (corner >> 1) & 1, dz = (corner >> 2) & 1;
    const double w = (dx ? s.x() : 1.0 - s.x()) * (dy ? s.y() : 1.0 - s.y()) * (dz ? s.z() : 1.0 - s.z());
    acc += w * lattice(ix + dx, iy + dy, iz + dz);
  }
  return acc;
}

}  // namespace

Vec3 Texture::eval(const Vec3& p) const {
  if (kind == Kind::Checker) {
    // Quarter-cell offset keeps axis-aligned faces at integer coordinates
    // away from cell boundaries.
    const long parity = static_cast<long>(std::floor(frequency * p.x() + 0.25)) +
                        static_cast<long>(std::floor(frequency * p.y() + 0.25)) +
                        static_cast<long>(std::floor(frequency * p.z() + 0.25));
    return (parity & 1) ? color_b : color_a;
  }
  if (kind == Kind::Noise) {
    Vec3 out;
    for (int ch = 0; ch < 3; ++ch) {
      double acc = 0.0;
      double amp = 1.0;
      double norm = 0.0;
      for (int octave = 0; octave < 3; ++octave) {
        acc += amp * value_noise(frequency * (1 << octave) * p, seed, 3 * octave + ch);
        norm += amp;
        amp *= 0.5;
      }
      out[ch] = std::clamp(color_a[ch] + color_b[ch] * 1.7 * acc / norm, 0.0, 1.0);
    }
    return out;
  }
  // Three incommensurate plane waves per channel; quasi-periodic, so sweeps
  // do not lock onto repeats.
  CounterRng rng(seed, 0x7e57u);
  static constexpr double scales[3] = {1.0, kGoldenRatio, kSilverRatio};
  Vec3 out;
  for (int ch = 0; ch < 3; ++ch) {
    double acc = 0.0;
    for (int j = 0; j < 3; ++j) {
      Vec3 dir(rng.normal(), rng.normal(), rng.normal());
      dir.normalize();
      const double phase = 2.0 * kPi * rng.uniform();
      acc += std::sin(frequency * scales[j] * dir.dot(p) + phase);
    }
    out[ch] = std::clamp(color_a[ch] + color_b[ch] * acc / 3.0, 0.0, 1.0);
  }
  return out;
}

std::optional<double> intersect(const Sphere& s, const Ray& ray) {
  const Vec3 oc = ray.origin - s.center;
  const double b = ray.direction.dot(oc);
  const double c = oc.squaredNorm() - s.radius * s.radius;
  const double disc = b * b - c;
  if (disc < 0.0) return std::nullopt;
  const double root = std::sqrt(disc);
  // Stable pair: q = -b -/+ root, t0 * t1 = c.
  const double q = b > 0.0 ? -b - root : -b + root;
  double t0 = q;
  double t1 = q != 0.0 ? c / q : -b;
  if (t0 > t1) std::swap(t0, t1);
  if (t0 > kHitEpsilon) return t0;
  if (t1 > kHitEpsilon) return t1;
  return std::nullopt;
}

std::optional<double> intersect(const Box& box, const Ray& ray) {
  double t_near = -std::numeric_limits<double>::infinity();
  double t_far = std::numeric_limits<double>::infinity();
  for (int a = 0; a < 3; ++a) {
    const double o = ray.origin[a];
    const double d = ray.direction[a];
    if (d == 0.0) {
      if (o < box.min[a] || o > box.max[a]) return std::nullopt;
      continue;
    }
    double t0 = (box.min[a] - o) / d;
    double t1 = (box.max[a] - o) / d;
    if (t0 > t1) std::swap(t0, t1);
    t_near = std::max(t_near, t0);
    t_far = std::min(t_far, t1);
  }
  if (t_near > t_far) return std::nullopt;
  if (t_near > kHitEpsilon) return t_near;
  if (t_far > kHitEpsilon) return t_far;
  return std::nullopt;
}

std::optional<Hit> try_trace(const Scene& scene, const Ray& ray) {
  std::optional<Hit> best;
  for (std::size_t i = 0; i < scene.primitives.size(); ++i) {
    const Primitive& prim = scene.primitives[i];
    const std::optional<double> t = std::visit([&](const auto& shape) { return intersect(shape, ray); }, prim.shape);
    if (t && (!best || *t < best->t)) best = Hit{*t, Vec3::Zero(), static_cast<int>(i)};
  }
  if (best) best->color = scene.primitives[best->primitive].texture.eval(ray.at(best->t));
  return best;
}

Hit trace(const Scene& scene, const Ray& ray) {
  std::optional<Hit> hit = try_trace(scene, ray);
  if (!hit) throw Error(ErrorCode::NoHit, "ray escaped scene '" + scene.name + "'");
  return *hit;
}

GroundTruthView render_gt(const Scene& scene, const CameraPose& pose, int height, int width, int threads) {
  GroundTruthView view{EquirectImage(height, width, 3), EquirectImage(height, width, 1)};
  parallel_for(static_cast<std::size_t>(height) * width, threads, [&](std::size_t pixel) {
    const int row = static_cast<int>(pixel / width);
    const int col = static_cast<int>(pixel % width);
    const Hit hit = trace(scene, cast_ray({col + 0.5, row + 0.5}, pose, height, width));
    for (int ch = 0; ch < 3; ++ch) view.color.at(row, col, ch) = static_cast<float>(hit.color[ch]);
    view.depth.at(row, col) = static_cast<float>(hit.t);
  });
  return view;
}

EquirectImage single_view_mask(const Scene& scene, const CameraPose& ref, const CameraPose& other, int height,
                               int width, int threads) {
  EquirectImage mask(height, width, 1);
  parallel_for(static_cast<std::size_t>(height) * width, threads, [&](std::size_t pixel) {
    const int row = static_cast<int>(pixel / width);
    const int col = static_cast<int>(pixel % width);
    const Ray ray = cast_ray({col + 0.5, row + 0.5}, ref, height, width);
    const Vec3 point = ray.at(trace(scene, ray).t);
    const Vec3 to_point = point - other.center;
    const double dist = to_point.norm();
    const Ray back{other.center, to_point / dist};
    const Hit seen = trace(scene, back);
    mask.at(row, col) = seen.t < dist - 1e-6 * std::max(1.0, dist) ? 1.0f : 0.0f;
  });
  return mask;
}

std::vector<CameraPose> line_poses(const Vec3& center, double baseline, int count) {
  if (count < 2) throw Error(ErrorCode::InvalidParam, "a line layout needs at least two views");
  std::vector<CameraPose> poses;
  for (int i = 0; i < count; ++i) {
    const double s = -0.5 + static_cast<double>(i) / (count - 1);
    poses.push_back(CameraPose::at(center + s * baseline * Vec3::UnitX()));
  }
  return poses;
}

std::vector<CameraPose> square_poses(const Vec3& center, double diagonal) {
  const double h = 0.5 * diagonal;
  return {CameraPose::at(center + Vec3(h, 0, 0)), CameraPose::at(center + Vec3(0, 0, h)),
          CameraPose::at(center + Vec3(-h, 0, 0)), CameraPose::at(center + Vec3(0, 0, -h))};
}

namespace {

Texture smooth(double frequency, Vec3 base, Vec3 amplitude, unsigned seed) {
  Texture t;
  t.kind = Texture::Kind::Smooth;
  t.frequency = frequency;
  t.color_a = base;
  t.color_b = amplitude;
  t.seed = seed;
  return t;
}

Primitive room(const Vec3& lo, const Vec3& hi, const Texture& tex) { return {Box{lo, hi}, tex}; }

}  // namespace

Scene make_textured_sphere_scene() {
  Scene s;
  s.name = "textured-sphere";
  s.primitives.push_back({Sphere{Vec3::Zero(), 3.0}, smooth(5.0, {0.5, 0.5, 0.5}, {0.45, 0.4, 0.45}, 11)});
  s.primitives.push_back({Sphere{Vec3(1.3, -0.4, 1.1), 0.5}, smooth(9.0, {0.55, 0.45, 0.35}, {0.4, 0.4, 0.3}, 12)});
  s.poses = line_poses(Vec3::Zero(), 0.5, 2);
  return s;
}

Scene make_sphere_room() {
  Scene s;
  s.name = "sphere-room";
  s.primitives.push_back(room({-3.5, -1.5, -3.0}, {3.5, 1.6, 3.0}, smooth(3.0, {0.55, 0.5, 0.45}, {0.35, 0.3, 0.3}, 21)));
  s.primitives.push_back({Sphere{Vec3(1.0, -0.6, 1.8), 0.6}, smooth(7.0, {0.6, 0.35, 0.3}, {0.3, 0.25, 0.25}, 22)});
  s.primitives.push_back({Sphere{Vec3(-1.5, 0.2, -1.6), 0.7}, smooth(6.0, {0.3, 0.45, 0.6}, {0.25, 0.3, 0.3}, 23)});
  s.primitives.push_back({Box{{0.8, -1.5, -2.2}, {1.6, -0.7, -1.4}}, smooth(8.0, {0.45, 0.55, 0.35}, {0.3, 0.3, 0.25}, 24)});
  s.poses = line_poses(Vec3::Zero(), 1.0, 3);
  return s;
}

OcclusionSetup make_occlusion_scene() {
  OcclusionSetup o;
  o.scene_without_occluder.name = "occlusion-empty";
  o.scene_without_occluder.primitives.push_back(
      room({-3.0, -1.5, -2.0}, {3.0, 1.5, 3.0}, smooth(3.5, {0.5, 0.5, 0.5}, {0.4, 0.35, 0.35}, 31)));
  o.scene = o.scene_without_occluder;
  o.scene.name = "occlusion";
  o.scene.primitives.push_back({Box{{0.6, -0.8, 0.9}, {1.4, 0.8, 0.96}}, smooth(9.0, {0.35, 0.3, 0.55}, {0.3, 0.25, 0.35}, 32)});
  const std::vector<CameraPose> poses = line_poses(Vec3::Zero(), 1.0, 2);
  o.reference = poses[0];
  o.other = poses[1];
  o.scene.poses = poses;
  o.scene_without_occluder.poses = poses;
  return o;
}

namespace {

Vec3 vec3_from(const nlohmann::json& j) {
  if (!j.is_array() || j.size() != 3) throw Error(ErrorCode::Config, "expected a 3-element array");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

nlohmann::json vec3_to(const Vec3& v) { return nlohmann::json::array({v.x(), v.y(), v.z()}); }

void reject_unknown(const nlohmann::json& obj, std::initializer_list<const char*> allowed, const char* what) {
  for (const auto& [key, _] : obj.items()) {
    if (std::find_if(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; }) == allowed.end()) {
      throw Error(ErrorCode::Config, std::string("unknown key '") + key + "' in " + what);
    }
  }
}

Texture texture_from(const nlohmann::json& j) {
  reject_unknown(j, {"kind", "frequency", "colors", "base", "amplitude", "seed"}, "texture");
  Texture t;
  const std::string kind = j.value("kind", "smooth");
  t.frequency = j.value("frequency", 4.0);
  if (kind == "checker") {
    t.kind = Texture::Kind::Checker;
    if (j.contains("colors")) {
      t.color_a = vec3_from(j.at("colors").at(0));
      t.color_b = vec3_from(j.at("colors").at(1));
    }
  } else if (kind == "smooth" || kind == "noise") {
    t.kind = kind == "smooth" ? Texture::Kind::Smooth : Texture::Kind::Noise;
    if (j.contains("base")) t.color_a = vec3_from(j.at("base"));
    if (j.contains("amplitude")) t.color_b = vec3_from(j.at("amplitude"));
    t.seed = j.value("seed", 0u);
  } else {
    throw Error(ErrorCode::Config, "unknown texture kind '" + kind + "'");
  }
  return t;
}

nlohmann::json texture_to(const Texture& t) {
  nlohmann::json j;
  j["frequency"] = t.frequency;
  if (t.kind == Texture::Kind::Checker) {
    j["kind"] = "checker";
    j["colors"] = nlohmann::json::array({vec3_to(t.color_a), vec3_to(t.color_b)});
  } else {
    j["kind"] = t.kind == Texture::Kind::Smooth ? "smooth" : "noise";
    j["base"] = vec3_to(t.color_a);
    j["amplitude"] = vec3_to(t.color_b);
    j["seed"] = t.seed;
  }
  return j;
}

}  // namespace

Scene scene_from_json(const nlohmann::json& doc) {
  try {
    reject_unknown(doc, {"name", "primitives", "poses"}, "scene");
    Scene s;
    s.name = doc.value("name", "custom");
    for (const auto& p : doc.at("primitives")) {
      reject_unknown(p, {"type", "center", "radius", "min", "max", "texture"}, "primitive");
      Primitive prim;
      const std::string type = p.at("type");
      if (type == "sphere") {
        const double r = p.at("radius");
        if (!(r > 0.0)) throw Error(ErrorCode::Config, "sphere radius must be positive");
        prim.shape = Sphere{vec3_from(p.at("center")), r};
      } else if (type == "box") {
        Box b{vec3_from(p.at("min")), vec3_from(p.at("max"))};
        if ((b.max - b.min).minCoeff() <= 0.0) throw Error(ErrorCode::Config, "box max must exceed min");
        prim.shape = b;
      } else {
        throw Error(ErrorCode::Config, "unknown primitive type '" + type + "'");
      }
      if (p.contains("texture")) prim.texture = texture_from(p.at("texture"));
      s.primitives.push_back(prim);
    }
    if (doc.contains("poses")) {
      for (const auto& j : doc.at("poses")) {
        reject_unknown(j, {"center", "rotation"}, "pose");
        CameraPose pose = CameraPose::at(vec3_from(j.at("center")));
        if (j.contains("rotation")) {
          for (int r = 0; r < 3; ++r) pose.rotation.row(r) = vec3_from(j.at("rotation").at(r)).transpose();
        }
        pose.validate();
        s.poses.push_back(pose);
      }
    }
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::Config, std::string("scene JSON: ") + e.what());
  }
}

nlohmann::json scene_to_json(const Scene& scene) {
  nlohmann::json doc;
  doc["name"] = scene.name;
  doc["primitives"] = nlohmann::json::array();
  for (const Primitive& p : scene.primitives) {
    nlohmann::json j;
    if (const auto* s = std::get_if<Sphere>(&p.shape)) {
      j["type"] = "sphere";
      j["center"] = vec3_to(s->center);
      j["radius"] = s->radius;
    } else {
      const auto& b = std::get<Box>(p.shape);
      j["type"] = "box";
      j["min"] = vec3_to(b.min);
      j["max"] = vec3_to(b.max);
    }
    j["texture"] = texture_to(p.texture);
    doc["primitives"].push_back(j);
  }
  doc["poses"] = nlohmann::json::array();
  for (const CameraPose& pose : scene.poses) {
    nlohmann::json rot = nlohmann::json::array();
    for (int r = 0; r < 3; ++r) rot.push_back(vec3_to(pose.rotation.row(r).transpose()));
    doc["poses"].push_back({{"center", vec3_to(pose.center)}, {"rotation", rot}});
  }
  return doc;
}

Scene load_scene(const std::string& name_or_path) {
  if (name_or_path == "textured-sphere") return make_textured_sphere_scene();
  if (name_or_path == "sphere-room") return make_sphere_room();
  if (name_or_path == "occlusion") return make_occlusion_scene().scene;
  std::ifstream in(name_or_path);
  if (!in) throw Error(ErrorCode::Io, "cannot open scene '" + name_or_path + "'");
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::Config, std::string("scene JSON: ") + e.what());
  }
  return scene_from_json(doc);
}

EquirectImage noisy_prior(const EquirectImage& gt_depth, double sigma, std::uint64_t seed, double relative) {
  if (!(sigma >= 0.0) || !(relative >= 0.0)) throw Error(ErrorCode::InvalidParam, "noise levels must be >= 0");
  EquirectImage out = make_image_like(gt_depth);
  auto src = gt_depth.data();
  auto dst = out.data();
  for (std::size_t i = 0; i < src.size(); ++i) {
    CounterRng rng(seed, i);
    const double rel = rng.normal();
    const double abs = rng.normal();
    const double value = src[i] * std::exp(relative * rel) + sigma * abs;
    dst[i] = static_cast<float>(std::clamp(value, 0.1, 10.0));
  }
  return out;
}

}  // namespace spherefield
