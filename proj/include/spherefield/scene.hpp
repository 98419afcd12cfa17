#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"
#include "spherefield/geometry.hpp"
#include "spherefield/image.hpp"

namespace spherefield {

// Procedural Lambertian texture evaluated on the 3D hit point.
struct Texture {
  // Checker: alternating cells. Smooth: plane-wave sum. Noise: three
  // octaves of lattice value noise (aperiodic, detail at every scale).
  enum class Kind { Checker, Smooth, Noise };
  Kind kind = Kind::Smooth;
  double frequency = 4.0;  // cells per meter (checker, noise) or rad/m (smooth)
  Vec3 color_a{0.8, 0.8, 0.8};  // checker color / base
  Vec3 color_b{0.2, 0.2, 0.2};  // checker color / amplitude per channel
  unsigned seed = 0;

  Vec3 eval(const Vec3& p) const;
};

struct Sphere {
  Vec3 center = Vec3::Zero();
  double radius = 1.0;
};

struct Box {
  Vec3 min = -Vec3::Ones();
  Vec3 max = Vec3::Ones();
};

struct Primitive {
  std::variant<Sphere, Box> shape;
  Texture texture;
};

struct Scene {
  std::string name;
  std::vector<Primitive> primitives;
  std::vector<CameraPose> poses;  // suggested viewpoints, may be empty
};

struct Hit {
  double t = 0.0;
  Vec3 color = Vec3::Zero();
  int primitive = -1;
};

// Nearest intersection with t > 1e-9, if any.
std::optional<double> intersect(const Sphere& s, const Ray& ray);
std::optional<double> intersect(const Box& b, const Ray& ray);
std::optional<Hit> try_trace(const Scene& scene, const Ray& ray);
// Throws NoHit when the ray escapes (the scene is not closed).
Hit trace(const Scene& scene, const Ray& ray);

struct GroundTruthView {
  EquirectImage color;  // linear RGB
  EquirectImage depth;  // spherical depth, meters
};

// Traces every pixel center along cast_ray.
GroundTruthView render_gt(const Scene& scene, const CameraPose& pose, int height, int width, int threads = 0);

// 1 where the surface seen by `ref` is hidden from `other`, else 0.
EquirectImage single_view_mask(const Scene& scene, const CameraPose& ref, const CameraPose& other, int height,
                               int width, int threads = 0);

// Views along +x centered on `center`: count=2 gives the two ends of the
// baseline, count=3 adds the midpoint.
std::vector<CameraPose> line_poses(const Vec3& center, double baseline, int count);
// Four corners of a horizontal (x-z) square with the given diagonal.
std::vector<CameraPose> square_poses(const Vec3& center, double diagonal);

// Camera inside a textured sphere (radius 3) with one inner ball.
Scene make_textured_sphere_scene();
// Box room with two spheres and a box on the walls' side of the room.
Scene make_sphere_room();

struct OcclusionSetup {
  Scene scene;
  Scene scene_without_occluder;
  CameraPose reference;
  CameraPose other;
};
// Room plus a thin slab that hides a far-wall patch from `other` only.
// Cameras are 1.0 m apart along x.
OcclusionSetup make_occlusion_scene();

// Builtin by name ("textured-sphere", "sphere-room", "occlusion") or a
// scene JSON document on disk.
Scene load_scene(const std::string& name_or_path);
Scene scene_from_json(const nlohmann::json& doc);
nlohmann::json scene_to_json(const Scene& scene);

// gt * exp(eta_rel) + eta_abs with eta_rel ~ N(0, relative), eta_abs ~
// N(0, sigma), clamped to [0.1, 10]. Deterministic per seed.
EquirectImage noisy_prior(const EquirectImage& gt_depth, double sigma, std::uint64_t seed, double relative = 0.0);

}  // namespace spherefield
