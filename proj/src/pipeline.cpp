#include "spherefield/pipeline.hpp"

#include <cstdio>
#include <fstream>
#include <iterator>

#include "spherefield/error.hpp"
#include "spherefield/image_io.hpp"
#include "spherefield/metrics.hpp"
#include "spherefield/rng.hpp"

namespace spherefield {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string file_hash(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot read back " + path.string());
  const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return fnv1a_hex(bytes);
}

// Collects written files and their hashes for the manifest.
class OutputDir {
 public:
  explicit OutputDir(const RunConfig& cfg) : root_(cfg.get_string("out")) {
    std::error_code ec;
    fs::create_directories(root_, ec);
    if (ec) throw Error(ErrorCode::Io, "cannot create output directory " + root_.string() + ": " + ec.message());
  }

  void png(const std::string& name, const EquirectImage& img) {
    check_finite(name, img);
    write_png(root_ / name, img);
    record(name);
  }
  void pfm(const std::string& name, const EquirectImage& img) {
    check_finite(name, img);
    write_pfm(root_ / name, img);
    record(name);
  }
  void text(const std::string& name, const std::string& body) {
    write_text_atomic(root_ / name, body);
    record(name);
  }

  json manifest(const std::string& command, const RunConfig& cfg, json extra) const {
    json m = std::move(extra);
    m["command"] = command;
    m["config"] = cfg.reproducible_values();
    m["config_hash"] = cfg.hash();
    m["seed"] = cfg.get_int("seed");
    m["outputs"] = outputs_;
    write_text_atomic(root_ / "manifest.json", m.dump(2) + "\n");
    return m;
  }

  const fs::path& root() const { return root_; }

 private:
  static void check_finite(const std::string& name, const EquirectImage& img) {
    if (!img.all_finite()) throw Error(ErrorCode::Numerical, "non-finite values in " + name);
  }
  void record(const std::string& name) { outputs_.push_back({{"file", name}, {"fnv1a", file_hash(root_ / name)}}); }

  fs::path root_;
  json outputs_ = json::array();
};

json pose_json(const CameraPose& p) {
  json r = json::array();
  for (int i = 0; i < 3; ++i) r.push_back({p.rotation(i, 0), p.rotation(i, 1), p.rotation(i, 2)});
  return {{"center", {p.center.x(), p.center.y(), p.center.z()}}, {"rotation", r}};
}

void progress(const std::string& line) { std::fprintf(stderr, "%s\n", line.c_str()); }

bool has_ext(const fs::path& p, const char* ext) { return p.extension() == ext; }

EquirectImage read_any(const fs::path& p) {
  if (has_ext(p, ".pfm")) return read_pfm(p);
  if (has_ext(p, ".png")) return read_png(p);
  throw Error(ErrorCode::Config, "unsupported image extension: " + p.string());
}

EquirectImage make_prior(const RunConfig& cfg, const EquirectImage& gt_depth, std::uint64_t stream) {
  const std::string path = cfg.get_string("prior_path");
  if (!path.empty()) {
    EquirectImage mu = read_pfm(path);
    if (mu.channels() != 1) throw Error(ErrorCode::Config, "prior map must be single channel");
    return mu;
  }
  const std::uint64_t seed = splitmix64(static_cast<std::uint64_t>(cfg.get_int("seed")) ^ (stream * 0x9e3779b97f4a7c15ULL));
  return noisy_prior(gt_depth, cfg.get_double("prior_noise"), seed, cfg.get_double("prior_relative_noise"));
}

MetricReport depth_report(const RunConfig& cfg, const EquirectImage& pred, const EquirectImage& gt) {
  MetricReport rep;
  rep.pole_mask = cfg.get_bool("pole_mask");
  if (rep.pole_mask) {
    const EquirectImage mask = pole_mask(gt.height(), gt.width());
    rep.depth = depth_metrics(pred, gt, &mask);
  } else {
    rep.depth = depth_metrics(pred, gt);
  }
  return rep;
}

}  // namespace

EquirectImage upsample_depth(const EquirectImage& depth, int height) {
  if (depth.height() == height) return depth;
  const int width = 2 * height;
  EquirectImage out(height, width, depth.channels());
  const double sx = static_cast<double>(depth.width()) / width;
  const double sy = static_cast<double>(depth.height()) / height;
  std::vector<double> px(depth.channels());
  for (int r = 0; r < height; ++r) {
    for (int c = 0; c < width; ++c) {
      sample_bilinear_wrapped(depth, (c + 0.5) * sx, (r + 0.5) * sy, px);
      for (int ch = 0; ch < depth.channels(); ++ch) out.at(r, c, ch) = static_cast<float>(px[ch]);
    }
  }
  return out;
}

DepthEstimate estimate_depth(const PosedImage& reference, std::span<const PosedImage> sources,
                             const DepthOptions& options, const GaussianPrior* prior) {
  if (sources.empty()) throw Error(ErrorCode::NoSources, "depth estimation needs at least one source view");
  const FeatureMap ref = extract_features(reference.image, options.descriptor, options.downsample);
  const int h = ref.data.height();
  const int w = ref.data.width();
  const GaussianPrior* used_prior = options.sweep.n_mono > 0 ? prior : nullptr;
  if (options.sweep.n_mono > 0 && used_prior == nullptr) {
    throw Error(ErrorCode::InvalidParam, "mono-guided candidates need a depth prior");
  }
  const CandidateGrid grid = build_candidate_grid(h, w, options.sweep, used_prior);

  std::vector<CostVolume> volumes;
  volumes.reserve(sources.size());
  const bool warped = options.warp_patches && options.descriptor != Descriptor::Rgb;
  const EquirectImage ref_small = warped ? downsample_box(reference.image, options.downsample) : EquirectImage();
  for (const PosedImage& src : sources) {
    if (warped) {
      volumes.push_back(build_warped_cost_volume(ref_small, downsample_box(src.image, options.downsample),
                                                 options.descriptor, reference.pose, src.pose, grid, options.threads));
    } else {
      const FeatureMap f = extract_features(src.image, options.descriptor, options.downsample);
      volumes.push_back(build_cost_volume(ref, f, reference.pose, src.pose, grid, options.threads));
    }
  }
  CostVolume fused = volumes.size() == 1 ? std::move(volumes.front()) : fuse_cost_volumes(volumes);
  fused = aggregate_cost(fused, options.cost_radius, options.threads);
  EquirectImage depth = decode_depth(fused, options.decode, options.threads);
  depth = median_filter_depth(depth, options.median_radius, options.threads);
  return {upsample_depth(depth, reference.image.height()), std::move(fused)};
}

DepthOptions depth_options_from(const RunConfig& cfg) {
  DepthOptions o;
  o.descriptor = parse_descriptor(cfg.get_string("descriptor"));
  o.sweep.near = cfg.get_double("near");
  o.sweep.far = cfg.get_double("far");
  o.sweep.spacing = cfg.get_string("spacing") == "inverse" ? SweepSpacing::InverseDepth : SweepSpacing::LinearDepth;
  const int n_uni = cfg.get_int("n_uni");
  const int n_mono = cfg.get_int("n_mono");
  const std::string mode = cfg.get_string("depth_mode");
  if (mode == "uniform") {
    o.sweep.n_uni = n_uni + n_mono;
    o.sweep.n_mono = 0;
  } else if (mode == "mono-only") {
    o.sweep.n_uni = 0;
    o.sweep.n_mono = n_uni + n_mono;
  } else {
    o.sweep.n_uni = n_uni;
    o.sweep.n_mono = n_mono;
  }
  o.downsample = cfg.get_int("downsample");
  o.cost_radius = cfg.get_int("cost_radius");
  o.median_radius = cfg.get_int("median_radius");
  o.warp_patches = cfg.get_bool("patch_warp");
  o.decode.mode = cfg.get_string("decode") == "wta" ? DecodeMode::WinnerTakeAll : DecodeMode::Soft;
  o.decode.tau = cfg.get_double("tau");
  if (!cfg.is_null("mono_fallback")) o.decode.mono_fallback_ratio = cfg.get_double("mono_fallback");
  o.threads = cfg.get_int("threads");
  return o;
}

RenderConfig render_config_from(const RunConfig& cfg) {
  RenderConfig r;
  r.n_coarse = cfg.get_int("n_coarse");
  r.n_fine = cfg.get_int("n_fine");
  r.near = cfg.get_double("near");
  r.far = cfg.get_double("far");
  r.kappa = cfg.get_double("kappa");
  r.n_logistic = cfg.get_int("n_logistic");
  r.jitter = cfg.get_bool("jitter");
  r.seed = static_cast<std::uint64_t>(cfg.get_int("seed"));
  r.threads = cfg.get_int("threads");
  return r;
}

std::vector<CameraPose> layout_poses(const RunConfig& cfg, const Scene& scene) {
  Vec3 center = Vec3::Zero();
  if (!scene.poses.empty()) {
    for (const CameraPose& p : scene.poses) center += p.center;
    center /= static_cast<double>(scene.poses.size());
  }
  const std::string layout = cfg.get_string("layout");
  if (layout == "scene") {
    if (scene.poses.empty()) throw Error(ErrorCode::Config, "layout 'scene' but the scene lists no poses");
    return scene.poses;
  }
  if (layout == "square") return square_poses(center, cfg.get_double("baseline"));
  return line_poses(center, cfg.get_double("baseline"), cfg.get_int("views"));
}

CameraPose render_target(const RunConfig& cfg, std::span<const CameraPose> poses) {
  const std::string target = cfg.get_string("target");
  if (target == "identity") {
    const int ref = cfg.get_int("ref_view");
    if (ref < 0 || ref >= static_cast<int>(poses.size())) throw Error(ErrorCode::Config, "ref_view out of range");
    return poses[ref];
  }
  Vec3 c = Vec3::Zero();
  if (target == "center") {
    for (const CameraPose& p : poses) c += p.center;
    c /= static_cast<double>(poses.size());
  } else {
    c = 0.5 * (poses.front().center + poses.back().center);
  }
  if (target == "above-middle") c.y() += 0.25;
  return CameraPose::at(c);
}

json cmd_synth(const RunConfig& cfg) {
  cfg.validate();
  const Scene scene = load_scene(cfg.get_string("scene"));
  const std::vector<CameraPose> poses = layout_poses(cfg, scene);
  const int h = cfg.get_int("height");
  const int w = cfg.get_int("width");
  OutputDir out(cfg);
  json views = json::array();
  for (std::size_t i = 0; i < poses.size(); ++i) {
    progress("synth: view " + std::to_string(i + 1) + "/" + std::to_string(poses.size()));
    const GroundTruthView gt = render_gt(scene, poses[i], h, w, cfg.get_int("threads"));
    const std::string stem = "view_" + std::to_string(i);
    out.png(stem + ".png", gt.color);
    out.pfm(stem + ".pfm", gt.color);
    out.pfm(stem + "_depth.pfm", gt.depth);
    json v = pose_json(poses[i]);
    v["index"] = i;
    views.push_back(v);
  }
  out.text("scene.json", scene_to_json(scene).dump(2) + "\n");
  return out.manifest("synth", cfg, {{"views", views}});
}

json cmd_depth(const RunConfig& cfg) {
  cfg.validate();
  const Scene scene = load_scene(cfg.get_string("scene"));
  const std::vector<CameraPose> poses = layout_poses(cfg, scene);
  const int h = cfg.get_int("height");
  const int w = cfg.get_int("width");
  const int ref_index = cfg.get_int("ref_view");
  if (ref_index < 0 || ref_index >= static_cast<int>(poses.size())) {
    throw Error(ErrorCode::Config, "ref_view out of range");
  }

  std::vector<PosedImage> sources;
  PosedImage reference;
  EquirectImage gt_depth;
  for (std::size_t i = 0; i < poses.size(); ++i) {
    progress("depth: rendering view " + std::to_string(i + 1) + "/" + std::to_string(poses.size()));
    GroundTruthView gt = render_gt(scene, poses[i], h, w, cfg.get_int("threads"));
    if (static_cast<int>(i) == ref_index) {
      reference = {std::move(gt.color), poses[i]};
      gt_depth = std::move(gt.depth);
    } else {
      sources.push_back({std::move(gt.color), poses[i]});
    }
  }

  const DepthOptions options = depth_options_from(cfg);
  std::optional<GaussianPrior> prior;
  if (options.sweep.n_mono > 0) {
    prior = GaussianPrior{make_prior(cfg, gt_depth, static_cast<std::uint64_t>(ref_index)), cfg.get_double("sigma"),
                          cfg.get_double("beta")};
  }
  progress("depth: sweeping " + std::to_string(sources.size()) + " source(s)");
  const DepthEstimate est = estimate_depth(reference, sources, options, prior ? &*prior : nullptr);

  OutputDir out(cfg);
  out.pfm("depth.pfm", est.depth);
  out.pfm("gt_depth.pfm", gt_depth);
  if (prior) out.pfm("prior.pfm", prior->mu);
  if (cfg.get_bool("dump_cost_volume")) {
    dump_cost_volume(out.root() / "cost_volume.f32", est.fused);
  }
  const MetricReport rep = depth_report(cfg, est.depth, gt_depth);
  out.text("report.json", rep.to_json().dump(2) + "\n");
  out.text("report.txt", rep.to_table());
  return out.manifest("depth", cfg, {{"report", rep.to_json()}, {"reference", pose_json(reference.pose)}});
}

json cmd_render(const RunConfig& cfg) {
  cfg.validate();
  const Scene scene = load_scene(cfg.get_string("scene"));
  const std::vector<CameraPose> poses = layout_poses(cfg, scene);
  const int h = cfg.get_int("height");
  const int w = cfg.get_int("width");
  const int threads = cfg.get_int("threads");
  const std::string mode = cfg.get_string("target");

  std::vector<CameraPose> source_poses;
  if (mode == "identity") {
    source_poses.push_back(render_target(cfg, poses));
  } else if (mode == "center") {
    source_poses = poses;
  } else {
    source_poses = {poses.front(), poses.back()};
  }
  const CameraPose target = render_target(cfg, poses);

  std::vector<SourceView> sources;
  std::vector<EquirectImage> gt_depths;
  for (std::size_t i = 0; i < source_poses.size(); ++i) {
    progress("render: source " + std::to_string(i + 1) + "/" + std::to_string(source_poses.size()));
    GroundTruthView gt = render_gt(scene, source_poses[i], h, w, threads);
    gt_depths.push_back(gt.depth);
    sources.push_back({std::move(gt.color), source_poses[i], std::move(gt.depth)});
  }

  if (cfg.get_string("depth_source") == "mvs") {
    if (sources.size() < 2) throw Error(ErrorCode::Config, "mvs depths need at least two source views");
    const DepthOptions options = depth_options_from(cfg);
    std::vector<EquirectImage> estimated;
    for (std::size_t i = 0; i < sources.size(); ++i) {
      progress("render: estimating depth for source " + std::to_string(i + 1));
      std::vector<PosedImage> others;
      for (std::size_t j = 0; j < sources.size(); ++j) {
        if (j != i) others.push_back({sources[j].image, sources[j].pose});
      }
      std::optional<GaussianPrior> prior;
      if (options.sweep.n_mono > 0) {
        prior = GaussianPrior{make_prior(cfg, gt_depths[i], i), cfg.get_double("sigma"), cfg.get_double("beta")};
      }
      estimated.push_back(
          estimate_depth({sources[i].image, sources[i].pose}, others, options, prior ? &*prior : nullptr).depth);
    }
    for (std::size_t i = 0; i < sources.size(); ++i) sources[i].depth = std::move(estimated[i]);
  }

  progress("render: rendering target");
  const RenderedView view = render_panorama(target, sources, render_config_from(cfg), h, w);
  const GroundTruthView gt = render_gt(scene, target, h, w, threads);

  OutputDir out(cfg);
  out.png("render.png", view.color);
  out.pfm("render.pfm", view.color);
  out.pfm("render_depth.pfm", view.depth);
  out.png("gt.png", gt.color);
  out.pfm("gt_depth.pfm", gt.depth);

  MetricReport rep = image_report(view.color, gt.color);
  const MetricReport d = depth_report(cfg, view.depth, gt.depth);
  rep.depth = d.depth;
  rep.pole_mask = d.pole_mask;
  out.text("report.json", rep.to_json().dump(2) + "\n");
  out.text("report.txt", rep.to_table());
  return out.manifest("render", cfg, {{"report", rep.to_json()}, {"target", pose_json(target)}});
}

json cmd_convert(const RunConfig& cfg) {
  cfg.validate();
  const fs::path input = cfg.get_string("input");
  if (input.empty()) throw Error(ErrorCode::Config, "convert needs 'input'");
  OutputDir out(cfg);
  if (cfg.get_string("direction") == "to-cubemap") {
    const EquirectImage pano = read_any(input);
    const CubeMap cube = equirect_to_cubemap(pano, cfg.get_int("face_size"));
    for (CubeFace f : kCubeFaces) {
      const std::string stem = std::string("face_") + face_name(f);
      const EquirectImage& face = cube.faces[static_cast<int>(f)];
      if (has_ext(input, ".pfm")) out.pfm(stem + ".pfm", face);
      if (has_ext(input, ".png") && face.channels() == 3) out.png(stem + ".png", face);
    }
  } else {
    if (!fs::is_directory(input)) throw Error(ErrorCode::Io, "to-equirect input must be a directory of faces");
    CubeMap cube;
    bool use_pfm = fs::exists(input / "face_front.pfm");
    for (CubeFace f : kCubeFaces) {
      const fs::path p = input / (std::string("face_") + face_name(f) + (use_pfm ? ".pfm" : ".png"));
      if (!fs::exists(p)) throw Error(ErrorCode::Io, "missing cube face " + p.string());
      cube.faces[static_cast<int>(f)] = read_any(p);
    }
    cube.face_size = cube.faces[0].width();
    cube.channels = cube.faces[0].channels();
    const EquirectImage pano = cubemap_to_equirect(cube, cfg.get_int("out_height"));
    if (use_pfm) out.pfm("panorama.pfm", pano);
    if (pano.channels() == 3) out.png("panorama.png", pano);
  }
  return out.manifest("convert", cfg, json::object());
}

json cmd_eval(const RunConfig& cfg, const fs::path& pred_path, const fs::path& ref_path) {
  const EquirectImage pred = read_any(pred_path);
  const EquirectImage ref = read_any(ref_path);
  if (!pred.same_shape(ref)) throw Error(ErrorCode::ShapeMismatch, "prediction and reference differ in shape");
  const MetricReport rep = pred.channels() == 1 ? depth_report(cfg, pred, ref) : image_report(pred, ref);
  return {{"command", "eval"}, {"report", rep.to_json()}, {"table", rep.to_table()}};
}

}  // namespace spherefield
