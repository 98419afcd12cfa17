#include "spherefield/config.hpp"

#include <algorithm>
#include <fstream>

#include "spherefield/error.hpp"
#include "spherefield/image_io.hpp"

namespace spherefield {

using nlohmann::json;

const std::vector<RunConfig::Key>& RunConfig::schema() {
  static const std::vector<Key> keys = {
      {"scene", Type::String, "sphere-room", "builtin scene name or path to a scene JSON"},
      {"height", Type::Int, 128, "panorama height H (width is 2H)"},
      {"width", Type::Int, 256, "panorama width W"},
      {"layout", Type::String, "line", "camera layout: line | square | scene"},
      {"views", Type::Int, 3, "number of views along a line layout"},
      {"baseline", Type::Double, 1.0, "line length, or square diagonal, in meters"},
      {"ref_view", Type::Int, 0, "reference view index for depth estimation"},
      {"target", Type::String, "middle", "render target: middle | identity | above-middle | center"},
      {"depth_source", Type::String, "gt", "depth maps used by the renderer: gt | mvs"},
      {"descriptor", Type::String, "zncc_patch", "matching descriptor: rgb | zncc_patch | census"},
      {"depth_mode", Type::String, "mono", "candidates: mono (uniform + mono) | uniform | mono-only"},
      {"n_uni", Type::Int, 59, "uniform depth candidates"},
      {"n_mono", Type::Int, 5, "mono-guided depth candidates"},
      {"sigma", Type::Double, 0.5, "prior standard deviation for mono-guided sampling (m)"},
      {"beta", Type::Double, 3.0, "search half-width in prior standard deviations"},
      {"near", Type::Double, 0.1, "near depth bound (m)"},
      {"far", Type::Double, 10.0, "far depth bound (m)"},
      {"spacing", Type::String, "linear", "uniform sweep spacing: linear | inverse"},
      {"prior_noise", Type::Double, 0.5, "additive Gaussian noise of the synthetic mono prior (m)"},
      {"prior_relative_noise", Type::Double, 0.0, "log-normal relative noise of the synthetic prior"},
      {"prior_path", Type::String, "", "optional PFM depth map used as the mono prior"},
      {"downsample", Type::Int, 1, "feature downsample factor (4 mirrors H/4 x W/4 sweeps)"},
      {"patch_warp", Type::Bool, true, "resample source patches through each sweep sphere (zncc_patch, census)"},
      {"cost_radius", Type::Int, 0, "box-filter half-width for cost aggregation"},
      {"median_radius", Type::Int, 2, "half-width of the median filter on decoded depth"},
      {"decode", Type::String, "soft", "depth decode: soft | wta"},
      {"tau", Type::Double, 0.02, "softmin temperature"},
      {"mono_fallback", Type::OptionalDouble, 0.3, "decode only mono candidates where the best cost exceeds this fraction of the chance cost (none disables)"},
      {"pole_mask", Type::Bool, true, "exclude top/bottom 5% rows from depth metrics"},
      {"dump_cost_volume", Type::Bool, false, "write the fused cost volume as raw float32 + JSON"},
      {"n_coarse", Type::Int, 64, "coarse samples per ray"},
      {"n_fine", Type::Int, 64, "importance samples per ray"},
      {"kappa", Type::Double, 1.0, "density gain on the aggregated occlusion hazard"},
      {"n_logistic", Type::Int, 2, "logistic components per visibility mixture (1 or 2)"},
      {"jitter", Type::Bool, true, "jitter coarse samples inside their bins"},
      {"input", Type::String, "", "convert: input PNG/PFM panorama or cube-face directory"},
      {"direction", Type::String, "to-cubemap", "convert: to-cubemap | to-equirect"},
      {"face_size", Type::Int, 256, "convert: cube face size F"},
      {"out_height", Type::Int, 512, "convert: stitched panorama height"},
      {"seed", Type::Int, 0, "random seed"},
      {"threads", Type::Int, 0, "worker threads (0 = SPHEREFIELD_THREADS or hardware)"},
      {"out", Type::String, "out", "output directory"},
  };
  return keys;
}

namespace {

const RunConfig::Key& find_key(const std::string& name) {
  const auto& keys = RunConfig::schema();
  auto it = std::find_if(keys.begin(), keys.end(), [&](const RunConfig::Key& k) { return k.name == name; });
  if (it == keys.end()) throw Error(ErrorCode::Config, "unknown config key '" + name + "'");
  return *it;
}

json coerce(const RunConfig::Key& key, const json& value) {
  auto bad = [&]() -> json { throw Error(ErrorCode::Config, "wrong type for config key '" + key.name + "'"); };
  switch (key.type) {
    case RunConfig::Type::Int:
      if (value.is_number_integer()) return value;
      if (value.is_number_float() && value.get<double>() == std::floor(value.get<double>())) {
        return static_cast<std::int64_t>(value.get<double>());
      }
      return bad();
    case RunConfig::Type::Double:
      if (value.is_number()) return value.get<double>();
      return bad();
    case RunConfig::Type::OptionalDouble:
      if (value.is_null()) return value;
      if (value.is_number()) return value.get<double>();
      return bad();
    case RunConfig::Type::Bool:
      if (value.is_boolean()) return value;
      return bad();
    case RunConfig::Type::String:
      if (value.is_string()) return value;
      return bad();
  }
  return bad();
}

}  // namespace

RunConfig::RunConfig() {
  values_ = json::object();
  for (const Key& k : schema()) values_[k.name] = k.default_value;
}

RunConfig RunConfig::from_json(const json& doc) {
  if (!doc.is_object()) throw Error(ErrorCode::Config, "config must be a JSON object");
  RunConfig cfg;
  for (const auto& [key, value] : doc.items()) cfg.set(key, value);
  return cfg;
}

RunConfig RunConfig::from_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open config " + path.string());
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Config, std::string("config parse error: ") + e.what());
  }
  return from_json(doc);
}

void RunConfig::set(const std::string& key, const json& value) { values_[key] = coerce(find_key(key), value); }

void RunConfig::set_from_string(const std::string& key, const std::string& text) {
  const Key& k = find_key(key);
  json value;
  try {
    switch (k.type) {
      case Type::Int: {
        std::size_t used = 0;
        value = std::stoll(text, &used);
        if (used != text.size()) throw std::invalid_argument(text);
        break;
      }
      case Type::Double:
      case Type::OptionalDouble: {
        if (k.type == Type::OptionalDouble && (text == "none" || text == "null" || text.empty())) {
          value = nullptr;
          break;
        }
        std::size_t used = 0;
        value = std::stod(text, &used);
        if (used != text.size()) throw std::invalid_argument(text);
        break;
      }
      case Type::Bool:
        if (text == "true" || text == "1" || text == "on") value = true;
        else if (text == "false" || text == "0" || text == "off") value = false;
        else throw std::invalid_argument(text);
        break;
      case Type::String:
        value = text;
        break;
    }
  } catch (const std::logic_error&) {
    throw Error(ErrorCode::Config, "cannot parse '" + text + "' for config key '" + key + "'");
  }
  set(key, value);
}

int RunConfig::get_int(const std::string& key) const { return values_.at(key).get<int>(); }
double RunConfig::get_double(const std::string& key) const { return values_.at(key).get<double>(); }
bool RunConfig::get_bool(const std::string& key) const { return values_.at(key).get<bool>(); }
std::string RunConfig::get_string(const std::string& key) const { return values_.at(key).get<std::string>(); }
bool RunConfig::is_null(const std::string& key) const { return values_.at(key).is_null(); }

void RunConfig::validate() const {
  auto fail = [](const std::string& msg) { throw Error(ErrorCode::Config, msg); };
  auto one_of = [&](const std::string& key, std::initializer_list<const char*> options) {
    const std::string v = get_string(key);
    for (const char* o : options) {
      if (v == o) return;
    }
    fail("invalid value '" + v + "' for '" + key + "'");
  };
  if (get_int("height") <= 0) fail("height must be positive");
  if (get_int("width") != 2 * get_int("height")) fail("width must equal 2 * height");
  one_of("layout", {"line", "square", "scene"});
  one_of("target", {"middle", "identity", "above-middle", "center"});
  one_of("depth_source", {"gt", "mvs"});
  one_of("descriptor", {"rgb", "zncc_patch", "census"});
  one_of("depth_mode", {"mono", "uniform", "mono-only"});
  one_of("spacing", {"linear", "inverse"});
  one_of("decode", {"soft", "wta"});
  one_of("direction", {"to-cubemap", "to-equirect"});
  if (get_int("views") < 2) fail("views must be at least 2");
  if (!(get_double("baseline") > 0.0)) fail("baseline must be positive");
  if (get_int("n_uni") < 0 || get_int("n_mono") < 0 || get_int("n_uni") + get_int("n_mono") < 1) {
    fail("need at least one depth candidate");
  }
  if (!(get_double("sigma") > 0.0) || !(get_double("beta") > 0.0)) fail("sigma and beta must be positive");
  if (!(get_double("near") > 0.0) || !(get_double("near") < get_double("far"))) fail("need 0 < near < far");
  if (get_double("prior_noise") < 0.0 || get_double("prior_relative_noise") < 0.0) fail("noise must be >= 0");
  if (get_int("downsample") < 1) fail("downsample must be >= 1");
  if (get_int("height") % get_int("downsample") != 0) fail("height must be divisible by downsample");
  if (get_int("cost_radius") < 0) fail("cost_radius must be >= 0");
  if (get_int("median_radius") < 0) fail("median_radius must be >= 0");
  if (!(get_double("tau") > 0.0)) fail("tau must be positive");
  if (get_int("n_coarse") < 1 || get_int("n_fine") < 0) fail("sample counts must be positive");
  if (!(get_double("kappa") > 0.0)) fail("kappa must be positive");
  if (get_int("n_logistic") != 1 && get_int("n_logistic") != 2) fail("n_logistic must be 1 or 2");
  if (get_int("face_size") <= 0 || get_int("out_height") <= 0) fail("convert sizes must be positive");
  if (get_int("threads") < 0) fail("threads must be >= 0");
  if (get_int("seed") < 0) fail("seed must be >= 0");
}

json RunConfig::reproducible_values() const {
  json v = values_;
  v.erase("threads");
  v.erase("out");
  return v;
}

std::string RunConfig::hash() const {
  const std::string dump = reproducible_values().dump();
  return fnv1a_hex({reinterpret_cast<const std::uint8_t*>(dump.data()), dump.size()});
}

}  // namespace spherefield
