// spherefield: synth | depth | render | convert | eval
#include <cstdio>
#include <iostream>
#include <map>
#include <string>

#include "CLI11.hpp"
#include "spherefield/config.hpp"
#include "spherefield/error.hpp"
#include "spherefield/pipeline.hpp"

using namespace spherefield;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitIo = 3;
constexpr int kExitNumerical = 4;

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::Io: return kExitIo;
    case ErrorCode::Numerical:
    case ErrorCode::NoHit: return kExitNumerical;
    default: return kExitConfig;
  }
}

std::string flag_name(const std::string& key) {
  std::string f = key;
  for (char& c : f) {
    if (c == '_') c = '-';
  }
  return "--" + f;
}

struct Command {
  CLI::App* app = nullptr;
  std::string config_path;
  std::map<std::string, std::string> overrides;
};

void add_common(Command& cmd) {
  cmd.app->add_option("--config", cmd.config_path, "JSON run configuration");
  for (const RunConfig::Key& key : RunConfig::schema()) {
    cmd.app->add_option_function<std::string>(
        flag_name(key.name), [&cmd, name = key.name](const std::string& v) { cmd.overrides[name] = v; }, key.help);
  }
}

RunConfig resolve(const Command& cmd) {
  RunConfig cfg = cmd.config_path.empty() ? RunConfig() : RunConfig::from_file(cmd.config_path);
  for (const auto& [key, value] : cmd.overrides) cfg.set_from_string(key, value);
  cfg.validate();
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spherical radiance-field toolkit: oracle scenes, sphere-sweep depth, visibility-aware rendering"};
  app.require_subcommand(1);

  Command synth{app.add_subcommand("synth", "render oracle panoramas and depths")};
  Command depth{app.add_subcommand("depth", "estimate reference-view depth by sphere sweep")};
  Command render{app.add_subcommand("render", "render a novel panorama from source views")};
  Command convert{app.add_subcommand("convert", "equirectangular <-> cube map conversion")};
  Command eval{app.add_subcommand("eval", "compare a prediction against a reference image or depth map")};
  std::string pred_path, ref_path;
  eval.app->add_option("prediction", pred_path, "predicted PNG/PFM")->required();
  eval.app->add_option("reference", ref_path, "reference PNG/PFM")->required();
  for (Command* c : {&synth, &depth, &render, &convert, &eval}) add_common(*c);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitConfig;
  }

  try {
    nlohmann::json result;
    if (synth.app->parsed()) result = cmd_synth(resolve(synth));
    else if (depth.app->parsed()) result = cmd_depth(resolve(depth));
    else if (render.app->parsed()) result = cmd_render(resolve(render));
    else if (convert.app->parsed()) result = cmd_convert(resolve(convert));
    else {
      result = cmd_eval(resolve(eval), pred_path, ref_path);
      std::cout << result["table"].get<std::string>();
      return 0;
    }
    if (result.contains("report")) std::cout << result["report"].dump(2) << '\n';
    else std::cout << "wrote " << result["outputs"].size() << " file(s), config " << result["config_hash"].get<std::string>() << '\n';
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
