#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"

namespace spherefield {

// Flat key/value run configuration. Every key has a type and default; see
// docs/config.md. Unknown keys and type mismatches raise Config errors.
class RunConfig {
 public:
  enum class Type { Int, Double, Bool, String, OptionalDouble };

  struct Key {
    std::string name;
    Type type;
    nlohmann::json default_value;
    std::string help;
  };

  static const std::vector<Key>& schema();

  RunConfig();  // all defaults

  static RunConfig from_json(const nlohmann::json& doc);
  static RunConfig from_file(const std::filesystem::path& path);

  // Applies "key" = textual value (as given on the command line).
  void set_from_string(const std::string& key, const std::string& value);
  void set(const std::string& key, const nlohmann::json& value);

  int get_int(const std::string& key) const;
  double get_double(const std::string& key) const;
  bool get_bool(const std::string& key) const;
  std::string get_string(const std::string& key) const;
  bool is_null(const std::string& key) const;

  // Cross-key checks (ranges, enumerations); throws Config.
  void validate() const;

  const nlohmann::json& values() const { return values_; }
  // Canonical dump without run-local keys (threads, out), and its FNV hash.
  nlohmann::json reproducible_values() const;
  std::string hash() const;

 private:
  nlohmann::json values_;
};

}  // namespace spherefield
