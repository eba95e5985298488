#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>

#include "scafrest/pipeline.hpp"
#include "scafrest/synthesis.hpp"

namespace scafrest {

/// Flat `key = value` text. Blank lines and lines starting with '#' are
/// ignored; a repeated key keeps its last value.
class KvConfig {
 public:
  static KvConfig parse(std::istream& in, const std::string& origin = "<config>");
  static KvConfig load(const std::filesystem::path& path);

  void set(const std::string& key, const std::string& value) { values_[key] = value; }
  bool has(const std::string& key) const { return values_.count(key) != 0; }
  std::optional<std::string> get(const std::string& key) const;
  const std::map<std::string, std::string>& values() const { return values_; }

  /// Throws InvalidArgument naming the first key no apply_* function reads.
  void check_known_keys() const;

 private:
  std::map<std::string, std::string> values_;
};

/// Keys: scaffold_dir activity_dir out_dir target_w target_h alpha_threshold
/// rotation_lo rotation_hi seed split_train split_val split_test hole_fill
/// ext_test threads.
void apply_synthesis(const KvConfig& kv, SynthesisConfig& cfg);

/// Keys: inpainter (cr-patch | diffusion-fill), cr.alpha cr.patch cr.stride
/// cr.levels diffusion.max_iters diffusion.epsilon.
void apply_inpainter(const KvConfig& kv, InpainterSpec& spec);

/// Keys: threshold.lum_min threshold.lum_max threshold.max_saturation.
void apply_threshold(const KvConfig& kv, ThresholdRule& rule);

}  // namespace scafrest
