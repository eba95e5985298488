#include "scafrest/kv_config.hpp"

#include <array>
#include <charconv>
#include <fstream>
#include <istream>
#include <string_view>
#include <type_traits>

#include "scafrest/error.hpp"

namespace scafrest {
namespace {

constexpr std::array<std::string_view, 28> kKnownKeys = {
    "scaffold_dir", "activity_dir", "out_dir", "target_w", "target_h",
    "alpha_threshold", "rotation_lo", "rotation_hi", "seed", "split_train",
    "split_val", "split_test", "hole_fill", "ext_test", "threads",
    "inpainter", "cr.alpha", "cr.patch", "cr.stride", "cr.levels",
    "diffusion.max_iters", "diffusion.epsilon", "threshold.lum_min", "threshold.lum_max",
    "threshold.max_saturation", "segmenter", "embedding_side", "dataset_name"};

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

template <typename T>
T parse_number(const std::string& key, const std::string& text) {
  T v{};
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw InvalidArgument("config key '" + key + "': cannot parse '" + text + "'");
  }
  return v;
}

bool parse_bool(const std::string& key, const std::string& text) {
  if (text == "true" || text == "1" || text == "yes") return true;
  if (text == "false" || text == "0" || text == "no") return false;
  throw InvalidArgument("config key '" + key + "': expected a boolean, got '" + text + "'");
}

template <typename T>
void read_into(const KvConfig& kv, const std::string& key, T& out) {
  const auto v = kv.get(key);
  if (!v) return;
  if constexpr (std::is_same_v<T, bool>) {
    out = parse_bool(key, *v);
  } else if constexpr (std::is_same_v<T, std::filesystem::path>) {
    out = *v;
  } else {
    out = parse_number<T>(key, *v);
  }
}

}  // namespace

KvConfig KvConfig::parse(std::istream& in, const std::string& origin) {
  KvConfig kv;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw InvalidArgument(origin + ":" + std::to_string(lineno) + ": expected 'key = value'");
    }
    const std::string key = trim(std::string_view(t).substr(0, eq));
    if (key.empty()) throw InvalidArgument(origin + ":" + std::to_string(lineno) + ": empty key");
    kv.values_[key] = trim(std::string_view(t).substr(eq + 1));
  }
  return kv;
}

KvConfig KvConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config '" + path.string() + "'");
  return parse(in, path.string());
}

std::optional<std::string> KvConfig::get(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return std::nullopt;
  return it->second;
}

void KvConfig::check_known_keys() const {
  for (const auto& [k, v] : values_) {
    bool known = false;
    for (auto name : kKnownKeys) known = known || name == k;
    if (!known) throw InvalidArgument("unknown config key '" + k + "'");
  }
}

void apply_synthesis(const KvConfig& kv, SynthesisConfig& cfg) {
  read_into(kv, "scaffold_dir", cfg.scaffold_dir);
  read_into(kv, "activity_dir", cfg.activity_dir);
  read_into(kv, "out_dir", cfg.out_dir);
  read_into(kv, "target_w", cfg.target_w);
  read_into(kv, "target_h", cfg.target_h);
  read_into(kv, "alpha_threshold", cfg.alpha_threshold);
  read_into(kv, "rotation_lo", cfg.rotation_lo);
  read_into(kv, "rotation_hi", cfg.rotation_hi);
  read_into(kv, "seed", cfg.seed);
  read_into(kv, "split_train", cfg.split.train);
  read_into(kv, "split_val", cfg.split.val);
  read_into(kv, "split_test", cfg.split.test);
  read_into(kv, "hole_fill", cfg.hole_fill);
  read_into(kv, "ext_test", cfg.ext_test);
  read_into(kv, "threads", cfg.threads);
}

void apply_inpainter(const KvConfig& kv, InpainterSpec& spec) {
  if (const auto name = kv.get("inpainter")) {
    if (*name == "cr-patch") {
      spec.kind = InpainterKind::CrPatch;
    } else if (*name == "diffusion-fill") {
      spec.kind = InpainterKind::DiffusionFill;
    } else {
      throw InvalidArgument("config key 'inpainter': unknown provider '" + *name + "'");
    }
  }
  read_into(kv, "cr.alpha", spec.cr.alpha);
  read_into(kv, "cr.patch", spec.cr.patch);
  read_into(kv, "cr.stride", spec.cr.stride);
  read_into(kv, "cr.levels", spec.pyramid_levels);
  read_into(kv, "diffusion.max_iters", spec.diffusion.max_iters);
  read_into(kv, "diffusion.epsilon", spec.diffusion.epsilon);
}

void apply_threshold(const KvConfig& kv, ThresholdRule& rule) {
  read_into(kv, "threshold.lum_min", rule.lum_min);
  read_into(kv, "threshold.lum_max", rule.lum_max);
  read_into(kv, "threshold.max_saturation", rule.max_saturation);
}

}  // namespace scafrest
