#include "scafrest/manifest.hpp"

#include <openssl/evp.h>

#include <array>
#include <fstream>
#include <memory>
#include <sstream>

#include <json.hpp>

#include "scafrest/error.hpp"

namespace scafrest {
namespace {

using nlohmann::json;
constexpr const char* kFormatName = "scafrest-manifest";

json config_to_json(const SynthesisConfig& c) {
  return json{{"scaffold_dir", c.scaffold_dir.string()},
              {"activity_dir", c.activity_dir.string()},
              {"out_dir", c.out_dir.string()},
              {"target_w", c.target_w},
              {"target_h", c.target_h},
              {"alpha_threshold", c.alpha_threshold},
              {"rotation_lo", c.rotation_lo},
              {"rotation_hi", c.rotation_hi},
              {"seed", c.seed},
              {"split_train", c.split.train},
              {"split_val", c.split.val},
              {"split_test", c.split.test},
              {"hole_fill", double(c.hole_fill)},
              {"ext_test", c.ext_test}};
}

SynthesisConfig config_from_json(const json& j) {
  SynthesisConfig c;
  c.scaffold_dir = j.at("scaffold_dir").get<std::string>();
  c.activity_dir = j.at("activity_dir").get<std::string>();
  c.out_dir = j.at("out_dir").get<std::string>();
  c.target_w = j.at("target_w").get<int>();
  c.target_h = j.at("target_h").get<int>();
  c.alpha_threshold = j.at("alpha_threshold").get<double>();
  c.rotation_lo = j.at("rotation_lo").get<double>();
  c.rotation_hi = j.at("rotation_hi").get<double>();
  c.seed = j.at("seed").get<std::uint64_t>();
  c.split.train = j.at("split_train").get<double>();
  c.split.val = j.at("split_val").get<double>();
  c.split.test = j.at("split_test").get<double>();
  c.hole_fill = float(j.at("hole_fill").get<double>());
  c.ext_test = j.at("ext_test").get<bool>();
  return c;
}

std::string bucket_key(std::optional<ProportionBucket> b) {
  return b ? std::string(bucket_label(*b)) : std::string("degenerate");
}

json counts_to_json(const CountTable& t) {
  json out = json::object();
  for (Split s : kAllSplits) {
    json row = json::object();
    for (ProportionBucket b : kAllBuckets) row[std::string(bucket_label(b))] = t.at(s, b);
    row["degenerate"] = t.degenerate(s);
    row["total"] = t.split_total(s);
    out[std::string(split_name(s))] = row;
  }
  return out;
}

CountTable counts_from_json(const json& j) {
  CountTable t;
  for (Split s : kAllSplits) {
    const json& row = j.at(std::string(split_name(s)));
    for (ProportionBucket b : kAllBuckets) t.set(s, b, row.at(std::string(bucket_label(b))).get<std::size_t>());
    t.set(s, std::nullopt, row.at("degenerate").get<std::size_t>());
  }
  return t;
}

json record_to_json(const SampleRecord& r) {
  json j{{"id", r.id},
         {"scaffold_src", r.scaffold_src},
         {"activity_src", r.activity_src},
         {"angle", r.angle},
         {"proportion", r.proportion},
         {"bucket", bucket_key(r.bucket)},
         {"split", std::string(split_name(r.split))}};
  if (r.overlay_path) j["overlay_path"] = *r.overlay_path;
  if (r.mask_path) j["mask_path"] = *r.mask_path;
  if (r.hole_path) j["hole_path"] = *r.hole_path;
  if (r.gt_path) j["gt_path"] = *r.gt_path;
  return j;
}

std::optional<std::string> optional_string(const json& j, const char* key) {
  if (auto it = j.find(key); it != j.end()) return it->get<std::string>();
  return std::nullopt;
}

SampleRecord record_from_json(const json& j) {
  SampleRecord r;
  r.id = j.at("id").get<std::string>();
  r.scaffold_src = j.at("scaffold_src").get<std::string>();
  r.activity_src = j.at("activity_src").get<std::string>();
  r.angle = j.at("angle").get<double>();
  r.proportion = j.at("proportion").get<double>();
  const auto bucket = j.at("bucket").get<std::string>();
  if (bucket != "degenerate") {
    r.bucket = parse_bucket(bucket);
    if (!r.bucket) throw IoError("unknown bucket '" + bucket + "' in record " + r.id);
  }
  if (classify_bucket(r.proportion) != r.bucket) {
    throw IoError("record " + r.id + ": bucket does not contain its proportion");
  }
  const auto split = parse_split(j.at("split").get<std::string>());
  if (!split) throw IoError("unknown split in record " + r.id);
  r.split = *split;
  r.overlay_path = optional_string(j, "overlay_path");
  r.mask_path = optional_string(j, "mask_path");
  r.hole_path = optional_string(j, "hole_path");
  r.gt_path = optional_string(j, "gt_path");
  return r;
}

}  // namespace

void write_manifest(const DatasetManifest& manifest, std::ostream& out) {
  const json header{{"format", kFormatName},
                    {"version", DatasetManifest::kFormatVersion},
                    {"record_count", manifest.records.size()},
                    {"config", config_to_json(manifest.config)},
                    {"counts", counts_to_json(manifest.counts)}};
  out << header.dump() << '\n';
  for (const auto& r : manifest.records) out << record_to_json(r).dump() << '\n';
}

void write_manifest(const DatasetManifest& manifest, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  write_manifest(manifest, out);
  out.flush();
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

DatasetManifest read_manifest(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw IoError("manifest is empty");
  DatasetManifest m;
  std::size_t expected = 0;
  try {
    const json header = json::parse(line);
    if (header.at("format").get<std::string>() != kFormatName) throw IoError("not a scafrest manifest");
    const int version = header.at("version").get<int>();
    if (version != DatasetManifest::kFormatVersion) {
      throw IoError("unsupported manifest version " + std::to_string(version));
    }
    expected = header.at("record_count").get<std::size_t>();
    m.config = config_from_json(header.at("config"));
    m.counts = counts_from_json(header.at("counts"));
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty()) continue;
      try {
        m.records.push_back(record_from_json(json::parse(line)));
      } catch (const json::exception& e) {
        throw IoError("manifest line " + std::to_string(line_no) + ": " + e.what());
      }
    }
  } catch (const json::exception& e) {
    throw IoError(std::string("malformed manifest: ") + e.what());
  }
  if (m.records.size() != expected) {
    throw IoError("manifest declares " + std::to_string(expected) + " records but holds " +
                  std::to_string(m.records.size()));
  }
  if (manifest_counts(m) != m.counts) throw IoError("manifest tallies do not match its records");
  return m;
}

DatasetManifest read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open manifest '" + path.string() + "'");
  return read_manifest(in);
}

namespace {

using DigestCtx = std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)>;

DigestCtx new_sha256() {
  DigestCtx ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1) throw Error("SHA-256 init failed");
  return ctx;
}

std::string finish_hex(EVP_MD_CTX* ctx) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx, md.data(), &len);
  static constexpr char kHex[] = "0123456789abcdef";
  std::string hex;
  hex.reserve(len * 2);
  for (unsigned i = 0; i < len; ++i) {
    hex.push_back(kHex[md[i] >> 4]);
    hex.push_back(kHex[md[i] & 0xf]);
  }
  return hex;
}

}  // namespace

std::string file_digest(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  auto ctx = new_sha256();
  std::array<char, 1 << 16> buf;
  while (in) {
    in.read(buf.data(), std::streamsize(buf.size()));
    if (in.gcount() > 0) EVP_DigestUpdate(ctx.get(), buf.data(), std::size_t(in.gcount()));
  }
  return finish_hex(ctx.get());
}

std::string manifest_digest(const DatasetManifest& manifest) {
  std::ostringstream out;
  write_manifest(manifest, out);
  const std::string bytes = out.str();
  auto ctx = new_sha256();
  EVP_DigestUpdate(ctx.get(), bytes.data(), bytes.size());
  return finish_hex(ctx.get());
}

}  // namespace scafrest
