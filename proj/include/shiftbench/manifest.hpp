#pragma once

// Line-delimited dataset manifest. Line 1 is the header object, each further
// line one SampleRecord. Paths inside records are relative to the manifest's
// directory.

#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "common.hpp"

namespace shiftbench {

enum class Provenance { generated, imported };

inline std::string to_string(Provenance p) {
  return p == Provenance::generated ? "generated" : "imported";
}

struct MaskPaths {
  std::string with_occluders;
  std::string without_occluders;
  bool operator==(const MaskPaths&) const = default;
};

struct SampleRecord {
  std::string sample_id;
  std::string image_path;
  std::optional<MaskPaths> mask_paths;
  std::string category;
  /// shift name -> domain name; partial for imported records.
  std::map<std::string, std::string> combination;
  std::optional<double> occlusion_ratio;
  std::optional<std::uint64_t> seed;
  Provenance provenance = Provenance::generated;

  bool operator==(const SampleRecord&) const = default;
};

struct ManifestHeader {
  int format_version = kFormatVersion;
  std::string taxonomy_hash;
  std::vector<std::string> classes;
  std::string generator_version{kGeneratorVersion};
  std::string root = ".";

  bool operator==(const ManifestHeader&) const = default;
};

struct Manifest {
  ManifestHeader header;
  std::vector<SampleRecord> records;
  /// Directory the manifest was read from; record paths resolve against it.
  std::filesystem::path base_dir;

  std::filesystem::path resolve(const std::string& rel) const {
    return base_dir / header.root / rel;
  }
};

inline nlohmann::json to_json(const ManifestHeader& h) {
  return {{"format_version", h.format_version}, {"kind", "header"},
          {"taxonomy_hash", h.taxonomy_hash}, {"classes", h.classes},
          {"generator_version", h.generator_version}, {"root", h.root}};
}

inline nlohmann::json to_json(const SampleRecord& r) {
  nlohmann::json j;
  j["sample_id"] = r.sample_id;
  j["image_path"] = r.image_path;
  j["mask_paths"] = r.mask_paths ? nlohmann::json{{"with_occluders", r.mask_paths->with_occluders},
                                                  {"without_occluders", r.mask_paths->without_occluders}}
                                 : nlohmann::json(nullptr);
  j["category"] = r.category;
  j["combination"] = r.combination;
  j["occlusion_ratio"] = r.occlusion_ratio ? nlohmann::json(*r.occlusion_ratio) : nlohmann::json(nullptr);
  j["seed"] = r.seed ? nlohmann::json(*r.seed) : nlohmann::json(nullptr);
  j["provenance"] = to_string(r.provenance);
  return j;
}

inline ManifestHeader header_from_json(const nlohmann::json& j) {
  ManifestHeader h;
  h.format_version = j.at("format_version").get<int>();
  if (h.format_version != kFormatVersion)
    throw Error(concat("unsupported manifest format_version ", h.format_version));
  if (j.value("kind", std::string{}) != "header") throw Error("first line is not a manifest header");
  h.taxonomy_hash = j.at("taxonomy_hash").get<std::string>();
  h.classes = j.at("classes").get<std::vector<std::string>>();
  h.generator_version = j.at("generator_version").get<std::string>();
  h.root = j.value("root", std::string("."));
  return h;
}

inline SampleRecord record_from_json(const nlohmann::json& j) {
  SampleRecord r;
  r.sample_id = j.at("sample_id").get<std::string>();
  r.image_path = j.at("image_path").get<std::string>();
  if (const auto& m = j.at("mask_paths"); !m.is_null())
    r.mask_paths = MaskPaths{m.at("with_occluders").get<std::string>(),
                             m.at("without_occluders").get<std::string>()};
  r.category = j.at("category").get<std::string>();
  r.combination = j.at("combination").get<std::map<std::string, std::string>>();
  if (const auto& v = j.at("occlusion_ratio"); !v.is_null()) r.occlusion_ratio = v.get<double>();
  if (const auto& v = j.at("seed"); !v.is_null()) r.seed = v.get<std::uint64_t>();
  const auto prov = j.at("provenance").get<std::string>();
  if (prov == "generated") r.provenance = Provenance::generated;
  else if (prov == "imported") r.provenance = Provenance::imported;
  else throw Error(concat("unknown provenance '", prov, "'"));
  return r;
}

/// Checks one record against the header; throws with the reason.
inline void check_record(const SampleRecord& r, const ManifestHeader& h,
                         const std::set<std::string>& classes) {
  if (r.sample_id.empty()) throw Error("empty sample_id");
  if (r.image_path.empty()) throw Error("empty image_path");
  if (!classes.count(r.category))
    throw Error(concat("category '", r.category, "' not in header class list"));
  if (r.occlusion_ratio && !(*r.occlusion_ratio >= 0.0 && *r.occlusion_ratio <= 1.0))
    throw Error("occlusion_ratio outside [0,1]");
  if (r.provenance == Provenance::generated) {
    if (!r.occlusion_ratio || !r.seed || !r.mask_paths)
      throw Error("generated record needs occlusion_ratio, seed and mask_paths");
    if (r.combination.empty()) throw Error("generated record needs a combination");
  }
  (void)h;
}

inline std::string serialize_manifest(const ManifestHeader& header,
                                      const std::vector<SampleRecord>& records) {
  const std::set<std::string> classes(header.classes.begin(), header.classes.end());
  if (classes.size() != header.classes.size()) throw Error("duplicate class in header class list");
  std::string out = to_json(header).dump() + "\n";
  std::set<std::string> ids;
  for (std::size_t i = 0; i < records.size(); ++i) {
    try {
      check_record(records[i], header, classes);
      if (!ids.insert(records[i].sample_id).second)
        throw Error(concat("duplicate sample_id '", records[i].sample_id, "'"));
    } catch (const Error& e) {
      throw Error(concat("record ", i, " (line ", i + 2, "): ", e.what()));
    }
    out += to_json(records[i]).dump() + "\n";
  }
  return out;
}

inline std::string manifest_hash(const Manifest& m) {
  return hex64(fnv1a64(serialize_manifest(m.header, m.records)));
}

inline void write_manifest(const std::vector<SampleRecord>& records,
                           const ManifestHeader& header, const std::filesystem::path& path) {
  const auto text = serialize_manifest(header, records);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(concat("cannot write manifest '", path.string(), "'"));
  out << text;
  if (!out) throw Error(concat("failed writing manifest '", path.string(), "'"));
}

inline Manifest parse_manifest(std::istream& in, const std::string& origin = "<manifest>") {
  Manifest m;
  std::string line;
  std::size_t lineno = 0;
  std::set<std::string> classes;
  std::set<std::string> ids;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      if (!have_header) {
        m.header = header_from_json(j);
        classes = {m.header.classes.begin(), m.header.classes.end()};
        have_header = true;
        continue;
      }
      auto r = record_from_json(j);
      check_record(r, m.header, classes);
      if (!ids.insert(r.sample_id).second)
        throw Error(concat("duplicate sample_id '", r.sample_id, "'"));
      m.records.push_back(std::move(r));
    } catch (const std::exception& e) {
      throw Error(concat(origin, ":", lineno, ": ", e.what()));
    }
  }
  if (!have_header) throw Error(concat(origin, ": missing manifest header"));
  return m;
}

inline Manifest read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(concat("cannot open manifest '", path.string(), "'"));
  Manifest m = parse_manifest(in, path.string());
  m.base_dir = path.parent_path();
  return m;
}

}  // namespace shiftbench
