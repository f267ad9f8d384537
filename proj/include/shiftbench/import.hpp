#pragma once

// Import of an external image folder layout as a manifest.
//
// Mapping file:
//   {"format_version": 1,
//    "root": "path/to/images",            (relative to the mapping file)
//    "entries": [
//      {"folder": "art_painting/dog", "class": "dog",
//       "combination": {"style": "art painting"}}, ...]}
//
// Every folder under root that directly holds image files must be mapped.

#include <algorithm>
#include <array>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "common.hpp"
#include "manifest.hpp"
#include "taxonomy.hpp"

namespace shiftbench {

struct ImportEntry {
  std::string folder;
  std::string class_name;
  std::map<std::string, std::string> combination;
};

struct ImportMapping {
  std::filesystem::path root;
  std::vector<ImportEntry> entries;
};

struct ImportResult {
  ManifestHeader header;
  std::vector<SampleRecord> records;
  std::vector<std::string> warnings;
};

inline bool is_image_file(const std::filesystem::path& p) {
  auto ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext == ".png" || ext == ".jpg" || ext == ".jpeg" || ext == ".bmp";
}

/// Checks the file can be opened and carries a known image signature.
inline void check_image_readable(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::array<unsigned char, 8> sig{};
  if (!in || !in.read(reinterpret_cast<char*>(sig.data()), sig.size()))
    throw Error(concat("unreadable image '", p.string(), "'"));
  static constexpr std::array<unsigned char, 8> kPng = {0x89, 'P', 'N', 'G', 0x0d, 0x0a, 0x1a, 0x0a};
  const bool png = sig == kPng;
  const bool jpeg = sig[0] == 0xff && sig[1] == 0xd8 && sig[2] == 0xff;
  const bool bmp = sig[0] == 'B' && sig[1] == 'M';
  if (!png && !jpeg && !bmp) throw Error(concat("unreadable image '", p.string(), "': unknown format"));
}

inline ImportMapping parse_import_mapping(const nlohmann::json& j, const std::filesystem::path& base) {
  if (j.value("format_version", 0) != kFormatVersion)
    throw Error(concat("import mapping needs format_version ", kFormatVersion));
  ImportMapping m;
  m.root = base / j.value("root", std::string("."));
  for (const auto& e : j.at("entries")) {
    ImportEntry ie;
    ie.folder = e.at("folder").get<std::string>();
    ie.class_name = e.at("class").get<std::string>();
    if (ie.class_name.empty()) throw Error(concat("mapping for '", ie.folder, "' has an empty class"));
    if (e.contains("combination"))
      ie.combination = e.at("combination").get<std::map<std::string, std::string>>();
    m.entries.push_back(std::move(ie));
  }
  return m;
}

inline ImportMapping load_import_mapping(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(concat("cannot open mapping '", path.string(), "'"));
  try {
    return parse_import_mapping(nlohmann::json::parse(in), path.parent_path());
  } catch (const nlohmann::json::exception& e) {
    throw Error(concat("mapping '", path.string(), "': ", e.what()));
  }
}

/// Builds imported records for every mapped folder. Image paths are made
/// relative to `manifest_dir`, where the manifest will be written.
inline ImportResult import_external(const DomainTaxonomy& tax, const ImportMapping& mapping,
                                    const std::filesystem::path& manifest_dir) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(mapping.root))
    throw Error(concat("import root '", mapping.root.string(), "' is not a directory"));
  const auto root = fs::weakly_canonical(mapping.root);

  std::set<fs::path> mapped;
  for (const auto& e : mapping.entries) {
    const auto dir = fs::weakly_canonical(root / e.folder);
    if (!fs::is_directory(dir)) throw Error(concat("mapped folder '", e.folder, "' does not exist"));
    if (!mapped.insert(dir).second) throw Error(concat("folder '", e.folder, "' mapped twice"));
    try {
      labeled_membership(tax, tax.combination(e.combination));
    } catch (const Error& err) {
      throw Error(concat("mapping for '", e.folder, "': ", err.what()));
    }
  }
  for (const auto& d : fs::recursive_directory_iterator(root)) {
    if (!d.is_regular_file() || !is_image_file(d.path())) continue;
    const auto dir = fs::weakly_canonical(d.path().parent_path());
    if (!mapped.count(dir))
      throw Error(concat("unmapped folder '", fs::relative(dir, root).generic_string(),
                         "' contains images"));
  }

  ImportResult r;
  r.header.taxonomy_hash = tax.hash();
  r.header.generator_version = "shiftbench-import/1.0";
  const auto out_dir = fs::weakly_canonical(manifest_dir.empty() ? fs::path(".") : manifest_dir);
  std::set<std::string> classes;
  for (const auto& e : mapping.entries) {
    if (classes.insert(e.class_name).second) r.header.classes.push_back(e.class_name);
    const auto dir = fs::weakly_canonical(root / e.folder);
    std::vector<fs::path> files;
    for (const auto& f : fs::directory_iterator(dir))
      if (f.is_regular_file() && is_image_file(f.path())) files.push_back(f.path());
    std::sort(files.begin(), files.end());
    if (files.empty()) {
      r.warnings.push_back(concat("folder '", e.folder, "' has no images"));
      continue;
    }
    for (const auto& f : files) {
      check_image_readable(f);
      SampleRecord rec;
      rec.sample_id = concat(fs::path(e.folder).generic_string(), "/", f.filename().string());
      rec.image_path = fs::relative(f, out_dir).generic_string();
      rec.category = e.class_name;
      rec.combination = e.combination;
      rec.provenance = Provenance::imported;
      r.records.push_back(std::move(rec));
    }
  }
  return r;
}

}  // namespace shiftbench
