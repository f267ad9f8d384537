#include <gtest/gtest.h>

#include <shiftbench/evaluate.hpp>
#include <shiftbench/image_io.hpp>
#include <shiftbench/import.hpp>

#include "support.hpp"

using namespace shiftbench;
using testing_support::TempDir;

namespace {

DomainTaxonomy style_taxonomy() {
  return load_taxonomy(nlohmann::json::parse(R"({"format_version":1,"shifts":[
    {"name":"style","domains":[
      {"name":"art painting","description":"brush strokes and painted texture"},
      {"name":"cartoon","description":"flat colors and bold outlines"},
      {"name":"photo","description":"natural camera image"},
      {"name":"sketch","description":"pencil lines on white paper"}]}]})"));
}

void png(const std::filesystem::path& p) {
  std::filesystem::create_directories(p.parent_path());
  write_png_rgb(p.string(), 3, 3, std::vector<std::uint8_t>(27, 50));
}

nlohmann::json four_style_mapping() {
  nlohmann::json j = {{"format_version", 1}, {"root", "data"}, {"entries", nlohmann::json::array()}};
  const std::vector<std::pair<std::string, std::string>> styles = {
      {"art_painting", "art painting"}, {"cartoon", "cartoon"}, {"photo", "photo"}, {"sketch", "sketch"}};
  for (const auto& [folder, style] : styles)
    j["entries"].push_back({{"folder", folder + "/dog"}, {"class", "dog"}, {"combination", {{"style", style}}}});
  return j;
}

void four_style_tree(const TempDir& dir) {
  for (const char* s : {"art_painting", "cartoon", "photo", "sketch"})
    for (int i = 0; i < 10; ++i) png(dir / (std::string("data/") + s + "/dog/img" + std::to_string(i) + ".png"));
}

}  // namespace

TEST(Import, FourStylesTenImagesEach) {
  TempDir dir;
  four_style_tree(dir);
  const auto tax = style_taxonomy();
  const auto mapping = parse_import_mapping(four_style_mapping(), dir.path());
  std::filesystem::create_directories(dir / "out");
  const auto res = import_external(tax, mapping, dir / "out");
  EXPECT_EQ(res.records.size(), 40u);
  EXPECT_TRUE(res.warnings.empty());
  EXPECT_EQ(res.header.classes, (std::vector<std::string>{"dog"}));
  for (const auto& r : res.records) {
    EXPECT_EQ(r.provenance, Provenance::imported);
    EXPECT_FALSE(r.seed.has_value());
    EXPECT_FALSE(r.occlusion_ratio.has_value());
    EXPECT_EQ(r.combination.size(), 1u);
    EXPECT_TRUE(std::filesystem::exists(dir / "out" / r.image_path)) << r.image_path;
  }
  write_manifest(res.records, res.header, dir / "out/manifest.jsonl");
  const auto m = read_manifest(dir / "out/manifest.jsonl");
  EXPECT_TRUE(std::filesystem::exists(m.resolve(m.records[0].image_path)));
}

TEST(Import, EmptyFolderWarns) {
  TempDir dir;
  four_style_tree(dir);
  std::filesystem::create_directories(dir / "data/photo/cat");
  auto j = four_style_mapping();
  j["entries"].push_back({{"folder", "photo/cat"}, {"class", "cat"}, {"combination", {{"style", "photo"}}}});
  const auto res = import_external(style_taxonomy(), parse_import_mapping(j, dir.path()), dir.path());
  EXPECT_EQ(res.records.size(), 40u);
  ASSERT_EQ(res.warnings.size(), 1u);
  EXPECT_NE(res.warnings[0].find("photo/cat"), std::string::npos);
}

TEST(Import, Errors) {
  TempDir dir;
  four_style_tree(dir);
  const auto tax = style_taxonomy();

  auto unknown_domain = four_style_mapping();
  unknown_domain["entries"][0]["combination"]["style"] = "watercolor";
  EXPECT_THROW(import_external(tax, parse_import_mapping(unknown_domain, dir.path()), dir.path()), Error);

  auto missing_folder = four_style_mapping();
  missing_folder["entries"][0]["folder"] = "nowhere";
  EXPECT_THROW(import_external(tax, parse_import_mapping(missing_folder, dir.path()), dir.path()), Error);

  png(dir / "data/stray/x.png");
  try {
    import_external(tax, parse_import_mapping(four_style_mapping(), dir.path()), dir.path());
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("unmapped folder 'stray'"), std::string::npos) << e.what();
  }
  std::filesystem::remove_all(dir / "data/stray");

  testing_support::spit(dir / "data/sketch/dog/zz_broken.png", "not an image at all");
  try {
    import_external(tax, parse_import_mapping(four_style_mapping(), dir.path()), dir.path());
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("unreadable image"), std::string::npos) << e.what();
  }

  auto bad_version = four_style_mapping();
  bad_version["format_version"] = 7;
  EXPECT_THROW(parse_import_mapping(bad_version, dir.path()), Error);
}

TEST(Import, EvaluatesWithPartialPrompts) {
  TempDir dir;
  four_style_tree(dir);
  for (int i = 0; i < 3; ++i) png(dir / ("data/photo/cat/c" + std::to_string(i) + ".png"));
  auto j = four_style_mapping();
  j["entries"].push_back({{"folder", "photo/cat"}, {"class", "cat"}, {"combination", {{"style", "photo"}}}});
  const auto tax = style_taxonomy();
  const auto res = import_external(tax, parse_import_mapping(j, dir.path()), dir.path());
  write_manifest(res.records, res.header, dir / "m.jsonl");
  const auto m = read_manifest(dir / "m.jsonl");
  EXPECT_EQ(m.header.classes, (std::vector<std::string>{"dog", "cat"}));
  const PromptComposer pc(tax);
  EXPECT_EQ(pc.domain("dog", tax.combination({{"style", "sketch"}})).text, "a photo of a dog in sketch.");
  MockBackend be(MockBackend::Mode::oracle);
  EvalOptions opt;
  opt.mode = PromptMode::domain_plus;
  const auto rep = evaluate(m, tax, pc, be, opt);
  EXPECT_EQ(rep.overall, (Tally{43, 43}));
  EXPECT_EQ(rep.coarse("style", "photo")->tally, (Tally{13, 13}));
}
