#include <gtest/gtest.h>

#include <shiftbench/categories.hpp>
#include <shiftbench/environment.hpp>
#include <shiftbench/scene.hpp>

#include "support.hpp"

using namespace shiftbench;

namespace {

DomainCombination combo(const std::string& weather, const std::string& view,
                        const std::string& time, const std::string& season,
                        const std::string& occlusion) {
  return default_taxonomy().combination({{"weathers", weather}, {"views", view}, {"time", time},
                                         {"seasons", season}, {"occlusion", occlusion}});
}

SceneOptions small() {
  SceneOptions o;
  o.width = o.height = 160;
  return o;
}

}  // namespace

TEST(OcclusionBin, BoundaryProbes) {
  const std::vector<std::pair<double, std::string>> probes = {
      {0.0, "no occlusion"},         {0.001, "light occlusion"},   {0.199, "light occlusion"},
      {0.20, "partial occlusion"},   {0.399, "partial occlusion"}, {0.40, "moderate occlusion"},
      {0.60, "heavy occlusion"},     {0.80, "heavy occlusion"},    {0.801, "discard"},
      {1.0, "discard"}};
  for (const auto& [r, name] : probes) EXPECT_EQ(to_string(occlusion_bin(r)), name) << r;
  EXPECT_EQ(to_string(occlusion_bin(0.35)), "partial occlusion");
  EXPECT_EQ(to_string(occlusion_bin(0.85)), "discard");
  EXPECT_EQ(to_string(occlusion_bin(0.5999999)), "moderate occlusion");
  EXPECT_THROW(occlusion_bin(-0.01), Error);
  EXPECT_THROW(occlusion_bin(1.0001), Error);
  EXPECT_THROW(occlusion_bin(std::nan("")), Error);
}

TEST(OcclusionBin, NamesMatchTaxonomyDomains) {
  const auto& occ = default_taxonomy().shift(*default_taxonomy().find_shift("occlusion"));
  ASSERT_EQ(occ.domains.size(), kKeptBins.size());
  for (std::size_t i = 0; i < kKeptBins.size(); ++i)
    EXPECT_EQ(to_string(kKeptBins[i]), occ.domains[i].name);
}

TEST(Categories, DefaultRegistry) {
  const auto reg = CategoryRegistry::default_registry();
  const std::vector<std::string> names = {"car", "airplane", "bike", "motorcycle", "cat",
                                          "dog", "bear", "horse", "cow", "sheep",
                                          "bird", "human", "bus", "truck"};
  EXPECT_EQ(reg.names(), names);
  for (const auto& c : reg.categories()) {
    EXPECT_GE(c.variants.size(), 3u);
    for (std::size_t v = 0; v < c.variants.size(); ++v) {
      const auto m = reg.build(c.name, v);
      EXPECT_GT(m.triangles.size(), 10u) << c.name;
      const auto b = m.bounds();
      EXPECT_NEAR(std::max({b.hi.x - b.lo.x, b.hi.y - b.lo.y, b.hi.z - b.lo.z}), kObjectSize, 1e-9);
    }
  }
  EXPECT_THROW(reg.at("unicorn"), Error);
}

TEST(Categories, MeshFileVariant) {
  testing_support::TempDir dir;
  testing_support::spit(dir / "tri.mesh", "v 0 0 0\nv 1 0 0\nv 0 1 0\nv 0 0 1\nf 1 2 3\nf 1 3 4\nf 1 2 4\n");
  auto reg = CategoryRegistry::default_registry();
  reg.add_mesh_file("dog", (dir / "tri.mesh").string());
  EXPECT_EQ(reg.at("dog").variants.size(), 4u);
  EXPECT_EQ(reg.build("dog", 3).triangles.size(), 3u);
}

TEST(Environment, NightIsDarkAndSnowNeedsWinter) {
  const auto day = derive_environment("day", "winter", "clear", 1);
  const auto night = derive_environment("night", "winter", "clear", 1);
  EXPECT_LT(night.key_intensity, 0.25);
  EXPECT_GT(day.key_intensity, 0.8);
  EXPECT_GT(night.light_color.z, night.light_color.x);
  EXPECT_THROW(derive_environment("day", "autumn", "snowy", 1), Error);
  EXPECT_EQ(derive_environment("day", "winter", "snowy", 1).particles, Particles::snow);
  EXPECT_EQ(derive_environment("day", "autumn", "rainy", 1).particles, Particles::rain);
  EXPECT_GT(derive_environment("day", "autumn", "foggy", 1).fog_density, 0.0);
  EXPECT_GT(derive_environment("day", "autumn", "sandstorm", 1).fog_density, 0.0);
  EXPECT_EQ(derive_environment("day", "autumn", "clear", 9).to_json(),
            derive_environment("day", "autumn", "clear", 9).to_json());
  EXPECT_THROW(derive_environment("dusk", "autumn", "clear", 1), Error);
}

TEST(Camera, ViewGeometry) {
  CameraSpec cs;
  cs.distance = 10;
  cs.view = View::front;
  auto cam = make_camera(cs, 64, 64);
  EXPECT_NEAR(cam.position.z, 10, 1e-12);  // camera on +z looking at the front
  cs.base_yaw = 90;
  cam = make_camera(cs, 64, 64);
  EXPECT_NEAR(cam.position.x, 10, 1e-12);  // +x is the object's left side
  EXPECT_NEAR(cam.forward().x, -1, 1e-12);
  cs.base_yaw = 0;
  cs.base_pitch = -90;
  cam = make_camera(cs, 64, 64);
  EXPECT_NEAR(cam.position.y, 10, 1e-12);
  EXPECT_NEAR(cam.forward().y, -1, 1e-12);
  // jitter turns the camera but keeps its position
  cs.jitter_yaw = 4;
  cs.jitter_pitch = -3;
  auto jittered = make_camera(cs, 64, 64);
  EXPECT_NEAR(jittered.position.y, 10, 1e-12);
  EXPECT_GT(std::abs(jittered.forward().y + 1), 1e-4);
}

TEST(SampleScene, ViewAndJitterBounds) {
  const auto reg = CategoryRegistry::default_registry();
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto s = sample_scene(default_taxonomy(), reg,
                                combo("clear", "top", "day", "winter", "no occlusion"), "dog",
                                seed, small());
    EXPECT_EQ(s.camera.view, View::top);
    EXPECT_NEAR(s.camera.pitch(), -90, 5.0);
    for (double j : {s.camera.jitter_yaw, s.camera.jitter_pitch, s.camera.jitter_roll})
      EXPECT_LE(std::abs(j), 5.0);
    EXPECT_TRUE(s.occluders.empty());
  }
}

TEST(SampleScene, Deterministic) {
  const auto reg = CategoryRegistry::default_registry();
  const auto c = combo("rainy", "side", "night", "autumn", "partial occlusion");
  const auto a = sample_scene(default_taxonomy(), reg, c, "horse", 77, small());
  const auto b = sample_scene(default_taxonomy(), reg, c, "horse", 77, small());
  EXPECT_EQ(to_json(a, default_taxonomy()), to_json(b, default_taxonomy()));
  const auto ra = render(a, reg), rb = render(b, reg);
  EXPECT_EQ(ra.rgb, rb.rgb);
  EXPECT_EQ(ra.mask_with_occluders, rb.mask_with_occluders);
  const auto other = sample_scene(default_taxonomy(), reg, c, "horse", 78, small());
  EXPECT_NE(to_json(a, default_taxonomy()), to_json(other, default_taxonomy()));
}

TEST(SampleScene, NoOcclusionIsExactlyZero) {
  const auto reg = CategoryRegistry::default_registry();
  const auto s = sample_scene(default_taxonomy(), reg,
                              combo("foggy", "front", "day", "spring-summer", "no occlusion"),
                              "bus", 3, small());
  EXPECT_EQ(render(s, reg).occlusion_ratio, 0.0);
}

TEST(SampleScene, EveryBinReachedAndMasksNest) {
  const auto reg = CategoryRegistry::default_registry();
  const std::vector<std::string> bins = {"no occlusion", "light occlusion", "partial occlusion",
                                         "moderate occlusion", "heavy occlusion"};
  const std::vector<std::string> views = {"front", "side", "top"};
  std::uint64_t seed = 1000;
  for (const auto& cat : reg.names())
    for (const auto& b : bins) {
      const auto& view = views[seed % 3];
      const auto s = sample_scene(default_taxonomy(), reg, combo("clear", view, "day", "winter", b),
                                  cat, seed++, small());
      const auto out = render(s, reg);
      EXPECT_EQ(to_string(occlusion_bin(out.occlusion_ratio)), b) << cat << " " << view;
      std::size_t with = 0, without = 0;
      for (std::size_t i = 0; i < out.mask_with_occluders.size(); ++i) {
        ASSERT_LE(out.mask_with_occluders[i], out.mask_without_occluders[i]);
        with += out.mask_with_occluders[i];
        without += out.mask_without_occluders[i];
      }
      ASSERT_GT(without, 0u);
      EXPECT_DOUBLE_EQ(out.occlusion_ratio, 1.0 - double(with) / double(without));
      EXPECT_EQ(out.rgb.size(), 160u * 160u * 3u);
    }
}

TEST(SampleScene, ErrorsAndBudget) {
  const auto reg = CategoryRegistry::default_registry();
  const auto& tax = default_taxonomy();
  EXPECT_THROW(sample_scene(tax, reg, combo("snowy", "top", "day", "autumn", "no occlusion"),
                            "dog", 1, small()),
               Error);
  EXPECT_THROW(sample_scene(tax, reg, combo("clear", "top", "day", "autumn", "no occlusion"),
                            "unicorn", 1, small()),
               Error);
  auto opt = small();
  opt.attempt_budget = 0;
  try {
    sample_scene(tax, reg, combo("clear", "front", "day", "autumn", "heavy occlusion"), "dog", 1, opt);
    FAIL();
  } catch (const BinUnreachable& e) {
    EXPECT_NE(std::string(e.what()).find("heavy occlusion"), std::string::npos);
    EXPECT_EQ(e.spec().category, "dog");
  }
}
