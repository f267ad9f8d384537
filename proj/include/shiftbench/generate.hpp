#pragma once

// Dataset generation: every valid combination x category x repetition is
// sampled, rendered and written out together with the manifest.
//
// Output tree:
//   <root>/images/<combination-slug>/<category>/<seed>.png
//   <root>/masks/<combination-slug>/<category>/<seed>_with.png
//   <root>/masks/<combination-slug>/<category>/<seed>_without.png
//   <root>/manifest.jsonl
//   <root>/failures.jsonl        (only when some record failed)

#include <atomic>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "categories.hpp"
#include "common.hpp"
#include "image_io.hpp"
#include "manifest.hpp"
#include "scene.hpp"
#include "taxonomy.hpp"

namespace shiftbench {

struct GenerationPlan {
  int samples_per_combination = 1;
  /// Categories to render; empty means every registry category.
  std::vector<std::string> categories;
  std::uint64_t seed = 0;
  /// When true the manifest class list is the whole registry (the
  /// classification label space); otherwise only the rendered categories.
  bool all_classes_in_header = true;
  SceneOptions scene;
  /// 0 picks the hardware concurrency.
  unsigned threads = 0;
};

struct GenerationFailure {
  std::string sample_id;
  std::string category;
  std::string combination;
  std::uint64_t seed = 0;
  std::string error;
  nlohmann::json spec;  // null when sampling failed before a spec existed
};

struct GenerationResult {
  ManifestHeader header;
  std::vector<SampleRecord> records;
  std::vector<GenerationFailure> failures;
  std::size_t planned = 0;
};

/// Seed of one record; a pure function of the plan seed and the record's
/// position, so parallel scheduling never changes outputs.
inline std::uint64_t record_seed(std::uint64_t plan_seed, std::size_t combination_index,
                                 std::size_t category_index, std::size_t repetition) {
  return derive_seed(plan_seed, {combination_index, category_index, repetition}) >> 1;
}

inline GenerationResult generate_dataset(const DomainTaxonomy& tax,
                                         const CategoryRegistry& registry,
                                         const GenerationPlan& plan,
                                         const std::filesystem::path& root) {
  namespace fs = std::filesystem;
  if (plan.samples_per_combination < 1)
    throw Error("samples_per_combination must be >=1");
  std::vector<std::string> cats = plan.categories.empty() ? registry.names() : plan.categories;
  {
    std::set<std::string> seen;
    for (const auto& c : cats) {
      registry.at(c);
      if (!seen.insert(c).second) throw Error(concat("duplicate category '", c, "'"));
    }
  }

  std::error_code ec;
  fs::create_directories(root, ec);
  if (ec || !fs::is_directory(root))
    throw Error(concat("output path '", root.string(), "' is not writable: ", ec.message()));
  {
    const auto probe = root / ".write-probe";
    std::ofstream p(probe);
    if (!p) throw Error(concat("output path '", root.string(), "' is not writable"));
    p.close();
    fs::remove(probe, ec);
  }

  const auto combos = enumerate_combinations(tax);
  struct Job {
    std::size_t combo, cat, rep;
  };
  std::vector<Job> jobs;
  for (std::size_t c = 0; c < combos.size(); ++c)
    for (std::size_t k = 0; k < cats.size(); ++k)
      for (int r = 0; r < plan.samples_per_combination; ++r)
        jobs.push_back({c, k, static_cast<std::size_t>(r)});

  struct Outcome {
    std::optional<SampleRecord> record;
    std::optional<GenerationFailure> failure;
  };
  std::vector<Outcome> outcomes(jobs.size());

  auto run = [&](std::size_t i) {
    const auto& job = jobs[i];
    const auto& combo = combos[job.combo];
    const auto& cat = cats[job.cat];
    const auto seed = record_seed(plan.seed, job.combo, job.cat, job.rep);
    const auto slug = tax.slug(combo);
    const std::string sid = concat(slug, "/", cat, "/", job.rep);
    const std::string seed_s = std::to_string(seed);
    const std::string img_rel = concat("images/", slug, "/", cat, "/", seed_s, ".png");
    const std::string mw_rel = concat("masks/", slug, "/", cat, "/", seed_s, "_with.png");
    const std::string mo_rel = concat("masks/", slug, "/", cat, "/", seed_s, "_without.png");
    std::optional<SceneSpec> spec;
    try {
      spec = sample_scene(tax, registry, combo, cat, seed, plan.scene);
      const auto out = render(*spec, registry);
      const auto labels = SceneLabels::from(tax, combo);
      const auto measured = occlusion_bin(out.occlusion_ratio);
      if (to_string(measured) != labels.occlusion)
        throw Error(concat("measured ratio ", out.occlusion_ratio, " bins to '", to_string(measured),
                           "', expected '", labels.occlusion, "'"));
      fs::create_directories((root / img_rel).parent_path());
      fs::create_directories((root / mw_rel).parent_path());
      write_png_rgb((root / img_rel).string(), out.width, out.height, out.rgb);
      write_png_mask((root / mw_rel).string(), out.width, out.height, out.mask_with_occluders);
      write_png_mask((root / mo_rel).string(), out.width, out.height, out.mask_without_occluders);
      SampleRecord r;
      r.sample_id = sid;
      r.image_path = img_rel;
      r.mask_paths = MaskPaths{mw_rel, mo_rel};
      r.category = cat;
      r.combination = tax.names(combo);
      r.occlusion_ratio = out.occlusion_ratio;
      r.seed = seed;
      r.provenance = Provenance::generated;
      outcomes[i].record = std::move(r);
    } catch (const BinUnreachable& e) {
      outcomes[i].failure = GenerationFailure{sid, cat, tax.label(combo), seed, e.what(),
                                              to_json(e.spec(), tax)};
    } catch (const std::exception& e) {
      outcomes[i].failure = GenerationFailure{sid, cat, tax.label(combo), seed, e.what(),
                                              spec ? to_json(*spec, tax) : nlohmann::json(nullptr)};
    }
  };

  unsigned n_threads = plan.threads ? plan.threads : std::max(1u, std::thread::hardware_concurrency());
  n_threads = static_cast<unsigned>(std::min<std::size_t>(n_threads, std::max<std::size_t>(1, jobs.size())));
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < n_threads; ++t)
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < jobs.size(); i = next++) run(i);
    });
  for (auto& th : pool) th.join();

  GenerationResult result;
  result.planned = jobs.size();
  result.header.taxonomy_hash = tax.hash();
  result.header.classes = plan.all_classes_in_header ? registry.names() : cats;
  for (auto& o : outcomes) {
    if (o.record) result.records.push_back(std::move(*o.record));
    if (o.failure) result.failures.push_back(std::move(*o.failure));
  }

  write_manifest(result.records, result.header, root / "manifest.jsonl");
  const auto fail_path = root / "failures.jsonl";
  if (result.failures.empty()) {
    fs::remove(fail_path, ec);
  } else {
    std::ofstream f(fail_path, std::ios::binary | std::ios::trunc);
    for (const auto& fl : result.failures)
      f << nlohmann::json{{"sample_id", fl.sample_id}, {"category", fl.category},
                          {"combination", fl.combination}, {"seed", fl.seed},
                          {"error", fl.error}, {"spec", fl.spec}}.dump()
        << "\n";
  }
  return result;
}

}  // namespace shiftbench
