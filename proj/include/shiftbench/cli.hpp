#pragma once

// The `shiftbench` command line.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "backend.hpp"
#include "categories.hpp"
#include "common.hpp"
#include "evaluate.hpp"
#include "generate.hpp"
#include "import.hpp"
#include "manifest.hpp"
#include "promptkit.hpp"
#include "taxonomy.hpp"

namespace shiftbench {

inline constexpr const char* kBackendEnv = "SHIFTBENCH_BACKEND";

/// "weathers=clear,views=side" -> {weathers: clear, views: side}.
inline std::map<std::string, std::string> parse_assignment(const std::string& s) {
  std::map<std::string, std::string> out;
  if (s.empty()) return out;
  for (const auto& part : split(s, ',')) {
    const auto eq = part.find('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 == part.size())
      throw Error(concat("expected shift=domain, got '", part, "'"));
    if (!out.emplace(part.substr(0, eq), part.substr(eq + 1)).second)
      throw Error(concat("shift '", part.substr(0, eq), "' given twice"));
  }
  return out;
}

namespace detail {

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw Error(concat("cannot write '", path, "'"));
  f << text;
  if (!f) throw Error(concat("failed writing '", path, "'"));
}

}  // namespace detail

inline int run_cli(int argc, const char* const* argv, std::ostream& out = std::cout,
                   std::ostream& err = std::cerr) {
  CLI::App app{"Synthetic domain-shift benchmark: generate, import and evaluate.", "shiftbench"};
  app.require_subcommand(1);
  app.failure_message(CLI::FailureMessage::help);

  std::string taxonomy_path;
  app.add_option("--taxonomy", taxonomy_path, "Taxonomy JSON (default: built-in)");

  // taxonomy
  auto* tax_cmd = app.add_subcommand("taxonomy", "Inspect the domain taxonomy");
  tax_cmd->require_subcommand(1);
  bool tax_json = false;
  auto* tax_show = tax_cmd->add_subcommand("show", "List shifts, domains and exclusions");
  tax_show->add_flag("--json", tax_json, "Print the taxonomy as JSON");
  auto* tax_enum = tax_cmd->add_subcommand("enumerate", "Print the count and every valid combination");
  bool enum_count_only = false;
  tax_enum->add_flag("--count", enum_count_only, "Only print the count");
  auto* tax_validate = tax_cmd->add_subcommand("validate", "Check one combination");
  std::string validate_assignment;
  tax_validate->add_option("assignment", validate_assignment, "shift=domain,... pairs")->required();

  // prompt
  auto* prompt_cmd = app.add_subcommand("prompt", "Compose one prompt");
  std::string prompt_class, prompt_assignment, prompt_mode = "domain", prompt_desc;
  prompt_cmd->add_option("--class", prompt_class, "Class name")->required();
  prompt_cmd->add_option("--combination", prompt_assignment, "shift=domain,... pairs");
  prompt_cmd->add_option("--mode", prompt_mode, "baseline|domain|domain_plus")->capture_default_str();
  prompt_cmd->add_option("--descriptions", prompt_desc, "Description registry JSON");

  // generate
  auto* gen_cmd = app.add_subcommand("generate", "Render a labeled dataset");
  std::string gen_out;
  std::string gen_categories;
  std::vector<std::string> gen_meshes;
  GenerationPlan plan;
  gen_cmd->add_option("--out", gen_out, "Output directory")->required();
  gen_cmd->add_option("--per-combination", plan.samples_per_combination,
                      "Samples per combination and category")->capture_default_str();
  gen_cmd->add_option("--categories", gen_categories, "Comma-separated categories (default: all)");
  gen_cmd->add_option("--seed", plan.seed, "Plan seed")->capture_default_str();
  gen_cmd->add_option("--threads", plan.threads, "Worker threads (0 = all cores)")->capture_default_str();
  gen_cmd->add_option("--size", plan.scene.width, "Image width and height in pixels")
      ->capture_default_str()->check(CLI::Range(16, 4096));
  gen_cmd->add_option("--attempts", plan.scene.attempt_budget, "Occluder placement budget")
      ->capture_default_str()->check(CLI::PositiveNumber);
  gen_cmd->add_option("--mesh", gen_meshes, "Extra mesh variant as category=path.obj (repeatable)");
  bool gen_rendered_only = false;
  gen_cmd->add_flag("--rendered-classes-only", gen_rendered_only,
                    "Header class list holds only the rendered categories");

  // import
  auto* imp_cmd = app.add_subcommand("import", "Build a manifest from an image folder layout");
  std::string imp_mapping, imp_out;
  imp_cmd->add_option("--mapping", imp_mapping, "Mapping JSON")->required();
  imp_cmd->add_option("--out", imp_out, "Manifest path to write")->required();

  // evaluate
  auto* eval_cmd = app.add_subcommand("evaluate", "Classify a manifest and write a report");
  std::string eval_manifest, eval_mode = "domain", eval_out, eval_desc;
  std::string eval_backend;
  std::uint64_t eval_seed = 0;
  EvalOptions eval_opt;
  bool eval_no_cache = false;
  eval_cmd->add_option("--manifest", eval_manifest, "Manifest path")->required();
  eval_cmd->add_option("--mode", eval_mode, "baseline|domain|domain_plus")->capture_default_str();
  eval_cmd->add_option("--backend", eval_backend,
                       concat("mock[:oracle|noise|constant] or stdio:<cmd> (default: $", kBackendEnv,
                              " or mock)"));
  eval_cmd->add_option("--out", eval_out, "Report JSON path");
  eval_cmd->add_option("--seed", eval_seed, "Seed for stochastic backends")->capture_default_str();
  eval_cmd->add_option("--batch-size", eval_opt.batch_size, "Images per backend request")
      ->capture_default_str()->check(CLI::PositiveNumber);
  eval_cmd->add_option("--top-k", eval_opt.top_k, "k for the top-k counter")->capture_default_str()
      ->check(CLI::PositiveNumber);
  eval_cmd->add_option("--descriptions", eval_desc, "Description registry JSON");
  eval_cmd->add_flag("--no-cache", eval_no_cache, "Disable the text-embedding cache");

  // compare
  auto* cmp_cmd = app.add_subcommand("compare", "Per-domain accuracy deltas between two reports");
  std::string cmp_a, cmp_b, cmp_out;
  cmp_cmd->add_option("a", cmp_a, "Reference report")->required();
  cmp_cmd->add_option("b", cmp_b, "Compared report")->required();
  cmp_cmd->add_option("--out", cmp_out, "Write the comparison as JSON");

  // report
  auto* rep_cmd = app.add_subcommand("report", "Print a report as a table");
  std::string rep_path;
  bool rep_json = false;
  rep_cmd->add_option("report", rep_path, "Report JSON")->required();
  rep_cmd->add_flag("--json", rep_json, "Print the report JSON instead");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  try {
    const DomainTaxonomy tax =
        taxonomy_path.empty() ? default_taxonomy() : load_taxonomy_file(taxonomy_path);

    if (*tax_cmd) {
      if (*tax_show) {
        if (tax_json) {
          out << tax.to_json().dump(2) << "\n";
          return 0;
        }
        out << "taxonomy " << tax.hash() << ": " << tax.shifts().size() << " shifts, "
            << tax.domain_count() << " domains\n";
        for (const auto& s : tax.shifts()) {
          out << "  " << s.name << ":";
          for (std::size_t d = 0; d < s.domains.size(); ++d)
            out << (d ? ", " : " ") << s.domains[d].name;
          out << "\n";
        }
        for (const auto& e : tax.exclusions())
          out << "  exclude " << tax.path(e.a) << " with " << tax.path(e.b) << "\n";
        const auto n = enumerate_combinations(tax).size();
        out << "valid combinations: " << n << " of " << tax.unconstrained_count() << "\n";
        return 0;
      }
      if (*tax_enum) {
        const auto combos = enumerate_combinations(tax);
        out << combos.size() << "\n";
        if (!enum_count_only)
          for (const auto& c : combos) out << tax.label(c) << "\n";
        return 0;
      }
      if (*tax_validate) {
        const auto v = validate_combination(tax, tax.combination(parse_assignment(validate_assignment)));
        if (v) {
          out << "valid\n";
          return 0;
        }
        out << "invalid: " << v.reason << "\n";
        return 1;
      }
    }

    if (*prompt_cmd) {
      const auto reg = prompt_desc.empty() ? DescriptionRegistry::from_taxonomy(tax)
                                           : DescriptionRegistry::load_file(prompt_desc);
      const PromptComposer composer(tax, reg);
      const auto mode = parse_prompt_mode(prompt_mode);
      std::optional<DomainCombination> c;
      if (!prompt_assignment.empty() || mode != PromptMode::baseline)
        c = tax.combination(parse_assignment(prompt_assignment));
      out << composer.compose(mode, prompt_class, c).text << "\n";
      return 0;
    }

    if (*gen_cmd) {
      auto registry = CategoryRegistry::default_registry();
      for (const auto& m : gen_meshes) {
        const auto eq = m.find('=');
        if (eq == std::string::npos) throw Error(concat("--mesh expects category=path, got '", m, "'"));
        registry.add_mesh_file(m.substr(0, eq), m.substr(eq + 1));
      }
      if (!gen_categories.empty()) plan.categories = split(gen_categories, ',');
      plan.scene.height = plan.scene.width;
      plan.all_classes_in_header = !gen_rendered_only;
      const auto res = generate_dataset(tax, registry, plan, gen_out);
      out << "generated " << res.records.size() << " of " << res.planned << " records -> "
          << (std::filesystem::path(gen_out) / "manifest.jsonl").string() << "\n";
      if (!res.failures.empty())
        err << res.failures.size() << " records failed; see "
            << (std::filesystem::path(gen_out) / "failures.jsonl").string() << "\n";
      return 0;
    }

    if (*imp_cmd) {
      const auto mapping = load_import_mapping(imp_mapping);
      const auto out_path = std::filesystem::path(imp_out);
      if (out_path.has_parent_path()) std::filesystem::create_directories(out_path.parent_path());
      const auto res = import_external(tax, mapping, out_path.parent_path());
      for (const auto& w : res.warnings) err << "warning: " << w << "\n";
      write_manifest(res.records, res.header, out_path);
      out << "imported " << res.records.size() << " records -> " << out_path.string() << "\n";
      return 0;
    }

    if (*eval_cmd) {
      if (eval_backend.empty()) {
        const char* env = std::getenv(kBackendEnv);
        eval_backend = env && *env ? env : "mock";
      }
      const auto manifest = read_manifest(eval_manifest);
      const auto reg = eval_desc.empty() ? DescriptionRegistry::from_taxonomy(tax)
                                         : DescriptionRegistry::load_file(eval_desc);
      const PromptComposer composer(tax, reg);
      auto backend = make_backend(eval_backend, eval_seed);
      eval_opt.mode = parse_prompt_mode(eval_mode);
      eval_opt.cache_text = !eval_no_cache;
      const auto report = evaluate(manifest, tax, composer, *backend, eval_opt);
      if (!eval_out.empty()) detail::write_text(eval_out, to_json(report).dump(2) + "\n");
      out << format_report(report);
      return 0;
    }

    if (*cmp_cmd) {
      const auto cmp = compare_reports(load_report(cmp_a), load_report(cmp_b));
      if (!cmp_out.empty()) detail::write_text(cmp_out, to_json(cmp).dump(2) + "\n");
      out << format_comparison(cmp);
      return 0;
    }

    if (*rep_cmd) {
      const auto report = load_report(rep_path);
      if (rep_json)
        out << to_json(report).dump(2) << "\n";
      else
        out << format_report(report);
      return 0;
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}

}  // namespace shiftbench
