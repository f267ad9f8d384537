#pragma once

// Text prompt composition: the plain class template, the domain-name variant,
// and the domain-name-plus-description variant.

#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "common.hpp"
#include "taxonomy.hpp"

namespace shiftbench {

enum class PromptMode { baseline, domain, domain_plus };

inline std::string to_string(PromptMode m) {
  switch (m) {
    case PromptMode::baseline: return "baseline";
    case PromptMode::domain: return "domain";
    case PromptMode::domain_plus: return "domain_plus";
  }
  return "?";
}

inline PromptMode parse_prompt_mode(std::string_view s) {
  if (s == "baseline") return PromptMode::baseline;
  if (s == "domain") return PromptMode::domain;
  if (s == "domain_plus" || s == "domain++") return PromptMode::domain_plus;
  throw Error(concat("unknown prompt mode '", s,
                     "' (expected baseline|domain|domain_plus)"));
}

inline constexpr std::string_view kPromptPrefix = "a photo of a";

struct PromptSpec {
  PromptMode mode = PromptMode::baseline;
  std::string class_name;
  std::optional<DomainCombination> combination;
  std::string text;
  /// Set when a domain-aware mode had no labeled slot to use and produced
  /// the baseline text instead.
  bool fell_back = false;
};

/// Domain descriptions keyed by "shift.domain".
class DescriptionRegistry {
 public:
  struct Entry {
    std::string text;
    /// "published" for strings taken from the reference prompt example,
    /// "curated" for the rest.
    std::string origin = "curated";
  };

  DescriptionRegistry() = default;

  /// Registry seeded from the taxonomy's own domain descriptions.
  static DescriptionRegistry from_taxonomy(const DomainTaxonomy& tax) {
    DescriptionRegistry r;
    static const std::set<std::string> published = {
        "weathers.clear", "views.side", "time.day", "seasons.autumn",
        "occlusion.light occlusion"};
    for (std::size_t s = 0; s < tax.shifts().size(); ++s)
      for (std::size_t d = 0; d < tax.shift(s).domains.size(); ++d) {
        const auto& dom = tax.shift(s).domains[d];
        if (dom.description.empty()) continue;
        const auto key = tax.path({s, d});
        r.set(key, {dom.description,
                    published.count(key) ? "published" : "curated"});
      }
    return r;
  }

  /// Schema: { "format_version": 1, "descriptions": { "shift.domain":
  /// "text" | { "text": "...", "origin": "published|curated" } } }
  static DescriptionRegistry from_json(const nlohmann::json& doc) {
    if (!doc.is_object() || !doc.contains("descriptions"))
      throw Error("description registry needs a 'descriptions' object");
    if (doc.contains("format_version") &&
        doc.at("format_version").get<int>() != kFormatVersion)
      throw Error("unsupported description registry format_version");
    DescriptionRegistry r;
    for (const auto& [key, val] : doc.at("descriptions").items()) {
      if (key.find('.') == std::string::npos)
        throw Error(concat("registry key '", key, "' is not shift.domain"));
      Entry e;
      if (val.is_string()) {
        e.text = val.get<std::string>();
      } else {
        e.text = val.at("text").get<std::string>();
        e.origin = val.value("origin", std::string("curated"));
      }
      if (e.text.empty())
        throw Error(concat("empty description for '", key, "'"));
      r.set(key, std::move(e));
    }
    return r;
  }

  static DescriptionRegistry load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(concat("cannot open description registry '", path, "'"));
    try {
      return from_json(nlohmann::json::parse(in));
    } catch (const nlohmann::json::exception& e) {
      throw Error(concat("description registry '", path, "': ", e.what()));
    }
  }

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["format_version"] = kFormatVersion;
    j["descriptions"] = nlohmann::json::object();
    for (const auto& [k, e] : entries_)
      j["descriptions"][k] = {{"text", e.text}, {"origin", e.origin}};
    return j;
  }

  void set(const std::string& key, Entry e) { entries_[key] = std::move(e); }
  void erase(const std::string& key) { entries_.erase(key); }

  const Entry* find(const std::string& key) const {
    auto it = entries_.find(key);
    return it == entries_.end() ? nullptr : &it->second;
  }
  std::size_t size() const { return entries_.size(); }
  const std::map<std::string, Entry>& entries() const { return entries_; }

  /// Keys of the taxonomy that have no entry.
  std::vector<std::string> missing(const DomainTaxonomy& tax) const {
    std::vector<std::string> out;
    for (std::size_t s = 0; s < tax.shifts().size(); ++s)
      for (std::size_t d = 0; d < tax.shift(s).domains.size(); ++d)
        if (!find(tax.path({s, d}))) out.push_back(tax.path({s, d}));
    return out;
  }

 private:
  std::map<std::string, Entry> entries_;
};

/// Where each shift's domain name goes in the sentence. Groups are emitted in
/// order as "<connective> <name> <name>..."; a group with no labeled slot is
/// dropped together with its connective.
struct PromptTemplate {
  struct Group {
    std::string connective;
    std::vector<std::string> shifts;
  };
  std::vector<Group> groups;

  /// "in {weather} {season} {time} from {view} with {occlusion}"
  static PromptTemplate standard() {
    return {{{"in", {"weathers", "seasons", "time"}},
             {"from", {"views"}},
             {"with", {"occlusion"}}}};
  }

  /// Shift indices per group for a given taxonomy. Shifts the template does
  /// not mention are appended as trailing "in" groups in declaration order.
  std::vector<std::pair<std::string, std::vector<std::size_t>>> bind(
      const DomainTaxonomy& tax) const {
    std::vector<std::pair<std::string, std::vector<std::size_t>>> out;
    std::set<std::size_t> used;
    for (const auto& g : groups) {
      std::vector<std::size_t> idx;
      for (const auto& name : g.shifts)
        if (auto s = tax.find_shift(name); s && used.insert(*s).second)
          idx.push_back(*s);
      out.emplace_back(g.connective, std::move(idx));
    }
    for (std::size_t s = 0; s < tax.shifts().size(); ++s)
      if (!used.count(s)) out.push_back({"in", {s}});
    return out;
  }
};

/// Composes prompts against one taxonomy and description registry.
class PromptComposer {
 public:
  PromptComposer(const DomainTaxonomy& tax, DescriptionRegistry registry,
                 PromptTemplate tmpl = PromptTemplate::standard())
      : tax_(&tax), registry_(std::move(registry)), bound_(tmpl.bind(tax)) {}

  explicit PromptComposer(const DomainTaxonomy& tax)
      : PromptComposer(tax, DescriptionRegistry::from_taxonomy(tax)) {}

  const DomainTaxonomy& taxonomy() const { return *tax_; }
  const DescriptionRegistry& registry() const { return registry_; }

  PromptSpec baseline(const std::string& class_name) const {
    check_class(class_name);
    PromptSpec p;
    p.mode = PromptMode::baseline;
    p.class_name = class_name;
    p.text = std::string(kPromptPrefix) + " " + class_name;
    return p;
  }

  PromptSpec domain(const std::string& class_name,
                    const DomainCombination& c) const {
    check_class(class_name);
    tax_->check_shape(c);
    PromptSpec p;
    p.mode = PromptMode::domain;
    p.class_name = class_name;
    p.combination = c;
    const auto body = name_part(c);
    if (body.empty()) return fallback(std::move(p));
    p.text = std::string(kPromptPrefix) + " " + class_name + body + ".";
    return p;
  }

  PromptSpec domain_plus(const std::string& class_name,
                         const DomainCombination& c) const {
    check_class(class_name);
    tax_->check_shape(c);
    PromptSpec p;
    p.mode = PromptMode::domain_plus;
    p.class_name = class_name;
    p.combination = c;
    const auto body = name_part(c);
    if (body.empty()) return fallback(std::move(p));
    std::string text = std::string(kPromptPrefix) + " " + class_name + body;
    for (const auto& [conn, shifts] : bound_)
      for (auto s : shifts) {
        if (!c[s]) continue;
        const auto key = tax_->path({s, *c[s]});
        const auto* e = registry_.find(key);
        if (!e)
          throw Error(concat("missing description for (", tax_->shift(s).name,
                             ", ", tax_->domain({s, *c[s]}).name, ")"));
        text += ", " + e->text;
      }
    p.text = text + ".";
    return p;
  }

  PromptSpec compose(PromptMode mode, const std::string& class_name,
                     const std::optional<DomainCombination>& c) const {
    if (mode == PromptMode::baseline) return baseline(class_name);
    if (!c) throw Error(concat(to_string(mode), " mode requires a combination"));
    return mode == PromptMode::domain ? domain(class_name, *c)
                                      : domain_plus(class_name, *c);
  }

  /// One prompt per class, in the given class order.
  std::vector<PromptSpec> matrix(const std::vector<std::string>& classes,
                                 const std::optional<DomainCombination>& c,
                                 PromptMode mode) const {
    if (classes.empty()) throw Error("prompt matrix needs at least one class");
    std::set<std::string> seen;
    for (const auto& cls : classes)
      if (!seen.insert(cls).second)
        throw Error(concat("duplicate class name '", cls, "'"));
    std::vector<PromptSpec> out;
    out.reserve(classes.size());
    for (const auto& cls : classes) out.push_back(compose(mode, cls, c));
    return out;
  }

 private:
  static void check_class(const std::string& class_name) {
    if (class_name.empty()) throw Error("class name must be non-empty");
  }

  PromptSpec fallback(PromptSpec p) const {
    p.text = std::string(kPromptPrefix) + " " + p.class_name;
    p.fell_back = true;
    return p;
  }

  std::string name_part(const DomainCombination& c) const {
    std::string out;
    for (const auto& [conn, shifts] : bound_) {
      std::string group;
      for (auto s : shifts)
        if (c[s]) group += " " + tax_->domain({s, *c[s]}).name;
      if (!group.empty()) out += " " + conn + group;
    }
    return out;
  }

  const DomainTaxonomy* tax_;
  DescriptionRegistry registry_;
  std::vector<std::pair<std::string, std::vector<std::size_t>>> bound_;
};

}  // namespace shiftbench
