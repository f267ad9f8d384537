#pragma once

// Hierarchical domain taxonomy: shifts -> domains, pairwise cross-shift
// exclusions, and enumeration/validation of fine-grained combinations.

#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "common.hpp"

namespace shiftbench {

struct Domain {
  std::string name;
  std::string description;
};

struct DomainShift {
  std::string name;
  std::vector<Domain> domains;

  std::optional<std::size_t> find(std::string_view domain) const {
    for (std::size_t i = 0; i < domains.size(); ++i)
      if (domains[i].name == domain) return i;
    return std::nullopt;
  }
};

/// (shift index, domain index) within one taxonomy.
struct DomainRef {
  std::size_t shift = 0;
  std::size_t domain = 0;
  auto operator<=>(const DomainRef&) const = default;
};

/// Two domains of different shifts that may never co-occur. Symmetric.
struct ExclusionConstraint {
  DomainRef a;
  DomainRef b;

  bool involves(DomainRef x, DomainRef y) const {
    return (a == x && b == y) || (a == y && b == x);
  }
};

/// One optional domain per shift, indexed by shift declaration order.
/// Generated samples are complete; imported ones may leave shifts unlabeled.
class DomainCombination {
 public:
  DomainCombination() = default;
  explicit DomainCombination(std::size_t shift_count) : slots_(shift_count) {}
  explicit DomainCombination(std::vector<std::optional<std::size_t>> slots)
      : slots_(std::move(slots)) {}

  std::size_t size() const { return slots_.size(); }
  const std::optional<std::size_t>& operator[](std::size_t shift) const {
    return slots_.at(shift);
  }
  std::optional<std::size_t>& operator[](std::size_t shift) {
    return slots_.at(shift);
  }
  const std::vector<std::optional<std::size_t>>& slots() const {
    return slots_;
  }

  bool complete() const {
    for (const auto& s : slots_)
      if (!s) return false;
    return true;
  }
  std::size_t labeled_count() const {
    std::size_t n = 0;
    for (const auto& s : slots_) n += s.has_value();
    return n;
  }

  bool operator==(const DomainCombination&) const = default;
  auto operator<=>(const DomainCombination&) const = default;

 private:
  std::vector<std::optional<std::size_t>> slots_;
};

struct Verdict {
  bool valid = false;
  std::string reason;
  std::optional<ExclusionConstraint> violated;

  explicit operator bool() const { return valid; }
};

class DomainTaxonomy {
 public:
  DomainTaxonomy() = default;
  DomainTaxonomy(std::vector<DomainShift> shifts,
                 std::vector<ExclusionConstraint> exclusions)
      : shifts_(std::move(shifts)), exclusions_(std::move(exclusions)) {}

  const std::vector<DomainShift>& shifts() const { return shifts_; }
  const std::vector<ExclusionConstraint>& exclusions() const {
    return exclusions_;
  }
  const DomainShift& shift(std::size_t i) const { return shifts_.at(i); }

  std::size_t domain_count() const {
    std::size_t n = 0;
    for (const auto& s : shifts_) n += s.domains.size();
    return n;
  }

  /// Product of per-shift domain counts, ignoring exclusions.
  std::size_t unconstrained_count() const {
    std::size_t n = shifts_.empty() ? 0 : 1;
    for (const auto& s : shifts_) n *= s.domains.size();
    return n;
  }

  std::optional<std::size_t> find_shift(std::string_view name) const {
    for (std::size_t i = 0; i < shifts_.size(); ++i)
      if (shifts_[i].name == name) return i;
    return std::nullopt;
  }

  /// Resolves "shift.domain". Domain names may themselves contain dots only
  /// if the shift name does not; the first dot splits.
  DomainRef resolve(std::string_view path) const {
    const auto dot = path.find('.');
    if (dot == std::string_view::npos)
      throw Error(concat("malformed domain path '", path,
                         "' (expected shift.domain)"));
    return resolve(path.substr(0, dot), path.substr(dot + 1));
  }

  DomainRef resolve(std::string_view shift_name,
                    std::string_view domain_name) const {
    const auto s = find_shift(shift_name);
    if (!s) throw Error(concat("unknown shift '", shift_name, "'"));
    const auto d = shifts_[*s].find(domain_name);
    if (!d)
      throw Error(concat("unknown domain '", domain_name, "' in shift '",
                         shift_name, "'"));
    return {*s, *d};
  }

  const Domain& domain(DomainRef r) const {
    return shifts_.at(r.shift).domains.at(r.domain);
  }
  std::string path(DomainRef r) const {
    return shifts_.at(r.shift).name + "." + domain(r).name;
  }

  /// Builds a (possibly partial) combination from shift-name -> domain-name
  /// pairs. Throws on unknown shift or domain.
  DomainCombination combination(
      const std::map<std::string, std::string>& assignment) const {
    DomainCombination c(shifts_.size());
    for (const auto& [shift_name, domain_name] : assignment) {
      const auto r = resolve(shift_name, domain_name);
      c[r.shift] = r.domain;
    }
    return c;
  }

  /// Shift-name -> domain-name view of the labeled slots.
  std::map<std::string, std::string> names(const DomainCombination& c) const {
    check_shape(c);
    std::map<std::string, std::string> out;
    for (std::size_t s = 0; s < c.size(); ++s)
      if (c[s]) out[shifts_[s].name] = domain({s, *c[s]}).name;
    return out;
  }

  /// Path-safe identifier: labeled domain names in shift order joined by
  /// "__", spaces replaced with '-'. Unlabeled shifts render as "any".
  std::string slug(const DomainCombination& c) const {
    check_shape(c);
    std::vector<std::string> parts;
    for (std::size_t s = 0; s < c.size(); ++s) {
      std::string name = c[s] ? domain({s, *c[s]}).name : std::string("any");
      for (auto& ch : name)
        if (ch == ' ' || ch == '/') ch = '-';
      parts.push_back(std::move(name));
    }
    return join(parts, "__");
  }

  /// Human-readable "clear/front/day/winter/no occlusion" form.
  std::string label(const DomainCombination& c) const {
    check_shape(c);
    std::vector<std::string> parts;
    for (std::size_t s = 0; s < c.size(); ++s)
      parts.push_back(c[s] ? domain({s, *c[s]}).name : std::string("?"));
    return join(parts, "/");
  }

  /// Throws if the combination does not match this taxonomy's shape or
  /// carries an out-of-range domain index.
  void check_shape(const DomainCombination& c) const {
    if (c.size() != shifts_.size())
      throw Error(concat("combination has ", c.size(), " slots, taxonomy has ",
                         shifts_.size(), " shifts"));
    for (std::size_t s = 0; s < c.size(); ++s)
      if (c[s] && *c[s] >= shifts_[s].domains.size())
        throw Error(concat("unknown domain index ", *c[s], " in shift '",
                           shifts_[s].name, "'"));
  }

  /// First exclusion violated among the labeled slots, if any.
  std::optional<ExclusionConstraint> violated_exclusion(
      const DomainCombination& c) const {
    for (const auto& e : exclusions_) {
      const auto& x = c[e.a.shift];
      const auto& y = c[e.b.shift];
      if (x && y && *x == e.a.domain && *y == e.b.domain) return e;
    }
    return std::nullopt;
  }

  /// Stable fingerprint of the labeling structure (shift and domain names in
  /// order plus exclusions). Descriptions are excluded so editing prose does
  /// not invalidate manifests.
  std::string hash() const {
    std::string canon;
    for (const auto& s : shifts_) {
      canon += "S:" + s.name + "\n";
      for (const auto& d : s.domains) canon += "D:" + d.name + "\n";
    }
    for (const auto& e : exclusions_)
      canon += "X:" + path(e.a) + "|" + path(e.b) + "\n";
    return hex64(fnv1a64(canon));
  }

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["format_version"] = kFormatVersion;
    j["shifts"] = nlohmann::json::array();
    for (const auto& s : shifts_) {
      nlohmann::json js;
      js["name"] = s.name;
      js["domains"] = nlohmann::json::array();
      for (const auto& d : s.domains)
        js["domains"].push_back({{"name", d.name}, {"description", d.description}});
      j["shifts"].push_back(std::move(js));
    }
    j["exclusions"] = nlohmann::json::array();
    for (const auto& e : exclusions_)
      j["exclusions"].push_back({path(e.a), path(e.b)});
    return j;
  }

 private:
  std::vector<DomainShift> shifts_;
  std::vector<ExclusionConstraint> exclusions_;
};

/// Validates and builds a taxonomy from its config document.
///
/// Schema:
///   { "format_version": 1,
///     "shifts": [ { "name": "weathers",
///                   "domains": [ { "name": "clear", "description": "..." } ] } ],
///     "exclusions": [ [ "weathers.snowy", "seasons.autumn" ] ] }
inline DomainTaxonomy load_taxonomy(const nlohmann::json& doc) {
  if (!doc.is_object()) throw Error("taxonomy config must be an object");
  if (doc.contains("format_version") &&
      doc.at("format_version").get<int>() != kFormatVersion)
    throw Error(concat("unsupported taxonomy format_version ",
                       doc.at("format_version").dump()));
  if (!doc.contains("shifts") || !doc.at("shifts").is_array())
    throw Error("taxonomy config needs a 'shifts' array");

  std::vector<DomainShift> shifts;
  std::set<std::string> shift_names;
  for (const auto& js : doc.at("shifts")) {
    DomainShift s;
    s.name = js.at("name").get<std::string>();
    if (s.name.empty()) throw Error("shift with empty name");
    if (s.name.find('.') != std::string::npos)
      throw Error(concat("shift name '", s.name, "' must not contain '.'"));
    if (!shift_names.insert(s.name).second)
      throw Error(concat("duplicate shift id '", s.name, "'"));
    std::set<std::string> domain_names;
    for (const auto& jd : js.at("domains")) {
      Domain d;
      if (jd.is_string()) {
        d.name = jd.get<std::string>();
      } else {
        d.name = jd.at("name").get<std::string>();
        d.description = jd.value("description", std::string{});
      }
      if (d.name.empty())
        throw Error(concat("empty domain name in shift '", s.name, "'"));
      if (!domain_names.insert(d.name).second)
        throw Error(concat("duplicate domain id '", d.name, "' in shift '",
                           s.name, "'"));
      s.domains.push_back(std::move(d));
    }
    if (s.domains.size() < 2)
      throw Error(concat("shift '", s.name, "' needs >=2 domains, has ",
                         s.domains.size()));
    shifts.push_back(std::move(s));
  }
  if (shifts.empty()) throw Error("taxonomy needs at least one shift");

  DomainTaxonomy partial(shifts, {});
  std::vector<ExclusionConstraint> exclusions;
  if (doc.contains("exclusions")) {
    for (const auto& je : doc.at("exclusions")) {
      if (!je.is_array() || je.size() != 2)
        throw Error("each exclusion must be a pair of shift.domain paths");
      DomainRef a, b;
      for (int k = 0; k < 2; ++k) {
        const auto p = je.at(static_cast<std::size_t>(k)).get<std::string>();
        try {
          (k == 0 ? a : b) = partial.resolve(p);
        } catch (const Error& e) {
          throw Error(concat("exclusion references unknown domain '", p,
                             "': ", e.what()));
        }
      }
      if (a.shift == b.shift)
        throw Error(concat("exclusion ", partial.path(a), " / ",
                           partial.path(b), " must span two shifts"));
      exclusions.push_back({a, b});
    }
  }
  return DomainTaxonomy(std::move(shifts), std::move(exclusions));
}

inline DomainTaxonomy load_taxonomy_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(concat("cannot open taxonomy config '", path, "'"));
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(concat("taxonomy config '", path, "' does not parse: ",
                       e.what()));
  }
  return load_taxonomy(doc);
}

/// Built-in taxonomy: weathers(5), views(3), time(2), seasons(3),
/// occlusion(5); snowy only in winter.
inline const char* default_taxonomy_json() {
  return R"json({
  "format_version": 1,
  "shifts": [
    { "name": "weathers", "domains": [
      { "name": "clear", "description": "sky is blue and unobstructed with bright and vibrant colors" },
      { "name": "sandstorm", "description": "hazy orange-brown air filled with blowing sand and low visibility" },
      { "name": "foggy", "description": "dense gray-white mist softening edges and hiding distant objects" },
      { "name": "rainy", "description": "falling rain streaks, overcast gray sky and wet dark surfaces" },
      { "name": "snowy", "description": "falling snowflakes and white snow covering the ground" } ] },
    { "name": "views", "domains": [
      { "name": "front", "description": "showing the object or scene from the front" },
      { "name": "side", "description": "showing the object or scene from the left side" },
      { "name": "top", "description": "showing the object or scene from directly above" } ] },
    { "name": "time", "domains": [
      { "name": "day", "description": "bright and clear visibility, lots of sunlight" },
      { "name": "night", "description": "dark surroundings with dim bluish light and low contrast" } ] },
    { "name": "seasons", "domains": [
      { "name": "spring-summer", "description": "lush green grass and leaves under warm sunlight" },
      { "name": "autumn", "description": "warm tones, crisp light, and leaves changing color" },
      { "name": "winter", "description": "cold pale tones, bare trees and frosted ground" } ] },
    { "name": "occlusion", "domains": [
      { "name": "no occlusion", "description": "the whole object is visible without any occlusion" },
      { "name": "light occlusion", "description": "about 0 percent to 20 percent object are occluded" },
      { "name": "partial occlusion", "description": "about 20 percent to 40 percent object are occluded" },
      { "name": "moderate occlusion", "description": "about 40 percent to 60 percent object are occluded" },
      { "name": "heavy occlusion", "description": "about 60 percent to 80 percent object are occluded" } ] }
  ],
  "exclusions": [
    [ "weathers.snowy", "seasons.spring-summer" ],
    [ "weathers.snowy", "seasons.autumn" ]
  ]
})json";
}

inline const DomainTaxonomy& default_taxonomy() {
  static const DomainTaxonomy tax =
      load_taxonomy(nlohmann::json::parse(default_taxonomy_json()));
  return tax;
}

/// All complete combinations satisfying every exclusion, in lexicographic
/// order of (shift declaration order, domain declaration order).
inline std::vector<DomainCombination> enumerate_combinations(
    const DomainTaxonomy& tax) {
  std::vector<DomainCombination> out;
  const std::size_t n = tax.shifts().size();
  if (n == 0) return out;
  DomainCombination cur(n);

  // Exclusions indexed by the later of their two shifts, so each can be
  // checked as soon as both ends are assigned.
  std::vector<std::vector<ExclusionConstraint>> by_last(n);
  for (const auto& e : tax.exclusions())
    by_last[std::max(e.a.shift, e.b.shift)].push_back(e);

  auto ok_at = [&](std::size_t s) {
    for (const auto& e : by_last[s])
      if (*cur[e.a.shift] == e.a.domain && *cur[e.b.shift] == e.b.domain)
        return false;
    return true;
  };

  auto recurse = [&](auto&& self, std::size_t s) -> void {
    if (s == n) {
      out.push_back(cur);
      return;
    }
    for (std::size_t d = 0; d < tax.shift(s).domains.size(); ++d) {
      cur[s] = d;
      if (ok_at(s)) self(self, s + 1);
    }
    cur[s].reset();
  };
  recurse(recurse, 0);
  return out;
}

/// Valid iff every shift carries exactly one known domain and no exclusion is
/// violated. Unknown ids (shape mismatch, out-of-range index) throw.
inline Verdict validate_combination(const DomainTaxonomy& tax,
                                    const DomainCombination& c) {
  tax.check_shape(c);
  if (!c.complete()) {
    std::vector<std::string> missing;
    for (std::size_t s = 0; s < c.size(); ++s)
      if (!c[s]) missing.push_back(tax.shift(s).name);
    return {false, "incomplete assignment (missing " + join(missing, ", ") + ")",
            std::nullopt};
  }
  if (auto e = tax.violated_exclusion(c))
    return {false,
            "violates exclusion " + tax.path(e->a) + " / " + tax.path(e->b), e};
  return {true, {}, std::nullopt};
}

/// The coarse-domain labels a (valid, complete) combination counts toward,
/// one per shift.
inline std::vector<DomainRef> coarse_domain_membership(
    const DomainTaxonomy& tax, const DomainCombination& c) {
  const auto v = validate_combination(tax, c);
  if (!v) throw Error("invalid combination: " + v.reason);
  std::vector<DomainRef> out;
  for (std::size_t s = 0; s < c.size(); ++s) out.push_back({s, *c[s]});
  return out;
}

/// Memberships of the labeled slots only; used for imported partial labels.
/// Throws if the labeled part already violates an exclusion.
inline std::vector<DomainRef> labeled_membership(const DomainTaxonomy& tax,
                                                 const DomainCombination& c) {
  tax.check_shape(c);
  if (auto e = tax.violated_exclusion(c))
    throw Error("invalid combination: violates exclusion " + tax.path(e->a) +
                " / " + tax.path(e->b));
  std::vector<DomainRef> out;
  for (std::size_t s = 0; s < c.size(); ++s)
    if (c[s]) out.push_back({s, *c[s]});
  return out;
}

}  // namespace shiftbench
