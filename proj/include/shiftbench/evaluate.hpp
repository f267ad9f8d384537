#pragma once

// Tuning-free evaluation over a manifest and report aggregation.
//
// Aggregation is sample-weighted throughout: a coarse domain's accuracy is the
// sum of correct predictions over every fine-grained combination containing it
// divided by the sum of their sample counts.

#include <cstdio>
#include <iomanip>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "backend.hpp"
#include "classify.hpp"
#include "common.hpp"
#include "manifest.hpp"
#include "promptkit.hpp"
#include "taxonomy.hpp"

namespace shiftbench {

struct Tally {
  std::size_t correct = 0;
  std::size_t total = 0;

  std::optional<double> accuracy() const {
    if (total == 0) return std::nullopt;
    return static_cast<double>(correct) / static_cast<double>(total);
  }
  Tally& operator+=(const Tally& o) {
    correct += o.correct;
    total += o.total;
    return *this;
  }
  bool operator==(const Tally&) const = default;
};

struct CoarseRow {
  std::string shift;
  std::string domain;
  Tally tally;
};

struct EvalMetadata {
  std::string backend_id;
  std::string model_id;
  std::string prompt_mode;
  std::string taxonomy_hash;
  std::string manifest_hash;
  std::size_t embedding_dim = 0;
  std::size_t text_encodings = 0;
  std::size_t top_k = 1;
};

struct EvalReport {
  EvalMetadata metadata;
  std::vector<std::string> classes;
  /// Keyed by combination label ("clear/front/day/winter/no occlusion").
  std::map<std::string, Tally> per_combination;
  /// Every domain of the taxonomy, in declaration order.
  std::vector<CoarseRow> per_coarse;
  Tally overall;
  Tally top_k;

  /// Unweighted mean over coarse domains that have samples.
  std::optional<double> domain_mean() const {
    double s = 0;
    std::size_t n = 0;
    for (const auto& r : per_coarse)
      if (auto a = r.tally.accuracy()) {
        s += *a;
        ++n;
      }
    if (n == 0) return std::nullopt;
    return s / static_cast<double>(n);
  }

  const CoarseRow* coarse(std::string_view shift, std::string_view domain) const {
    for (const auto& r : per_coarse)
      if (r.shift == shift && r.domain == domain) return &r;
    return nullptr;
  }
};

struct EvalOptions {
  PromptMode mode = PromptMode::domain;
  std::size_t batch_size = 32;
  bool cache_text = true;
  std::size_t top_k = 5;
};

namespace detail {

inline nlohmann::json acc_json(const std::optional<double>& a) {
  return a ? nlohmann::json(*a) : nlohmann::json(nullptr);
}

inline nlohmann::json tally_json(const Tally& t) {
  return {{"correct", t.correct}, {"total", t.total}, {"accuracy", acc_json(t.accuracy())}};
}

inline Tally tally_from(const nlohmann::json& j) {
  return {j.at("correct").get<std::size_t>(), j.at("total").get<std::size_t>()};
}

}  // namespace detail

/// Builds an empty report skeleton (every coarse domain at 0/0).
inline EvalReport empty_report(const DomainTaxonomy& tax) {
  EvalReport r;
  for (const auto& s : tax.shifts())
    for (const auto& d : s.domains) r.per_coarse.push_back({s.name, d.name, {}});
  r.metadata.taxonomy_hash = tax.hash();
  return r;
}

/// Adds one classified sample to the report.
inline void tally_sample(EvalReport& report, const DomainTaxonomy& tax,
                         const DomainCombination& c, bool correct, bool top_k_hit) {
  const Tally one{correct ? 1u : 0u, 1u};
  report.per_combination[tax.label(c)] += one;
  std::size_t row = 0;
  for (std::size_t s = 0; s < tax.shifts().size(); ++s) {
    if (c[s]) report.per_coarse[row + *c[s]].tally += one;
    row += tax.shift(s).domains.size();
  }
  report.overall += one;
  report.top_k += Tally{top_k_hit ? 1u : 0u, 1u};
}

/// Classifies every record and aggregates. Text embeddings are cached by
/// prompt text, so at most |combinations| x |classes| prompts are encoded
/// per mode.
inline EvalReport evaluate(const Manifest& manifest, const DomainTaxonomy& tax,
                           const PromptComposer& composer, EmbeddingBackend& backend,
                           const EvalOptions& opt = {}) {
  if (manifest.header.taxonomy_hash != tax.hash())
    throw Error(concat("manifest/taxonomy mismatch: manifest built with taxonomy ",
                       manifest.header.taxonomy_hash, ", evaluating with ", tax.hash()));
  const auto& classes = manifest.header.classes;
  if (classes.size() < 2) throw Error("evaluation needs at least 2 classes in the manifest header");
  std::unordered_map<std::string, std::size_t> class_index;
  for (std::size_t i = 0; i < classes.size(); ++i) class_index[classes[i]] = i;

  const auto hs = backend.hello();
  if (!hs.text || !hs.image) throw Error("backend lacks text or image capability");

  EvalReport report = empty_report(tax);
  report.classes = classes;
  report.metadata.backend_id = backend.id();
  report.metadata.model_id = hs.model_id;
  report.metadata.prompt_mode = to_string(opt.mode);
  report.metadata.manifest_hash = manifest_hash(manifest);
  report.metadata.embedding_dim = hs.embedding_dim;
  report.metadata.top_k = opt.top_k;

  std::unordered_map<std::string, EmbeddingVector> text_cache;
  std::size_t encodings = 0;
  auto text_embeddings = [&](const DomainCombination& c) {
    const auto prompts = composer.matrix(classes, c, opt.mode);
    std::vector<TextQuery> missing;
    for (const auto& p : prompts)
      if (!opt.cache_text || !text_cache.count(p.text)) missing.push_back({p.text, p.class_name});
    std::unordered_map<std::string, EmbeddingVector> fresh;
    if (!missing.empty()) {
      auto vecs = backend.embed_texts(missing);
      if (vecs.size() != missing.size()) throw Error("backend returned wrong number of text vectors");
      encodings += missing.size();
      for (std::size_t i = 0; i < missing.size(); ++i) fresh[missing[i].text] = std::move(vecs[i]);
    }
    std::vector<EmbeddingVector> out;
    for (const auto& p : prompts) {
      auto it = fresh.find(p.text);
      if (it != fresh.end()) {
        out.push_back(it->second);
        if (opt.cache_text) text_cache[p.text] = it->second;
      } else {
        out.push_back(text_cache.at(p.text));
      }
    }
    return out;
  };

  std::map<std::string, std::vector<EmbeddingVector>> per_combo_texts;
  const auto& recs = manifest.records;
  for (std::size_t start = 0; start < recs.size(); start += std::max<std::size_t>(1, opt.batch_size)) {
    const std::size_t end = std::min(recs.size(), start + std::max<std::size_t>(1, opt.batch_size));
    std::vector<DomainCombination> combos;
    std::vector<ImageQuery> queries;
    for (std::size_t i = start; i < end; ++i) {
      const auto& r = recs[i];
      try {
        auto c = tax.combination(r.combination);
        labeled_membership(tax, c);
        combos.push_back(std::move(c));
      } catch (const Error& e) {
        throw Error(concat("sample '", r.sample_id, "': manifest/taxonomy mismatch: ", e.what()));
      }
      // absolute, so an external backend need not share our working directory
      const auto path = std::filesystem::absolute(manifest.resolve(r.image_path)).lexically_normal();
      queries.push_back({path.string(), r.sample_id, r.category, r.seed});
    }
    std::vector<EmbeddingVector> images;
    try {
      images = backend.embed_images(queries);
      if (images.size() != queries.size()) throw Error("backend returned wrong number of image vectors");
    } catch (const Error& batch_error) {
      // find the offending sample
      for (const auto& q : queries) {
        try {
          backend.embed_images(std::span<const ImageQuery>(&q, 1));
        } catch (const Error& e) {
          throw Error(concat("sample '", q.sample_id, "': ", e.what()));
        }
      }
      throw Error(concat("samples ", recs[start].sample_id, "..: ", batch_error.what()));
    }
    for (std::size_t k = 0; k < queries.size(); ++k) {
      const auto& r = recs[start + k];
      const auto& c = combos[k];
      const auto key = tax.label(c);
      std::vector<EmbeddingVector>* texts;
      if (opt.cache_text) {
        auto it = per_combo_texts.find(key);
        if (it == per_combo_texts.end()) it = per_combo_texts.emplace(key, text_embeddings(c)).first;
        texts = &it->second;
      } else {
        per_combo_texts[key] = text_embeddings(c);
        texts = &per_combo_texts[key];
      }
      ClassScores scores;
      try {
        scores = classify(images[k], *texts);
      } catch (const Error& e) {
        throw Error(concat("sample '", r.sample_id, "': ", e.what()));
      }
      const auto truth = class_index.at(r.category);
      tally_sample(report, tax, c, scores.predicted == truth, scores.in_top_k(truth, opt.top_k));
    }
  }
  report.metadata.text_encodings = encodings;
  return report;
}

inline nlohmann::json to_json(const EvalReport& r) {
  nlohmann::json j;
  j["format_version"] = kFormatVersion;
  j["kind"] = "eval_report";
  const auto& m = r.metadata;
  j["metadata"] = {{"backend_id", m.backend_id}, {"model_id", m.model_id},
                   {"prompt_mode", m.prompt_mode}, {"taxonomy_hash", m.taxonomy_hash},
                   {"manifest_hash", m.manifest_hash}, {"embedding_dim", m.embedding_dim},
                   {"text_encodings", m.text_encodings}, {"top_k", m.top_k}};
  j["classes"] = r.classes;
  j["overall"] = detail::tally_json(r.overall);
  j["top_k"] = detail::tally_json(r.top_k);
  j["coarse"] = nlohmann::json::array();
  for (const auto& row : r.per_coarse) {
    auto t = detail::tally_json(row.tally);
    t["shift"] = row.shift;
    t["domain"] = row.domain;
    j["coarse"].push_back(std::move(t));
  }
  j["combinations"] = nlohmann::json::array();
  for (const auto& [label, t] : r.per_combination) {
    auto tj = detail::tally_json(t);
    tj["combination"] = label;
    j["combinations"].push_back(std::move(tj));
  }
  j["averages"] = {{"domain_mean", detail::acc_json(r.domain_mean())},
                   {"sample_weighted", detail::acc_json(r.overall.accuracy())}};
  return j;
}

inline EvalReport report_from_json(const nlohmann::json& j) {
  if (j.value("kind", std::string{}) != "eval_report") throw Error("not an eval report");
  if (j.at("format_version").get<int>() != kFormatVersion) throw Error("unsupported report format_version");
  EvalReport r;
  const auto& m = j.at("metadata");
  r.metadata.backend_id = m.at("backend_id").get<std::string>();
  r.metadata.model_id = m.at("model_id").get<std::string>();
  r.metadata.prompt_mode = m.at("prompt_mode").get<std::string>();
  r.metadata.taxonomy_hash = m.at("taxonomy_hash").get<std::string>();
  r.metadata.manifest_hash = m.at("manifest_hash").get<std::string>();
  r.metadata.embedding_dim = m.value("embedding_dim", std::size_t{0});
  r.metadata.text_encodings = m.value("text_encodings", std::size_t{0});
  r.metadata.top_k = m.value("top_k", std::size_t{1});
  r.classes = j.at("classes").get<std::vector<std::string>>();
  r.overall = detail::tally_from(j.at("overall"));
  if (j.contains("top_k")) r.top_k = detail::tally_from(j.at("top_k"));
  for (const auto& row : j.at("coarse"))
    r.per_coarse.push_back({row.at("shift").get<std::string>(), row.at("domain").get<std::string>(),
                            detail::tally_from(row)});
  for (const auto& c : j.at("combinations"))
    r.per_combination[c.at("combination").get<std::string>()] = detail::tally_from(c);
  return r;
}

inline EvalReport load_report(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(concat("cannot open report '", path, "'"));
  try {
    return report_from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::exception& e) {
    throw Error(concat("report '", path, "': ", e.what()));
  }
}

namespace detail {

inline std::string pct(const std::optional<double>& a) {
  if (!a) return "-";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", *a * 100.0);
  return buf;
}

inline std::string signed_pct(const std::optional<double>& a) {
  if (!a) return "-";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%+.2f", *a * 100.0);
  return buf;
}

}  // namespace detail

/// Aligned text table: shift -> domain -> accuracy (percent).
inline std::string format_report(const EvalReport& r) {
  std::ostringstream os;
  os << "backend: " << r.metadata.backend_id << "   mode: " << r.metadata.prompt_mode
     << "   samples: " << r.overall.total << "\n";
  os << std::left << std::setw(12) << "Shift" << std::setw(22) << "Domain" << std::right
     << std::setw(10) << "Acc(%)" << std::setw(14) << "Correct/Total" << "\n";
  os << std::string(58, '-') << "\n";
  std::string last;
  for (const auto& row : r.per_coarse) {
    os << std::left << std::setw(12) << (row.shift == last ? "" : row.shift) << std::setw(22)
       << row.domain << std::right << std::setw(10) << detail::pct(row.tally.accuracy())
       << std::setw(14) << concat(row.tally.correct, "/", row.tally.total) << "\n";
    last = row.shift;
  }
  os << std::string(58, '-') << "\n";
  os << std::left << std::setw(34) << "Average (domain mean)" << std::right << std::setw(10)
     << detail::pct(r.domain_mean()) << "\n";
  os << std::left << std::setw(34) << "Overall (sample-weighted)" << std::right << std::setw(10)
     << detail::pct(r.overall.accuracy()) << std::setw(14)
     << concat(r.overall.correct, "/", r.overall.total) << "\n";
  if (r.metadata.top_k > 1)
    os << std::left << std::setw(34) << concat("Top-", r.metadata.top_k) << std::right
       << std::setw(10) << detail::pct(r.top_k.accuracy()) << "\n";
  return os.str();
}

struct DeltaRow {
  std::string shift, domain;
  std::optional<double> a, b;

  std::optional<double> delta() const {
    if (!a || !b) return std::nullopt;
    return *b - *a;
  }
};

struct ReportComparison {
  std::vector<DeltaRow> rows;
  DeltaRow domain_mean;
  DeltaRow sample_weighted;
};

/// Per-domain and average deltas (b - a). Both reports must come from the
/// same manifest and taxonomy.
inline ReportComparison compare_reports(const EvalReport& a, const EvalReport& b) {
  if (a.metadata.manifest_hash != b.metadata.manifest_hash)
    throw Error(concat("reports come from different manifests (", a.metadata.manifest_hash,
                       " vs ", b.metadata.manifest_hash, ")"));
  if (a.metadata.taxonomy_hash != b.metadata.taxonomy_hash)
    throw Error("reports come from different taxonomies");
  ReportComparison c;
  for (const auto& ra : a.per_coarse) {
    const auto* rb = b.coarse(ra.shift, ra.domain);
    if (!rb) throw Error(concat("domain ", ra.shift, ".", ra.domain, " missing from second report"));
    c.rows.push_back({ra.shift, ra.domain, ra.tally.accuracy(), rb->tally.accuracy()});
  }
  c.domain_mean = {"average", "domain mean", a.domain_mean(), b.domain_mean()};
  c.sample_weighted = {"average", "sample-weighted", a.overall.accuracy(), b.overall.accuracy()};
  return c;
}

inline nlohmann::json to_json(const ReportComparison& c) {
  auto row = [](const DeltaRow& r) {
    return nlohmann::json{{"shift", r.shift}, {"domain", r.domain}, {"a", detail::acc_json(r.a)},
                          {"b", detail::acc_json(r.b)}, {"delta", detail::acc_json(r.delta())}};
  };
  nlohmann::json j;
  j["format_version"] = kFormatVersion;
  j["kind"] = "report_comparison";
  j["rows"] = nlohmann::json::array();
  for (const auto& r : c.rows) j["rows"].push_back(row(r));
  j["domain_mean"] = row(c.domain_mean);
  j["sample_weighted"] = row(c.sample_weighted);
  return j;
}

inline std::string format_comparison(const ReportComparison& c) {
  std::ostringstream os;
  os << std::left << std::setw(12) << "Shift" << std::setw(22) << "Domain" << std::right
     << std::setw(9) << "A(%)" << std::setw(9) << "B(%)" << std::setw(9) << "Delta" << "\n";
  os << std::string(61, '-') << "\n";
  auto line = [&](const DeltaRow& r, bool show_shift) {
    os << std::left << std::setw(12) << (show_shift ? r.shift : "") << std::setw(22) << r.domain
       << std::right << std::setw(9) << detail::pct(r.a) << std::setw(9) << detail::pct(r.b)
       << std::setw(9) << detail::signed_pct(r.delta()) << "\n";
  };
  std::string last;
  for (const auto& r : c.rows) {
    line(r, r.shift != last);
    last = r.shift;
  }
  os << std::string(61, '-') << "\n";
  line(c.domain_mean, true);
  line(c.sample_weighted, false);
  return os.str();
}

}  // namespace shiftbench
