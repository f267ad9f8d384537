#include <gtest/gtest.h>

#include <map>

#include <shiftbench/evaluate.hpp>

using namespace shiftbench;

namespace {

const std::vector<std::string> kClasses = {"dog", "car", "bird", "cow"};

// Text vector of class i is e_i; an image's vector is e_j where j is the
// class it should be predicted as (scripted per sample id, default: truth).
class ScriptedBackend : public EmbeddingBackend {
 public:
  std::map<std::string, std::string> predict;
  std::string fail_on;
  std::size_t text_encodings = 0;

  BackendHandshake hello() override { return {1, kClasses.size(), "scripted", true, true, false}; }
  std::vector<EmbeddingVector> embed_texts(std::span<const TextQuery> q) override {
    std::vector<EmbeddingVector> out;
    for (const auto& t : q) {
      ++text_encodings;
      out.push_back(basis(t.class_name));
    }
    return out;
  }
  std::vector<EmbeddingVector> embed_images(std::span<const ImageQuery> q) override {
    std::vector<EmbeddingVector> out;
    for (const auto& im : q) {
      if (im.sample_id == fail_on) throw Error("decoder exploded");
      auto it = predict.find(im.sample_id);
      out.push_back(basis(it == predict.end() ? im.category : it->second));
    }
    return out;
  }
  std::string id() const override { return "scripted"; }

 private:
  static EmbeddingVector basis(const std::string& cls) {
    std::vector<double> v(kClasses.size(), 0.0);
    v[std::find(kClasses.begin(), kClasses.end(), cls) - kClasses.begin()] = 1.0;
    return {v};
  }
};

SampleRecord rec(const std::string& id, const std::string& cat,
                 std::map<std::string, std::string> comb) {
  SampleRecord r;
  r.sample_id = id;
  r.image_path = "images/" + id + ".png";
  r.category = cat;
  r.combination = std::move(comb);
  r.provenance = Provenance::imported;
  return r;
}

Manifest manifest(std::vector<SampleRecord> records) {
  Manifest m;
  m.header.taxonomy_hash = default_taxonomy().hash();
  m.header.classes = kClasses;
  m.records = std::move(records);
  return m;
}

const std::map<std::string, std::string> kA = {{"weathers", "clear"}, {"views", "front"},
                                               {"time", "day"}, {"seasons", "winter"},
                                               {"occlusion", "no occlusion"}};
const std::map<std::string, std::string> kB = {{"weathers", "rainy"}, {"views", "side"},
                                               {"time", "day"}, {"seasons", "autumn"},
                                               {"occlusion", "heavy occlusion"}};

// Combination A: 1 of 4 correct. Combination B: 4 of 4. Both are "day".
Manifest eight_records(ScriptedBackend& be) {
  std::vector<SampleRecord> r;
  const std::vector<std::string> cats = {"dog", "car", "bird", "cow"};
  for (int i = 0; i < 4; ++i) r.push_back(rec("A" + std::to_string(i), cats[i], kA));
  for (int i = 0; i < 4; ++i) r.push_back(rec("B" + std::to_string(i), cats[i], kB));
  be.predict["A1"] = "dog";
  be.predict["A2"] = "dog";
  be.predict["A3"] = "car";
  return manifest(r);
}

}  // namespace

TEST(Evaluate, EightRecordWeightedSummation) {
  ScriptedBackend be;
  const auto m = eight_records(be);
  const PromptComposer pc(default_taxonomy());
  const auto rep = evaluate(m, default_taxonomy(), pc, be);

  const auto* day = rep.coarse("time", "day");
  ASSERT_NE(day, nullptr);
  EXPECT_EQ(day->tally, (Tally{5, 8}));
  EXPECT_DOUBLE_EQ(*day->tally.accuracy(), 0.625);
  EXPECT_FALSE(rep.coarse("time", "night")->tally.accuracy().has_value());
  EXPECT_DOUBLE_EQ(*rep.coarse("weathers", "clear")->tally.accuracy(), 0.25);
  EXPECT_DOUBLE_EQ(*rep.coarse("weathers", "rainy")->tally.accuracy(), 1.0);

  // overall == per-combination sum == weighted mean within each shift
  EXPECT_EQ(rep.overall, (Tally{5, 8}));
  Tally combos;
  for (const auto& [k, t] : rep.per_combination) combos += t;
  EXPECT_EQ(combos, rep.overall);
  for (const auto& s : default_taxonomy().shifts()) {
    Tally shift_sum;
    for (const auto& row : rep.per_coarse)
      if (row.shift == s.name) shift_sum += row.tally;
    EXPECT_EQ(shift_sum, rep.overall) << s.name;
  }
  EXPECT_EQ(rep.per_combination.size(), 2u);
  EXPECT_EQ(rep.per_coarse.size(), 18u);
}

TEST(Evaluate, OracleMockIsPerfectInEveryMode) {
  std::vector<SampleRecord> r;
  std::size_t i = 0;
  for (const auto& c : enumerate_combinations(default_taxonomy())) {
    if (i % 7 == 0) r.push_back(rec("s" + std::to_string(i), kClasses[i % 4],
                                    default_taxonomy().names(c)));
    ++i;
  }
  const auto m = manifest(r);
  const PromptComposer pc(default_taxonomy());
  for (auto mode : {PromptMode::baseline, PromptMode::domain, PromptMode::domain_plus}) {
    MockBackend be(MockBackend::Mode::oracle);
    EvalOptions opt;
    opt.mode = mode;
    const auto rep = evaluate(m, default_taxonomy(), pc, be, opt);
    EXPECT_EQ(rep.overall.correct, m.records.size());
    EXPECT_DOUBLE_EQ(*rep.domain_mean(), 1.0);
  }
}

TEST(Evaluate, ConstantMockGivesTieBreakBaseRate) {
  std::vector<SampleRecord> r;
  const std::vector<std::string> cats = {"car", "dog", "dog", "bird", "cow", "dog", "car"};
  for (std::size_t i = 0; i < cats.size(); ++i) r.push_back(rec("c" + std::to_string(i), cats[i], kA));
  const auto m = manifest(r);
  const auto expected = static_cast<double>(std::count(cats.begin(), cats.end(), kClasses[0])) /
                        static_cast<double>(cats.size());
  MockBackend be(MockBackend::Mode::constant);
  const auto rep = evaluate(m, default_taxonomy(), PromptComposer(default_taxonomy()), be);
  EXPECT_DOUBLE_EQ(*rep.overall.accuracy(), expected);
}

TEST(Evaluate, CacheIsTransparentAndBounded) {
  std::vector<SampleRecord> r;
  const auto combos = enumerate_combinations(default_taxonomy());
  for (std::size_t i = 0; i < 60; ++i)
    r.push_back(rec("s" + std::to_string(i), kClasses[i % 4], default_taxonomy().names(combos[i % 9])));
  const auto m = manifest(r);
  const PromptComposer pc(default_taxonomy());
  EvalOptions on, off;
  on.mode = off.mode = PromptMode::domain_plus;
  off.cache_text = false;
  on.batch_size = 7;
  MockBackend b1(MockBackend::Mode::noise, 3), b2(MockBackend::Mode::noise, 3);
  const auto r_on = evaluate(m, default_taxonomy(), pc, b1, on);
  const auto r_off = evaluate(m, default_taxonomy(), pc, b2, off);
  EXPECT_EQ(r_on.per_combination, r_off.per_combination);
  EXPECT_EQ(r_on.overall, r_off.overall);
  EXPECT_EQ(r_on.metadata.text_encodings, 9u * 4u);
  EXPECT_EQ(b1.text_calls(), 9u * 4u);
  EXPECT_EQ(r_off.metadata.text_encodings, 60u * 4u);

  MockBackend b3(MockBackend::Mode::noise, 3);
  EvalOptions base;
  base.mode = PromptMode::baseline;
  EXPECT_EQ(evaluate(m, default_taxonomy(), pc, b3, base).metadata.text_encodings, 4u);
}

TEST(Evaluate, ResultIndependentOfBatching) {
  ScriptedBackend be;
  const auto m = eight_records(be);
  const PromptComposer pc(default_taxonomy());
  EvalOptions a, b;
  a.batch_size = 1;
  b.batch_size = 100;
  EXPECT_EQ(to_json(evaluate(m, default_taxonomy(), pc, be, a)),
            to_json(evaluate(m, default_taxonomy(), pc, be, b)));
}

TEST(Evaluate, Errors) {
  ScriptedBackend be;
  auto m = eight_records(be);
  const PromptComposer pc(default_taxonomy());

  auto wrong_hash = m;
  wrong_hash.header.taxonomy_hash = "0000000000000000";
  EXPECT_THROW(evaluate(wrong_hash, default_taxonomy(), pc, be), Error);

  auto unknown = m;
  unknown.records[5].combination["weathers"] = "hail";
  try {
    evaluate(unknown, default_taxonomy(), pc, be);
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("'B1'"), std::string::npos) << e.what();
  }

  be.fail_on = "A2";
  try {
    evaluate(m, default_taxonomy(), pc, be);
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("'A2'"), std::string::npos) << e.what();
    EXPECT_NE(std::string(e.what()).find("decoder exploded"), std::string::npos);
  }
}

TEST(Evaluate, PartialCombinationsCountOnlyLabeledShifts) {
  ScriptedBackend be;
  auto m = manifest({rec("p0", "dog", {{"weathers", "foggy"}}), rec("p1", "car", {{"weathers", "foggy"}})});
  be.predict["p1"] = "dog";
  const auto rep = evaluate(m, default_taxonomy(), PromptComposer(default_taxonomy()), be);
  EXPECT_EQ(rep.coarse("weathers", "foggy")->tally, (Tally{1, 2}));
  EXPECT_EQ(rep.coarse("time", "day")->tally, (Tally{0, 0}));
  EXPECT_EQ(rep.per_combination.at("foggy/?/?/?/?"), (Tally{1, 2}));
}

TEST(Report, JsonRoundTripAndTable) {
  ScriptedBackend be;
  const auto rep = evaluate(eight_records(be), default_taxonomy(), PromptComposer(default_taxonomy()), be);
  const auto j = to_json(rep);
  EXPECT_EQ(j["format_version"], 1);
  EXPECT_EQ(j["metadata"]["taxonomy_hash"], default_taxonomy().hash());
  EXPECT_EQ(j["metadata"]["backend_id"], "scripted");
  EXPECT_EQ(j["metadata"]["prompt_mode"], "domain");
  EXPECT_TRUE(j["coarse"][9]["accuracy"].is_null());  // time.night
  EXPECT_EQ(to_json(report_from_json(j)), j) << nlohmann::json::diff(j, to_json(report_from_json(j))).dump();
  const auto table = format_report(rep);
  EXPECT_NE(table.find("day"), std::string::npos);
  EXPECT_NE(table.find("62.50"), std::string::npos);
  EXPECT_NE(table.find("5/8"), std::string::npos);
}

TEST(Compare, IdenticalReportsHaveZeroDeltas) {
  ScriptedBackend be;
  const auto rep = evaluate(eight_records(be), default_taxonomy(), PromptComposer(default_taxonomy()), be);
  const auto c = compare_reports(rep, rep);
  for (const auto& row : c.rows)
    if (row.delta()) {
      EXPECT_EQ(*row.delta(), 0.0);
    }
  EXPECT_EQ(*c.domain_mean.delta(), 0.0);
  EXPECT_EQ(*c.sample_weighted.delta(), 0.0);
}

TEST(Compare, OracleBaselineVsDomainIsZero) {
  ScriptedBackend be;
  auto m = eight_records(be);
  be.predict.clear();
  const PromptComposer pc(default_taxonomy());
  EvalOptions base, dom;
  base.mode = PromptMode::baseline;
  const auto c = compare_reports(evaluate(m, default_taxonomy(), pc, be, base),
                                 evaluate(m, default_taxonomy(), pc, be, dom));
  EXPECT_EQ(*c.domain_mean.a, 1.0);
  EXPECT_EQ(*c.domain_mean.delta(), 0.0);
}

TEST(Compare, SyntheticAveragesGiveExpectedDelta) {
  auto make = [](std::size_t correct) {
    EvalReport r = empty_report(default_taxonomy());
    r.metadata.manifest_hash = "feedfacefeedface";
    for (auto& row : r.per_coarse) row.tally = {correct, 10000};
    r.overall = {correct, 10000};
    return r;
  };
  const auto c = compare_reports(make(4692), make(4881));
  EXPECT_NEAR(*c.domain_mean.a, 0.4692, 1e-12);
  EXPECT_NEAR(*c.domain_mean.b, 0.4881, 1e-12);
  EXPECT_NEAR(*c.domain_mean.delta(), 0.0189, 1e-12);
  EXPECT_NEAR(*c.sample_weighted.delta(), 0.0189, 1e-12);
  const auto text = format_comparison(c);
  EXPECT_NE(text.find("+1.89"), std::string::npos) << text;
  EXPECT_NEAR(to_json(c)["domain_mean"]["delta"].get<double>(), 0.0189, 1e-12);
}

TEST(Compare, DomainMeanAndSampleWeightedDiffer) {
  EvalReport r = empty_report(default_taxonomy());
  r.metadata.manifest_hash = "x";
  // 18 coarse rows; only two with data: 1/1 and 1/3
  r.per_coarse[0].tally = {1, 1};
  r.per_coarse[1].tally = {1, 3};
  r.overall = {2, 4};
  EXPECT_DOUBLE_EQ(*r.domain_mean(), (1.0 + 1.0 / 3) / 2);
  EXPECT_DOUBLE_EQ(*r.overall.accuracy(), 0.5);
}

TEST(Compare, MismatchedManifestsRejected) {
  EvalReport a = empty_report(default_taxonomy()), b = a;
  a.metadata.manifest_hash = "1";
  b.metadata.manifest_hash = "2";
  EXPECT_THROW(compare_reports(a, b), Error);
}
