// Acceptance checks. One PASS/FAIL line per criterion; exit status is the
// number of failures.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>

#include <shiftbench/cli.hpp>
#include <shiftbench/evaluate.hpp>
#include <shiftbench/generate.hpp>
#include <shiftbench/raster.hpp>
#include <shiftbench/scene.hpp>

#include "support.hpp"

using namespace shiftbench;
using Clock = std::chrono::steady_clock;

namespace {

struct Failed {
  std::string why;
};

void expect(bool ok, const std::string& why) {
  if (!ok) throw Failed{why};
}

double seconds_since(Clock::time_point t) {
  return std::chrono::duration<double>(Clock::now() - t).count();
}

int failures = 0;

void check(const char* name, const std::function<std::string()>& body) {
  const auto t0 = Clock::now();
  std::string detail, status = "PASS";
  try {
    detail = body();
  } catch (const Failed& f) {
    status = "FAIL", detail = f.why;
  } catch (const std::exception& e) {
    status = "FAIL", detail = std::string("exception: ") + e.what();
  }
  if (status == "FAIL") ++failures;
  std::printf("%s  %-34s %s (%.2fs)\n", status.c_str(), name, detail.c_str(), seconds_since(t0));
  std::fflush(stdout);
}

// --- taxonomy -------------------------------------------------------------

std::string taxonomy_counts() {
  const auto t0 = Clock::now();
  const std::vector<std::vector<std::string>> shifts = {
      {"clear", "sandstorm", "foggy", "rainy", "snowy"},
      {"front", "side", "top"},
      {"day", "night"},
      {"spring-summer", "autumn", "winter"},
      {"no occlusion", "light occlusion", "partial occlusion", "moderate occlusion",
       "heavy occlusion"}};
  const auto& tax = default_taxonomy();
  std::size_t domains = 0;
  for (const auto& s : shifts) domains += s.size();
  std::size_t all = 0, valid = 0, excluded = 0, excluded_snowy = 0;
  std::vector<std::string> expected;
  for (std::size_t w = 0; w < 5; ++w)
    for (std::size_t v = 0; v < 3; ++v)
      for (std::size_t t = 0; t < 2; ++t)
        for (std::size_t s = 0; s < 3; ++s)
          for (std::size_t o = 0; o < 5; ++o) {
            ++all;
            const bool ok = static_cast<bool>(validate_combination(tax, DomainCombination({w, v, t, s, o})));
            if (ok) {
              ++valid;
              expected.push_back(shifts[0][w] + "/" + shifts[1][v] + "/" + shifts[2][t] + "/" +
                                 shifts[3][s] + "/" + shifts[4][o]);
            } else {
              ++excluded;
              excluded_snowy += shifts[0][w] == "snowy" && shifts[3][s] != "winter";
            }
          }
  std::vector<std::string> got;
  for (const auto& c : enumerate_combinations(tax)) got.push_back(tax.label(c));
  const double dt = seconds_since(t0);
  expect(tax.shifts().size() == 5, "shift count");
  expect(tax.domain_count() == domains && domains == 18, "domain count");
  expect(all == 450 && tax.unconstrained_count() == 450, "unconstrained count");
  expect(valid == 390 && got == expected, "enumeration disagrees with brute force");
  expect(excluded == 60 && excluded_snowy == 60, "excluded assignments are not all snowy off-season");
  expect(dt < 1.0, "too slow");
  return concat("5 shifts, 18 domains, 390 valid, 450 total, 60 excluded in ", dt * 1000, " ms");
}

// --- occlusion bins -------------------------------------------------------

std::string bin_probes() {
  const std::vector<std::pair<double, std::string>> probes = {
      {0.0, "no occlusion"},       {0.001, "light occlusion"},   {0.199, "light occlusion"},
      {0.20, "partial occlusion"}, {0.399, "partial occlusion"}, {0.40, "moderate occlusion"},
      {0.60, "heavy occlusion"},   {0.80, "heavy occlusion"},    {0.801, "discard"},
      {1.0, "discard"}};
  for (const auto& [r, name] : probes)
    expect(to_string(occlusion_bin(r)) == name, concat("ratio ", r, " -> ", to_string(occlusion_bin(r))));
  return concat(probes.size(), " probes");
}

// --- occlusion measurement ------------------------------------------------

struct Rect {
  double x0, y0, x1, y1;
  double area() const { return std::max(0.0, x1 - x0) * std::max(0.0, y1 - y0); }
  double perimeter() const { return 2 * ((x1 - x0) + (y1 - y0)); }
  Rect intersect(const Rect& o) const {
    return {std::max(x0, o.x0), std::max(y0, o.y0), std::min(x1, o.x1), std::min(y1, o.y1)};
  }
};

Rect project_rect(double cx, double cy, double hw, double hh, double depth, int W, int H, double fov) {
  const double f = (H / 2.0) / std::tan(fov * 3.14159265358979323846 / 360.0);
  return {W / 2.0 + f * (cx - hw) / depth, H / 2.0 - f * (cy + hh) / depth,
          W / 2.0 + f * (cx + hw) / depth, H / 2.0 - f * (cy - hh) / depth};
}

Mesh camera_quad(const Camera& cam, double cx, double cy, double hw, double hh, double depth) {
  Mesh m;
  auto P = [&](double x, double y) { return cam.to_world({x, y, -depth}); };
  prim::quad(m, P(cx - hw, cy - hh), P(cx + hw, cy - hh), P(cx + hw, cy + hh), P(cx - hw, cy + hh),
             {1, 1, 1});
  return m;
}

std::string occlusion_oracle() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(7331);
  std::uniform_real_distribution<double> U(0.0, 1.0), ang(-3.0, 3.0), pos(-5.0, 5.0);
  const int scenes = 30;
  double worst = 0;
  for (int i = 0; i < scenes; ++i) {
    const int W = 320, H = 240;
    Camera cam;
    cam.position = {pos(rng), pos(rng), pos(rng)};
    cam.world_to_camera = Mat3::rotation_z(ang(rng)) * Mat3::rotation_x(ang(rng)) * Mat3::rotation_y(ang(rng));
    cam.fov_y_deg = 30 + 30 * U(rng);
    cam.width = W;
    cam.height = H;
    cam.near_plane = 0.05;
    const double d1 = 4 + 4 * U(rng), hw = 0.4 + 0.6 * U(rng), hh = 0.4 + 0.6 * U(rng);
    const double cx = (U(rng) - 0.5) * 0.8, cy = (U(rng) - 0.5) * 0.6;
    const double d0 = 1.0 + (d1 - 1.5) * U(rng), ohw = 0.1 + 0.5 * U(rng), ohh = 0.1 + 0.5 * U(rng);
    const double ocx = cx * d0 / d1 + (U(rng) - 0.5) * 0.8, ocy = cy * d0 / d1 + (U(rng) - 0.5) * 0.8;
    const Rect t = project_rect(cx, cy, hw, hh, d1, W, H, cam.fov_y_deg).intersect({0, 0, double(W), double(H)});
    const Rect o = project_rect(ocx, ocy, ohw, ohh, d0, W, H, cam.fov_y_deg);
    const double oracle = t.intersect(o).area() / t.area();
    const double tol = 2.0 * t.perimeter() / t.area();
    const auto masks = render_masks(cam, camera_quad(cam, cx, cy, hw, hh, d1),
                                    {camera_quad(cam, ocx, ocy, ohw, ohh, d0)});
    const double err = std::abs(masks.ratio() - oracle);
    expect(err <= tol, concat("scene ", i, ": measured ", masks.ratio(), " vs oracle ", oracle));
    worst = std::max(worst, err / tol);
  }
  expect(seconds_since(t0) < 30.0, "too slow");
  return concat(scenes, " scenes, worst error ", worst, " of tolerance");
}

// --- generation -----------------------------------------------------------

std::string generation() {
  testing_support::TempDir a, b;
  for (const auto* dir : {&a, &b}) {
    const std::string out = dir->path().string();
    const char* argv[] = {"shiftbench", "generate", "--per-combination", "1",
                          "--categories", "dog,car", "--out", out.c_str()};
    std::ostringstream o, e;
    expect(run_cli(8, argv, o, e) == 0, "generate failed: " + e.str());
  }
  const auto ma = testing_support::slurp(a / "manifest.jsonl");
  expect(ma == testing_support::slurp(b / "manifest.jsonl"), "manifests differ between runs");
  const auto m = read_manifest(a / "manifest.jsonl");
  expect(m.records.size() == 780, concat("expected 780 records, got ", m.records.size()));
  std::size_t consistent = 0;
  for (const auto& r : m.records)
    consistent += r.occlusion_ratio && to_string(occlusion_bin(*r.occlusion_ratio)) == r.combination.at("occlusion");
  expect(consistent == m.records.size(), concat(consistent, " of ", m.records.size(), " re-bin"));
  return concat(m.records.size(), " records, byte-identical, 100% re-bin");
}

// --- prompts --------------------------------------------------------------

std::string prompts() {
  const PromptComposer pc(default_taxonomy());
  const auto c = default_taxonomy().combination({{"weathers", "clear"}, {"views", "side"}, {"time", "day"},
                                                 {"seasons", "autumn"}, {"occlusion", "light occlusion"}});
  expect(pc.domain("dog", c).text == "a photo of a dog in clear autumn day from side with light occlusion.",
         "domain: " + pc.domain("dog", c).text);
  const std::string plus =
      "a photo of a dog in clear autumn day from side with light occlusion, sky is blue and unobstructed "
      "with bright and vibrant colors, warm tones, crisp light, and leaves changing color, bright and "
      "clear visibility, lots of sunlight, showing the object or scene from the left side, about 0 "
      "percent to 20 percent object are occluded.";
  expect(pc.domain_plus("dog", c).text == plus, "domain_plus: " + pc.domain_plus("dog", c).text);
  return "domain and domain_plus match";
}

// --- classification -------------------------------------------------------

EmbeddingVector random_unit(std::mt19937_64& rng, std::size_t d) {
  std::normal_distribution<double> N;
  std::vector<double> v(d);
  for (auto& x : v) x = N(rng);
  return normalized(v);
}

SampleRecord rec(const std::string& id, const std::string& cat, std::map<std::string, std::string> comb) {
  SampleRecord r;
  r.sample_id = id;
  r.image_path = id + ".png";
  r.category = cat;
  r.combination = std::move(comb);
  r.provenance = Provenance::imported;
  return r;
}

std::string classifier() {
  std::mt19937_64 rng(4242);
  for (int inst = 0; inst < 1000; ++inst) {
    const std::size_t d = 2 + rng() % 128, n = 2 + rng() % 20;
    const auto img = random_unit(rng, d);
    std::vector<EmbeddingVector> texts;
    for (std::size_t i = 0; i < n; ++i) texts.push_back(random_unit(rng, d));
    const auto got = classify(img, texts);
    std::size_t best = 0;
    std::vector<double> s(n);
    for (std::size_t i = 0; i < n; ++i) {
      double dot = 0, ni = 0, nt = 0;
      for (std::size_t k = 0; k < d; ++k) {
        dot += img.values[k] * texts[i].values[k];
        ni += img.values[k] * img.values[k];
        nt += texts[i].values[k] * texts[i].values[k];
      }
      s[i] = dot / std::sqrt(ni * nt);
      if (s[i] > s[best]) best = i;
      expect(std::abs(s[i] - got.scores[i]) < 1e-6, concat("instance ", inst, " score ", i));
    }
    expect(best == got.predicted, concat("instance ", inst, " argmax"));
  }

  const auto& tax = default_taxonomy();
  const std::vector<std::string> classes = {"car", "dog", "bird", "cow", "ship"};
  Manifest m;
  m.header.taxonomy_hash = tax.hash();
  m.header.classes = classes;
  std::mt19937_64 pick(17);
  const auto combos = enumerate_combinations(tax);
  for (std::size_t i = 0; i < 200; ++i)
    m.records.push_back(rec(concat("s", i), classes[pick() % classes.size()], tax.names(combos[pick() % combos.size()])));
  const PromptComposer pc(tax);
  for (auto mode : {PromptMode::baseline, PromptMode::domain, PromptMode::domain_plus}) {
    MockBackend oracle(MockBackend::Mode::oracle);
    EvalOptions opt;
    opt.mode = mode;
    const auto rep = evaluate(m, tax, pc, oracle, opt);
    expect(rep.overall.correct == m.records.size(), "oracle mock below 100% in " + to_string(mode));
  }
  std::size_t first_class = 0;
  for (const auto& r : m.records) first_class += r.category == classes[0];
  MockBackend constant(MockBackend::Mode::constant);
  const auto rep = evaluate(m, tax, pc, constant);
  expect(rep.overall == (Tally{first_class, m.records.size()}),
         concat("constant mock: ", rep.overall.correct, " vs expected ", first_class));
  return concat("1000 instances; oracle 100%; constant ", first_class, "/", m.records.size());
}

// --- aggregation ----------------------------------------------------------

// Text of class i is e_i; image vectors are e_j for a scripted prediction j.
class Scripted : public EmbeddingBackend {
 public:
  std::vector<std::string> classes;
  std::map<std::string, std::string> predict;
  BackendHandshake hello() override { return {1, classes.size(), "scripted", true, true, false}; }
  std::vector<EmbeddingVector> embed_texts(std::span<const TextQuery> q) override {
    std::vector<EmbeddingVector> out;
    for (const auto& t : q) out.push_back(basis(t.class_name));
    return out;
  }
  std::vector<EmbeddingVector> embed_images(std::span<const ImageQuery> q) override {
    std::vector<EmbeddingVector> out;
    for (const auto& im : q) out.push_back(basis(predict.at(im.sample_id)));
    return out;
  }
  std::string id() const override { return "scripted"; }

 private:
  EmbeddingVector basis(const std::string& c) const {
    std::vector<double> v(classes.size(), 0.0);
    v[std::find(classes.begin(), classes.end(), c) - classes.begin()] = 1.0;
    return {v};
  }
};

std::string aggregation() {
  const auto& tax = default_taxonomy();
  Scripted be;
  be.classes = {"dog", "car", "bird", "cow"};
  const std::map<std::string, std::string> A = {{"weathers", "clear"}, {"views", "front"}, {"time", "day"},
                                                {"seasons", "winter"}, {"occlusion", "no occlusion"}};
  const std::map<std::string, std::string> B = {{"weathers", "foggy"}, {"views", "top"}, {"time", "day"},
                                                {"seasons", "spring-summer"}, {"occlusion", "partial occlusion"}};
  Manifest m;
  m.header.taxonomy_hash = tax.hash();
  m.header.classes = be.classes;
  // A: 2 samples, 1 correct. B: 6 samples, 4 correct. Both "day": 5 / 8.
  const std::vector<std::pair<std::string, std::string>> a = {{"dog", "dog"}, {"car", "dog"}};
  const std::vector<std::pair<std::string, std::string>> b = {
      {"dog", "dog"}, {"car", "car"}, {"bird", "bird"}, {"cow", "cow"}, {"dog", "cow"}, {"car", "bird"}};
  for (std::size_t i = 0; i < a.size(); ++i) {
    m.records.push_back(rec(concat("a", i), a[i].first, A));
    be.predict[concat("a", i)] = a[i].second;
  }
  for (std::size_t i = 0; i < b.size(); ++i) {
    m.records.push_back(rec(concat("b", i), b[i].first, B));
    be.predict[concat("b", i)] = b[i].second;
  }
  const auto rep = evaluate(m, tax, PromptComposer(tax), be);
  const auto* day = rep.coarse("time", "day");
  expect(day && day->tally.accuracy() && *day->tally.accuracy() == 0.625,
         concat("day accuracy ", day && day->tally.accuracy() ? *day->tally.accuracy() : -1.0));
  // unweighted mean of combination accuracies would be (0.5 + 4/6) / 2, not 0.625
  Tally combos;
  for (const auto& [k, t] : rep.per_combination) combos += t;
  expect(combos == rep.overall, "overall differs from combination-level sum");
  for (const auto& s : tax.shifts()) {
    Tally sum;
    for (const auto& row : rep.per_coarse)
      if (row.shift == s.name) sum += row.tally;
    expect(sum == rep.overall, "overall differs from shift-level sum for " + s.name);
  }
  expect(rep.overall == (Tally{5, 8}), "overall is not 5/8");
  return "day 62.5%, overall 5/8 from combinations and from every shift";
}

}  // namespace

int main() {
  check("taxonomy-counts", taxonomy_counts);
  check("occlusion-bin-probes", bin_probes);
  check("occlusion-measurement-oracle", occlusion_oracle);
  check("generation-determinism-integrity", generation);
  check("prompt-golden-strings", prompts);
  check("classifier-oracle-equivalence", classifier);
  check("aggregation-weighted", aggregation);
  std::printf("%d failed\n", failures);
  return failures == 0 ? 0 : 1;
}
