#include <cmath>
#include <filesystem>
#include <string>
#include <vector>

#include "ctgca/cli.hpp"
#include "ctgca/gca.hpp"
#include "ctgca/manifest.hpp"
#include "ctgca/report.hpp"
#include "ctgca/svg.hpp"
#include "doctest.h"
#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace ctgca;

namespace {

fs::path fresh_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("ctgca_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

void write_text(const fs::path& p, const std::string& s) {
  write_file_bytes(p, s);
}

std::string slurp(const fs::path& p) { return read_file_bytes(p); }

// One cohort run through phantom -> pipeline -> train -> validate, shared by
// the command tests (the pipeline step is the expensive part).
struct Fixture {
  fs::path root, cohort, feats, model, report;
  int rc_phantom = -1, rc_pipeline = -1, rc_train = -1, rc_validate = -1;
};

const Fixture& fixture() {
  static const Fixture f = [] {
    Fixture x;
    x.root = fresh_dir("fixture");
    x.cohort = x.root / "cohort";
    x.feats = x.root / "feats";
    x.model = x.root / "model";
    x.report = x.root / "report";
    write_text(x.root / "cohort_cfg.json",
               R"({"n": 8, "master_seed": 910, "noise_sigma": 8.0,
                   "pose_translation_mm": 3.0, "pose_rotation_deg": 3.0})");
    x.rc_phantom = cli::run_cli({"phantom", "--config",
                                 (x.root / "cohort_cfg.json").string(), "--out",
                                 x.cohort.string()});
    x.rc_pipeline = cli::run_cli(
        {"pipeline", (x.cohort / "scans").string(), "--out", x.feats.string()});
    x.rc_train = cli::run_cli({"train", "--features",
                               (x.feats / "features.csv").string(), "--ratings",
                               (x.cohort / "truth.csv").string(), "--seed",
                               "11", "--out", x.model.string()});
    x.rc_validate = cli::run_cli(
        {"validate", "--model", (x.model / "model.json").string(), "--features",
         (x.feats / "features.csv").string(), "--ratings",
         (x.cohort / "truth.csv").string(), "--covariates",
         (x.cohort / "cohort.csv").string(), "--out", x.report.string()});
    return x;
  }();
  return f;
}

}  // namespace

TEST_CASE("svg canvas: fixed size, escaping, deterministic bytes") {
  SvgCanvas c;
  c.line(0, 0, 800, 600, "#000000", 2.0, "4,2");
  c.rect(10.5, 20.25, 100, 50, "#1f77b4", "#000000");
  c.circle(400, 300, 4, "#d62728", 0.5);
  c.text(10, 10, "a<b&c>\"d'", 12, "middle", "#000000", -90);
  const std::string svg = c.finish();
  CHECK(svg.rfind("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n", 0) == 0);
  CHECK(svg.find("xmlns=\"http://www.w3.org/2000/svg\"") != std::string::npos);
  CHECK(svg.find("width=\"800\" height=\"600\"") != std::string::npos);
  CHECK(svg.find("a&lt;b&amp;c&gt;&quot;d&apos;") != std::string::npos);
  CHECK(svg.find("stroke-dasharray=\"4,2\"") != std::string::npos);
  CHECK(svg.find("rotate(-90.00 10.00 10.00)") != std::string::npos);
  CHECK(svg.find("x=\"10.50\" y=\"20.25\"") != std::string::npos);
  // same drawing -> same bytes
  SvgCanvas c2;
  c2.line(0, 0, 800, 600, "#000000", 2.0, "4,2");
  c2.rect(10.5, 20.25, 100, 50, "#1f77b4", "#000000");
  c2.circle(400, 300, 4, "#d62728", 0.5);
  c2.text(10, 10, "a<b&c>\"d'", 12, "middle", "#000000", -90);
  CHECK(svg == c2.finish());
  CHECK(xml_escape("x&y") == "x&amp;y");
}

TEST_CASE("json dump with six significant digits") {
  CHECK(format_g6(0.123456789) == "0.123457");
  CHECK(format_g6(1234567.89) == "1.23457e+06");
  CHECK(format_g6(-0.0) == "0");
  CHECK(format_g6(39.0) == "39");
  CHECK(format_g6(1.0 / 3.0) == "0.333333");

  json j;
  j["b"] = 0.123456789;
  j["a"] = json::array({1, 2.5, "x"});
  j["c"] = json{{"nested", true}, {"null", nullptr}};
  j["d"] = std::nan("");
  const std::string out = dump_json_g6(j);
  CHECK(out ==
        "{\n"
        "  \"a\": [\n"
        "    1,\n"
        "    2.5,\n"
        "    \"x\"\n"
        "  ],\n"
        "  \"b\": 0.123457,\n"
        "  \"c\": {\n"
        "    \"nested\": true,\n"
        "    \"null\": null\n"
        "  },\n"
        "  \"d\": null\n"
        "}\n");
  CHECK(dump_json_g6(json::object()) == "{}\n");
  CHECK(dump_json_g6(json::array()) == "[]\n");
}

TEST_CASE("quantile: linear interpolation between order statistics") {
  const std::vector<double> v{1, 2, 3, 4};
  CHECK(quantile(v, 0.0) == 1.0);
  CHECK(quantile(v, 1.0) == 4.0);
  CHECK(quantile(v, 0.5) == 2.5);
  CHECK(quantile(v, 0.25) == 1.75);
  CHECK(quantile({7.0}, 0.3) == 7.0);
  CHECK(quantile({3, 1, 2}, 0.5) == 2.0);  // sorts internally
  CHECK_THROWS_AS(quantile({}, 0.5), DomainError);
  CHECK_THROWS_AS(quantile({1.0}, 1.5), DomainError);
  CHECK(age_band(70.0) == 0);
  CHECK(age_band(75.0) == 0);
  CHECK(age_band(75.5) == 1);
  CHECK(age_band(84.0) == 1);
  CHECK(age_band(84.5) == 2);
}

TEST_CASE("validation report bundle on a perfect-prediction fixture") {
  std::vector<ScanAnalysis> rows;
  const int totals[8] = {2, 6, 10, 14, 18, 24, 30, 36};
  const double ages[8] = {70, 71, 72, 80, 81, 86, 88, 90};
  const int amts[8] = {10, 10, 9, 8, 7, 5, 4, 3};
  for (int i = 0; i < 8; ++i) {
    ScanAnalysis r;
    r.scan_id = "s" + std::to_string(i);
    r.pred_raw = totals[i];
    r.pred_total = totals[i];
    r.pred_severity = classify_severity(totals[i]);
    r.rater1_total = totals[i];
    r.rater1_severity = r.pred_severity;
    r.rater2_total = totals[i];
    r.age = ages[i];
    r.amt_score = amts[i];
    r.ocs_tasks_impaired = i;
    rows.push_back(r);
  }
  const ReportBundle b =
      build_validation_report(rows, json{{"model", {{"lambda", 0.1}}}});
  const json& rep = b.report;
  CHECK(rep["n_test"].get<size_t>() == 8);
  CHECK(rep["model"]["lambda"].get<double>() == 0.1);

  const json& a1 = rep["agreement"]["tool_vs_rater1"];
  CHECK(a1["mae"].get<double>() == 0.0);
  CHECK(a1["kappa_total"].get<double>() == 1.0);
  CHECK(a1["kappa_total_label"].get<std::string>() == "almost perfect");
  CHECK(a1["kappa_severity"].get<double>() == 1.0);
  CHECK(a1["bland_altman"]["mean_diff"].get<double>() == 0.0);
  CHECK(a1["bland_altman"]["loa_low"].get<double>() == 0.0);
  CHECK(a1["bland_altman"]["loa_high"].get<double>() == 0.0);
  CHECK(a1["frac_within_2"].get<double>() == 1.0);
  CHECK(a1["spearman"]["rho"].get<double>() == doctest::Approx(1.0));
  CHECK(a1["spearman"]["p"].get<double>() == 0.0);
  CHECK(a1["confusion"]["counts"][0][0].get<int>() == 3);
  CHECK(a1["confusion"]["counts"][1][1].get<int>() == 2);
  CHECK(a1["confusion"]["counts"][2][2].get<int>() == 3);
  CHECK(a1["confusion"]["counts"][0][1].get<int>() == 0);
  for (int c = 0; c < 3; ++c)
    CHECK(a1["confusion"]["class_accuracy"][c].get<double>() == 1.0);

  CHECK(rep["agreement"]["tool_vs_rater2"]["mae"].get<double>() == 0.0);
  CHECK(rep["agreement"]["rater1_vs_rater2"]["kappa_total"].get<double>() ==
        1.0);
  CHECK(rep["rater_comparison"]["n_shared"].get<size_t>() == 8);
  // identical columns: rm-ANOVA reports no treatment effect (F = 0, p = 1)
  // while the zero-variance paired t trio degenerates into notices
  CHECK(rep["rater_comparison"]["rm_anova"]["f"].get<double>() == 0.0);
  CHECK(rep["rater_comparison"]["rm_anova"]["p"].get<double>() == 1.0);
  bool saw_t = false;
  for (const auto& n : b.notices)
    if (n.find("paired t") != std::string::npos) saw_t = true;
  CHECK(saw_t);

  const json& age = rep["covariates"]["age"];
  CHECK(age["n"].get<size_t>() == 8);
  CHECK(age["spearman"]["rho"].get<double>() == doctest::Approx(1.0));
  CHECK(age["kruskal_wallis"]["bands"][0]["n"].get<size_t>() == 3);
  CHECK(age["kruskal_wallis"]["bands"][1]["n"].get<size_t>() == 2);
  CHECK(age["kruskal_wallis"]["bands"][2]["n"].get<size_t>() == 3);
  CHECK(age["kruskal_wallis"]["df"].get<int>() == 2);
  CHECK(age["rank_sum_over_75"]["n_over_75"].get<size_t>() == 5);
  CHECK(rep["covariates"]["amt"]["rank_sum_impaired"]["n_impaired"]
            .get<size_t>() == 5);
  CHECK(rep["covariates"]["ocs"]["rank_sum_above_median"]["median"]
            .get<double>() == 3.5);

  // every figure ships with a same-stem CSV
  CHECK(rep["figures"].size() == 9);
  CHECK(b.files.size() == 18);
  for (const auto& name : rep["figures"]) {
    const std::string svg = name.get<std::string>();
    const std::string csv = svg.substr(0, svg.size() - 4) + ".csv";
    bool found_svg = false, found_csv = false;
    for (const auto& [fname, bytes] : b.files) {
      if (fname == svg) {
        found_svg = true;
        CHECK(bytes.rfind("<?xml", 0) == 0);
      }
      if (fname == csv) {
        found_csv = true;
        CHECK(bytes.find('\n') != std::string::npos);
      }
    }
    CHECK(found_svg);
    CHECK(found_csv);
  }

  // bit-for-bit deterministic
  const ReportBundle b2 =
      build_validation_report(rows, json{{"model", {{"lambda", 0.1}}}});
  CHECK(dump_json_g6(b.report) == dump_json_g6(b2.report));
  REQUIRE(b.files.size() == b2.files.size());
  for (size_t i = 0; i < b.files.size(); ++i) {
    CHECK(b.files[i].first == b2.files[i].first);
    CHECK(b.files[i].second == b2.files[i].second);
  }

  CHECK_THROWS_AS(build_validation_report({}, json::object()), DomainError);
}

TEST_CASE("validation report bundle skips optional analyses with notices") {
  std::vector<ScanAnalysis> rows;
  for (int i = 0; i < 5; ++i) {
    ScanAnalysis r;
    r.scan_id = "s" + std::to_string(i);
    r.pred_raw = 3.0 * i + 0.4;
    r.pred_total = 3 * i;
    r.pred_severity = classify_severity(r.pred_total);
    r.rater1_total = 3 * i + 1;
    r.rater1_severity = classify_severity(r.rater1_total);
    rows.push_back(r);
  }
  const ReportBundle b = build_validation_report(rows, json::object());
  CHECK(!b.report.contains("rater_comparison"));
  CHECK(!b.report.contains("covariates"));
  CHECK(b.report["figures"].size() == 5);  // no age / AMT figures
  CHECK(b.files.size() == 10);
  int hits = 0;
  for (const auto& n : b.notices) {
    if (n.find("rater-2") != std::string::npos) ++hits;
    if (n.find("age") != std::string::npos) ++hits;
    if (n.find("AMT") != std::string::npos) ++hits;
    if (n.find("OCS") != std::string::npos) ++hits;
  }
  CHECK(hits == 4);
  CHECK(b.report["notices"].size() == b.notices.size());
}

TEST_CASE("manifest: fnv-1a hashing and file round trip") {
  CHECK(fnv1a_hex("") == "cbf29ce484222325");
  CHECK(fnv1a_hex("a") == "af63dc4c8601ec8c");
  const fs::path dir = fresh_dir("manifest");
  const std::string blob{'\0', '\1', 'a', 'b'};
  write_file_bytes(dir / "x.bin", blob);
  CHECK(read_file_bytes(dir / "x.bin") == blob);
  CHECK_THROWS_AS(read_file_bytes(dir / "nope.bin"), Error);

  RunManifest m("ctgca phantom --out x");
  m.set_seed(42);
  m.add_input("config", "{}");
  m.add_stage_seconds("total", 1.5);
  m.add_scan_seconds("scan_0001", 0.25);
  m.write(dir);
  const json j = json::parse(slurp(dir / "manifest.json"));
  CHECK(j["command"].get<std::string>() == "ctgca phantom --out x");
  CHECK(j["master_seed"].get<uint64_t>() == 42);
  CHECK(j["inputs"]["config"].get<std::string>().rfind("fnv1a:", 0) == 0);
  CHECK(j["timings"]["per_scan"]["scan_0001"].get<double>() == 0.25);
  CHECK(j["versions"]["ctgca"].get<std::string>() == kToolVersion);
}

TEST_CASE("phantom command: outputs, determinism, config errors") {
  const fs::path dir = fresh_dir("phantom_cmd");
  write_text(dir / "cfg.json",
             R"({"n": 3, "master_seed": 77, "noise_sigma": 0.0,
                 "pose_translation_mm": 0.0, "pose_rotation_deg": 0.0})");
  const fs::path out_a = dir / "a", out_b = dir / "b";
  CHECK(cli::run_cli({"phantom", "--config", (dir / "cfg.json").string(),
                      "--out", out_a.string()}) == 0);
  CHECK(fs::exists(out_a / "truth.csv"));
  CHECK(fs::exists(out_a / "cohort.csv"));
  CHECK(fs::exists(out_a / "cohort.json"));
  CHECK(fs::exists(out_a / "manifest.json"));
  for (int i = 1; i <= 3; ++i)
    CHECK(fs::exists(out_a / "scans" /
                     ("scan_000" + std::to_string(i) + ".nii")));
  const auto truth_lines = slurp(out_a / "truth.csv");
  CHECK(std::count(truth_lines.begin(), truth_lines.end(), '\n') == 4);

  CHECK(cli::run_cli({"phantom", "--config", (dir / "cfg.json").string(),
                      "--out", out_b.string()}) == 0);
  CHECK(slurp(out_a / "truth.csv") == slurp(out_b / "truth.csv"));
  CHECK(slurp(out_a / "cohort.csv") == slurp(out_b / "cohort.csv"));
  CHECK(slurp(out_a / "cohort.json") == slurp(out_b / "cohort.json"));
  CHECK(slurp(out_a / "scans/scan_0001.nii") ==
        slurp(out_b / "scans/scan_0001.nii"));

  // --seed overrides the config's master seed
  const fs::path out_c = dir / "c";
  CHECK(cli::run_cli({"phantom", "--config", (dir / "cfg.json").string(),
                      "--seed", "78", "--out", out_c.string()}) == 0);
  CHECK(slurp(out_a / "scans/scan_0001.nii") !=
        slurp(out_c / "scans/scan_0001.nii"));

  write_text(dir / "bad_n.json", R"({"n": 0})");
  CHECK(cli::run_cli({"phantom", "--config", (dir / "bad_n.json").string(),
                      "--out", (dir / "x1").string()}) == 2);
  write_text(dir / "bad_syntax.json", "{nope");
  CHECK(cli::run_cli({"phantom", "--config", (dir / "bad_syntax.json").string(),
                      "--out", (dir / "x2").string()}) == 2);
  write_text(dir / "bad_field.json", R"({"n": 2, "sigma": 1.0})");
  CHECK(cli::run_cli({"phantom", "--config", (dir / "bad_field.json").string(),
                      "--out", (dir / "x3").string()}) == 2);
  write_text(dir / "bad_type.json", R"({"n": "three"})");
  CHECK(cli::run_cli({"phantom", "--config", (dir / "bad_type.json").string(),
                      "--out", (dir / "x4").string()}) == 2);
  CHECK(cli::run_cli({"phantom", "--out", (dir / "x5").string()}) == 2);
  CHECK(cli::run_cli({"phantom", "--config",
                      (dir / "cfg.json").string()}) == 2);  // no --out
  CHECK(cli::run_cli({"phantom", "--config", (dir / "missing.json").string(),
                      "--out", (dir / "x6").string()}) == 2);
}

TEST_CASE("pipeline command: features, transforms and failure handling") {
  const Fixture& f = fixture();
  REQUIRE(f.rc_phantom == 0);
  REQUIRE(f.rc_pipeline == 0);
  const std::string feats = slurp(f.feats / "features.csv");
  const auto lines = [](const std::string& s) {
    return std::count(s.begin(), s.end(), '\n');
  };
  CHECK(lines(feats) == 9);  // header + 8 scans
  CHECK(feats.rfind("scan_id,frontal_l,", 0) == 0);
  // every feature lies in [0, 1]
  size_t pos = feats.find('\n') + 1;
  int row_count = 0;
  while (pos < feats.size()) {
    const size_t end = feats.find('\n', pos);
    const std::string line = feats.substr(pos, end - pos);
    size_t c = line.find(',');
    int cells = 0;
    while (c != std::string::npos) {
      const size_t c2 = line.find(',', c + 1);
      const std::string cell =
          line.substr(c + 1, (c2 == std::string::npos ? line.size() : c2) -
                                 c - 1);
      const double v = std::stod(cell);
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
      ++cells;
      c = c2;
    }
    CHECK(cells == 15);
    ++row_count;
    pos = end + 1;
  }
  CHECK(row_count == 8);
  for (int i = 1; i <= 8; ++i)
    CHECK(fs::exists(f.feats / "transforms" /
                     ("scan_000" + std::to_string(i) + "_transform.json")));
  const json tj =
      json::parse(slurp(f.feats / "transforms" / "scan_0001_transform.json"));
  CHECK(tj["params"].size() == 12);
  CHECK(tj["matrix"].size() == 16);
  CHECK(slurp(f.feats / "failures.csv") == "scan_id,stage,error\n");
  const json mf = json::parse(slurp(f.feats / "manifest.json"));
  CHECK(mf["timings"]["per_scan"].size() == 8);

  // corrupt scan among valid ones: recorded, skipped, exit 0
  const fs::path dir = fresh_dir("pipeline_mixed");
  fs::create_directories(dir / "scans");
  fs::copy_file(f.cohort / "scans/scan_0001.nii", dir / "scans/good.nii");
  write_text(dir / "scans/aaa_bad.nii", "this is not a nifti file");
  CHECK(cli::run_cli({"pipeline", (dir / "scans").string(), "--out",
                      (dir / "out").string()}) == 0);
  const std::string fails = slurp(dir / "out/failures.csv");
  CHECK(fails.find("aaa_bad,read,") != std::string::npos);
  CHECK(lines(slurp(dir / "out/features.csv")) == 2);  // header + good

  // every scan failing -> exit 1
  const fs::path dir2 = fresh_dir("pipeline_allbad");
  fs::create_directories(dir2 / "scans");
  write_text(dir2 / "scans/z.nii", "garbage");
  CHECK(cli::run_cli({"pipeline", (dir2 / "scans").string(), "--out",
                      (dir2 / "out").string()}) == 1);

  // no scans / missing directory -> usage error
  const fs::path dir3 = fresh_dir("pipeline_empty");
  CHECK(cli::run_cli({"pipeline", dir3.string(), "--out",
                      (dir3 / "out").string()}) == 2);
  CHECK(cli::run_cli({"pipeline", (dir3 / "nope").string(), "--out",
                      (dir3 / "out").string()}) == 2);
}

TEST_CASE("train command: model, split, selection table, id mismatch") {
  const Fixture& f = fixture();
  REQUIRE(f.rc_train == 0);
  const json model = json::parse(slurp(f.model / "model.json"));
  CHECK(model["format"].get<std::string>() == kModelFormat);
  CHECK((model["mode"] == "sum-of-regions" || model["mode"] == "direct-total"));
  CHECK(model["region_weights"].size() == 13);
  CHECK(model["region_weights"][0].size() == 16);
  CHECK(model["total_weights"].size() == 16);
  CHECK(model["seed"].get<uint64_t>() == 11);

  const json split = json::parse(slurp(f.model / "split.json"));
  CHECK(split["counts"]["train"].get<int>() == 4);
  CHECK(split["counts"]["optimisation"].get<int>() == 2);
  CHECK(split["counts"]["test"].get<int>() == 2);
  CHECK(split["hash"] == model["split_hash"]);
  CHECK(split["assignment"].size() == 8);

  const std::string sel = slurp(f.model / "selection.csv");
  CHECK(std::count(sel.begin(), sel.end(), '\n') == 9);  // header + 4x2 grid
  CHECK(sel.rfind("mode,lambda,optimisation_mae,selected\n", 0) == 0);
  CHECK(std::count(sel.begin(), sel.end(), '1') >= 1);

  // byte-identical rerun
  const fs::path dir = fresh_dir("train_rerun");
  CHECK(cli::run_cli({"train", "--features",
                      (f.feats / "features.csv").string(), "--ratings",
                      (f.cohort / "truth.csv").string(), "--seed", "11",
                      "--out", dir.string()}) == 0);
  CHECK(slurp(dir / "model.json") == slurp(f.model / "model.json"));
  CHECK(slurp(dir / "split.json") == slurp(f.model / "split.json"));
  CHECK(slurp(dir / "selection.csv") == slurp(f.model / "selection.csv"));

  // a feature row without a rating -> exit 2 naming the scan
  const fs::path dir2 = fresh_dir("train_mismatch");
  std::string truth = slurp(f.cohort / "truth.csv");
  const size_t row = truth.find("scan_0003");
  const size_t row_end = truth.find('\n', row);
  truth.erase(row, row_end - row + 1);
  write_text(dir2 / "truth_missing.csv", truth);
  CHECK(cli::run_cli({"train", "--features",
                      (f.feats / "features.csv").string(), "--ratings",
                      (dir2 / "truth_missing.csv").string(), "--out",
                      (dir2 / "out").string()}) == 2);

  CHECK(cli::run_cli({"train", "--features", (dir2 / "nope.csv").string(),
                      "--ratings", (f.cohort / "truth.csv").string(), "--out",
                      (dir2 / "out").string()}) == 2);
}

TEST_CASE("validate command: report files, determinism, split guard") {
  const Fixture& f = fixture();
  REQUIRE(f.rc_validate == 0);
  const json rep = json::parse(slurp(f.report / "report.json"));
  CHECK(rep["n_test"].get<int>() == 2);
  CHECK(rep["agreement"].contains("tool_vs_rater1"));
  CHECK(rep["split_counts"]["test"].get<int>() == 2);
  for (const auto& fig : rep["figures"])
    CHECK(fs::exists(f.report / fig.get<std::string>()));

  // rerun -> byte-identical everything except manifest.json
  const fs::path dir = fresh_dir("validate_rerun");
  CHECK(cli::run_cli(
            {"validate", "--model", (f.model / "model.json").string(),
             "--features", (f.feats / "features.csv").string(), "--ratings",
             (f.cohort / "truth.csv").string(), "--covariates",
             (f.cohort / "cohort.csv").string(), "--out", dir.string()}) == 0);
  for (const auto& entry : fs::directory_iterator(f.report)) {
    const std::string name = entry.path().filename().string();
    if (name == "manifest.json") continue;
    CHECK(slurp(entry.path()) == slurp(dir / name));
  }

  // --split cross-check accepts the real split.json
  const fs::path dir1 = fresh_dir("validate_split_ok");
  CHECK(cli::run_cli({"validate", "--model", (f.model / "model.json").string(),
                      "--features", (f.feats / "features.csv").string(),
                      "--ratings", (f.cohort / "truth.csv").string(), "--split",
                      (f.model / "split.json").string(), "--out",
                      dir1.string()}) == 0);

  // feature set differing from training -> split hash mismatch -> exit 2
  const fs::path dir2 = fresh_dir("validate_bad");
  std::string feats = slurp(f.feats / "features.csv");
  feats.erase(feats.rfind("scan_0008"));
  write_text(dir2 / "features_short.csv", feats);
  CHECK(cli::run_cli({"validate", "--model", (f.model / "model.json").string(),
                      "--features", (dir2 / "features_short.csv").string(),
                      "--ratings", (f.cohort / "truth.csv").string(), "--out",
                      (dir2 / "o1").string()}) == 2);

  // tampered model mode -> exit 2
  json bad_model = json::parse(slurp(f.model / "model.json"));
  bad_model["mode"] = "nonsense";
  write_text(dir2 / "bad_model.json", bad_model.dump(2) + "\n");
  CHECK(cli::run_cli({"validate", "--model", (dir2 / "bad_model.json").string(),
                      "--features", (f.feats / "features.csv").string(),
                      "--ratings", (f.cohort / "truth.csv").string(), "--out",
                      (dir2 / "o2").string()}) == 2);

  // split file with a foreign hash -> exit 2
  json bad_split = json::parse(slurp(f.model / "split.json"));
  bad_split["hash"] = "0000000000000000";
  write_text(dir2 / "bad_split.json", bad_split.dump(2) + "\n");
  CHECK(cli::run_cli({"validate", "--model", (f.model / "model.json").string(),
                      "--features", (f.feats / "features.csv").string(),
                      "--ratings", (f.cohort / "truth.csv").string(), "--split",
                      (dir2 / "bad_split.json").string(), "--out",
                      (dir2 / "o3").string()}) == 2);

  // without covariates the run still succeeds, with notices in the report
  const fs::path dir3 = fresh_dir("validate_nocov");
  CHECK(cli::run_cli({"validate", "--model", (f.model / "model.json").string(),
                      "--features", (f.feats / "features.csv").string(),
                      "--ratings", (f.cohort / "truth.csv").string(), "--out",
                      dir3.string()}) == 0);
  const json rep3 = json::parse(slurp(dir3 / "report.json"));
  CHECK(!rep3.contains("covariates"));
  CHECK(rep3["notices"].size() >= 3);
}

TEST_CASE("cli usage and exit codes") {
  CHECK(cli::run_cli({"--help"}) == 0);
  CHECK(cli::run_cli({}) == 2);
  CHECK(cli::run_cli({"bogus"}) == 2);
  CHECK(cli::run_cli({"train"}) == 2);              // missing required options
  CHECK(cli::run_cli({"validate", "--model", "m"}) == 2);
  const fs::path dir = fresh_dir("cli_usage");
  write_text(dir / "cfg.json", R"({"n": 1})");
  CHECK(cli::run_cli({"--threads", "-2", "phantom", "--config",
                      (dir / "cfg.json").string(), "--out",
                      (dir / "o").string()}) == 2);
}
