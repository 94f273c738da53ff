// Acceptance suite: each stated delivery criterion runs as one numbered
// check that prints a single PASS/FAIL line (details indented below it).
// Exit status is the number of failed criteria. Criterion numbers can be
// passed as arguments to run a subset, e.g. `ctgca_acceptance 1 3`.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <numeric>
#include <string>
#include <vector>

#include "ctgca/cli.hpp"
#include "ctgca/gca.hpp"
#include "ctgca/manifest.hpp"
#include "ctgca/nifti.hpp"
#include "ctgca/predictor.hpp"
#include "ctgca/preprocess.hpp"
#include "ctgca/resample.hpp"
#include "ctgca/rng.hpp"
#include "ctgca/stats.hpp"
#include "ctgca/volume.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace ctgca;

namespace {

std::vector<std::string> g_fail;

std::string num(double v) {
  char b[40];
  std::snprintf(b, sizeof b, "%.6g", v);
  return b;
}

void check(bool ok, const std::string& msg) {
  if (!ok) g_fail.push_back(msg);
}

void check_near(double got, double want, double tol, const std::string& what) {
  if (!(std::fabs(got - want) <= tol))
    g_fail.push_back(what + ": got " + num(got) + ", want " + num(want) +
                     " within " + num(tol));
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

int run_criterion(int id, const char* title,
                  const std::function<void()>& body) {
  g_fail.clear();
  const auto t0 = std::chrono::steady_clock::now();
  try {
    body();
  } catch (const std::exception& e) {
    g_fail.push_back(std::string("unhandled exception: ") + e.what());
  }
  const double secs = seconds_since(t0);
  std::printf("[%s] criterion %d: %s (%.1f s)\n",
              g_fail.empty() ? "PASS" : "FAIL", id, title, secs);
  for (const auto& d : g_fail) std::printf("       - %s\n", d.c_str());
  std::fflush(stdout);
  return g_fail.empty() ? 0 : 1;
}

// Exact two-sided rank-sum p: over all assignments of the pooled mid-ranks
// to group a, the fraction whose rank sum deviates from its null mean at
// least as far as the observed one.
double exact_rank_sum_p(const std::vector<double>& a,
                        const std::vector<double>& b) {
  const size_t na = a.size(), n = a.size() + b.size();
  std::vector<double> pool = a;
  pool.insert(pool.end(), b.begin(), b.end());
  const std::vector<double> ranks = stats::average_ranks(pool);
  const double mu = static_cast<double>(na) * (static_cast<double>(n) + 1) / 2;
  double w_obs = 0;
  for (size_t i = 0; i < na; ++i) w_obs += ranks[i];
  const double dev_obs = std::fabs(w_obs - mu);

  std::vector<size_t> comb(na);
  std::iota(comb.begin(), comb.end(), size_t{0});
  long total = 0, extreme = 0;
  while (true) {
    double w = 0;
    for (size_t i : comb) w += ranks[i];
    if (std::fabs(w - mu) >= dev_obs - 1e-9) ++extreme;
    ++total;
    size_t i = na;
    while (i > 0 && comb[i - 1] == n - na + (i - 1)) --i;
    if (i == 0) break;
    ++comb[i - 1];
    for (size_t j = i; j < na; ++j) comb[j] = comb[j - 1] + 1;
  }
  return static_cast<double>(extreme) / static_cast<double>(total);
}

void criterion_stats_oracles() {
  const auto t0 = std::chrono::steady_clock::now();
  check_near(stats::weighted_kappa({0, 1, 2, 3, 0}, {0, 1, 2, 3, 1}, 4),
             0.8387, 1e-4, "weighted kappa hand oracle");
  check_near(stats::kruskal_wallis({{1, 2}, {3, 4}, {5, 6}}).h, 4.571, 1e-3,
             "kruskal-wallis H hand oracle");
  check_near(stats::paired_t({1, 2, 3}, {1, 2, 4}).p, 0.4226, 5e-4,
             "paired t p hand oracle");

  const std::vector<std::pair<std::vector<double>, std::vector<double>>>
      rank_sum_fixtures = {
          {{1.2, 3.4, 5.6, 7.8}, {2.1, 4.3, 6.5, 8.7, 9.9}},
          {{1, 2, 3, 4, 5, 6}, {7, 8, 9, 10, 11, 12}},
          {{3, 1, 4, 1, 5}, {9, 2, 6, 5, 3, 5}},  // with ties
          {{10, 12}, {11, 13, 9}},
          {{2, 9, 4, 7, 8}, {1, 3, 5, 6, 10, 11, 12}},
      };
  for (size_t i = 0; i < rank_sum_fixtures.size(); ++i) {
    const auto& [a, b] = rank_sum_fixtures[i];
    const double p_impl = stats::rank_sum_test(a, b).p;
    const double p_exact = exact_rank_sum_p(a, b);
    check(std::fabs(p_impl - p_exact) <= 0.01,
          "rank-sum fixture " + std::to_string(i) + ": approx p " +
              num(p_impl) + " vs exhaustive-permutation p " + num(p_exact));
  }

  check_near(stats::ln_gamma(0.5), 0.5723649429247001, 1e-10, "ln_gamma(1/2)");
  check_near(stats::ln_gamma(10.0), 12.801827480081469, 1e-10, "ln_gamma(10)");
  check_near(stats::reg_incomplete_beta(0.5, 0.5, 0.5), 0.5, 1e-10,
             "I_0.5(1/2,1/2)");
  check_near(stats::reg_incomplete_beta(2, 2, 0.3), 0.216, 1e-10,
             "I_0.3(2,2) = 3x^2-2x^3");
  check_near(stats::reg_incomplete_beta(1, 0.5, 0.36), 0.2, 1e-10,
             "I_0.36(1,1/2) = 1-sqrt(1-x)");
  check_near(stats::reg_incomplete_gamma_p(0.5, 1.0), 0.8427007929497149,
             1e-10, "P(1/2,1) = erf(1)");
  check_near(stats::reg_incomplete_gamma_q(1.0, 2.0), std::exp(-2.0), 1e-10,
             "Q(1,2) = exp(-2)");
  check_near(stats::normal_sf(1.959963984540054), 0.025, 1e-10,
             "normal upper tail at the 97.5% point");
  check_near(stats::chi2_sf(5.991, 2), std::exp(-5.991 / 2), 1e-10,
             "chi2 survival with 2 df = exp(-x/2)");
  check_near(stats::student_t_cdf(1.0, 1), 0.75, 1e-10,
             "t cdf, 1 df (Cauchy) at 1");
  const double secs = seconds_since(t0);
  check(secs < 10.0, "oracle suite took " + num(secs) + " s, budget 10 s");
}

void criterion_kappa_calibration() {
  std::vector<int> same(100);
  for (size_t i = 0; i < same.size(); ++i) same[i] = static_cast<int>(i % 4);
  check(stats::weighted_kappa(same, same, 4) == 1.0,
        "identical rating lists must give kappa exactly 1");

  rng::SplitMix64 g(20240601);
  std::vector<int> ra, rb;
  for (int i = 0; i < 10000; ++i) {
    ra.push_back(static_cast<int>(g.below(4)));
    rb.push_back(static_cast<int>(g.below(4)));
  }
  const double k0 = stats::weighted_kappa(ra, rb, 4);
  check(std::fabs(k0) < 0.05,
        "independent uniform ratings (n=10000) gave kappa " + num(k0) +
            ", want |kappa| < 0.05");

  check(stats::landis_koch(0.45) == "moderate",
        "kappa 0.45 must read as moderate, got " + stats::landis_koch(0.45));
  check(stats::landis_koch(0.28) == "fair",
        "kappa 0.28 must read as fair, got " + stats::landis_koch(0.28));
}

void criterion_severity_bins() {
  const auto sev = [](int total) { return classify_severity(total); };
  check(sev(0) == Severity::kMild, "total 0 must classify mild");
  check(sev(11) == Severity::kMild, "total 11 must classify mild");
  check(sev(12) == Severity::kModerate, "total 12 must classify moderate");
  check(sev(21) == Severity::kModerate, "total 21 must classify moderate");
  check(sev(22) == Severity::kSevere, "total 22 must classify severe");
  check(sev(39) == Severity::kSevere, "total 39 must classify severe");
  check(severity_label(Severity::kMild) == "mild" &&
            severity_label(Severity::kModerate) == "moderate" &&
            severity_label(Severity::kSevere) == "severe",
        "severity labels must read mild/moderate/severe");
}

void criterion_registration_recovery() {
  const Template& tmpl = canonical_template();
  const double deg = std::acos(-1.0) / 180.0;
  // translations in mm, rotations in degrees; largest pose sits at the
  // stated 10 mm / 10 degree limit
  const std::array<std::array<double, 6>, 3> poses = {{
      {4, -3, 2, 2, -3, 1},
      {-8, 6, -5, -6, 4, 8},
      {10, -10, 7, 10, -8, -10},
  }};
  for (const auto& q : poses) {
    AffineParams p{};
    for (int i = 0; i < 3; ++i) p[i] = q[i];
    for (int i = 3; i < 6; ++i) p[i] = q[i] * deg;
    const AffineTransform t0 = AffineTransform::from_params(p);
    const Volume moving = resample(tmpl.volume, t0, tmpl.volume.grid());

    RegistrationConfig cfg;
    cfg.dof = 6;
    RegistrationTrace trace;
    const auto start = std::chrono::steady_clock::now();
    const AffineTransform rec = register_affine(moving, tmpl, cfg, &trace);
    const double secs = seconds_since(start);
    const std::string tag = " (pose " + num(q[0]) + "," + num(q[1]) + "," +
                            num(q[2]) + " mm / " + num(q[3]) + "," + num(q[4]) +
                            "," + num(q[5]) + " deg)";

    const Mat4 c = rec.matrix * t0.matrix;  // identity when fully recovered
    const double t_err =
        std::sqrt(c.m[3] * c.m[3] + c.m[7] * c.m[7] + c.m[11] * c.m[11]);
    const double r_err = rotation_angle(c) / deg;
    check(t_err <= 1.5, "translation residual " + num(t_err) +
                            " mm exceeds 1 voxel (1.5 mm)" + tag);
    check(r_err <= 1.0,
          "rotation residual " + num(r_err) + " deg exceeds 1 deg" + tag);
    check(secs <= 60.0,
          "registration took " + num(secs) + " s, budget 60 s" + tag);
    for (size_t li = 0; li < trace.level_costs.size(); ++li) {
      const auto& costs = trace.level_costs[li];
      for (size_t j = 1; j < costs.size(); ++j)
        if (costs[j] > costs[j - 1] + 1e-12) {
          check(false, "cost trace not monotone at level " +
                           std::to_string(li) + " step " + std::to_string(j) +
                           tag);
          break;
        }
    }
  }
}

void criterion_end_to_end() {
  const auto t0 = std::chrono::steady_clock::now();
  const fs::path root = fs::temp_directory_path() / "ctgca_acceptance_e2e";
  fs::remove_all(root);
  fs::create_directories(root);
  const fs::path cfg = root / "cohort.json";
  write_file_bytes(cfg,
                   "{\"n\": 200, \"master_seed\": 20240601, "
                   "\"noise_sigma\": 15.0}\n");
  const fs::path cohort = root / "cohort", feats = root / "feats",
                 model = root / "model", report = root / "report";

  int rc = cli::run_cli(
      {"phantom", "--config", cfg.string(), "--out", cohort.string()});
  check(rc == 0, "phantom generation exited " + std::to_string(rc));
  if (!g_fail.empty()) return;

  rc = cli::run_cli(
      {"pipeline", (cohort / "scans").string(), "--out", feats.string()});
  check(rc == 0, "pipeline exited " + std::to_string(rc));
  if (!g_fail.empty()) return;
  check(read_file_bytes(feats / "failures.csv") == "scan_id,stage,error\n",
        "pipeline reported scan failures");

  rc = cli::run_cli({"train", "--features", (feats / "features.csv").string(),
                     "--ratings", (cohort / "truth.csv").string(), "--seed",
                     "20240601", "--out", model.string()});
  check(rc == 0, "train exited " + std::to_string(rc));
  if (!g_fail.empty()) return;

  rc = cli::run_cli({"validate", "--model", (model / "model.json").string(),
                     "--features", (feats / "features.csv").string(),
                     "--ratings", (cohort / "truth.csv").string(), "--out",
                     report.string()});
  check(rc == 0, "validate exited " + std::to_string(rc));
  if (!g_fail.empty()) return;

  const json rep = json::parse(read_file_bytes(report / "report.json"));
  const json& ag = rep["agreement"]["tool_vs_rater1"];
  const double mae = ag["mae"].get<double>();
  const double rho = ag["spearman"]["rho"].get<double>();
  const double within2 = ag["frac_within_2"].get<double>();
  check(mae <= 3.0, "test MAE " + num(mae) + " exceeds 3.0");
  check(rho >= 0.8,
        "Spearman(prediction, truth) " + num(rho) + " below 0.8");
  check(within2 >= 0.5, "fraction of signed errors within [-2,2] is " +
                            num(within2) + ", want >= 0.5");
  const char* cls[3] = {"mild", "moderate", "severe"};
  for (int c = 0; c < 3; ++c) {
    const json& acc = ag["confusion"]["class_accuracy"][c];
    long n_ref = 0;
    for (int j = 0; j < 3; ++j)
      n_ref += ag["confusion"]["counts"][c][j].get<long>();
    if (acc.is_null()) {
      check(false, std::string("severity class ") + cls[c] +
                       " absent from the test split (accuracy undefined)");
    } else {
      check(acc.get<double>() >= 0.6,
            std::string("per-class accuracy for ") + cls[c] + " is " +
                num(acc.get<double>()) + " on " + std::to_string(n_ref) +
                " scans, want >= 0.6");
    }
  }
  const double secs = seconds_since(t0);
  check(secs <= 1800.0,
        "end-to-end run took " + num(secs) + " s, budget 1800 s");
}

void criterion_split_protocol() {
  std::vector<std::string> ids;
  for (int i = 1; i <= 864; ++i) {
    char b[16];
    std::snprintf(b, sizeof b, "scan_%04d", i);
    ids.push_back(b);
  }
  const SplitAssignment s = split_dataset(ids, 7);
  const auto counts = s.counts();
  check(counts[0] == 518 && counts[1] == 173 && counts[2] == 173,
        "864 ids must split 518/173/173, got " + std::to_string(counts[0]) +
            "/" + std::to_string(counts[1]) + "/" + std::to_string(counts[2]));
  for (const auto& id : ids)
    if (!s.assignment.count(id)) {
      check(false, "id " + id + " missing from the split assignment");
      break;
    }

  std::vector<std::string> shuffled = ids;
  rng::SplitMix64 g(99);
  rng::shuffle(shuffled, g);
  check(split_dataset(shuffled, 7).assignment == s.assignment,
        "split must not depend on input order");
  check(split_dataset(ids, 8).assignment != s.assignment,
        "different seeds must give different splits");

  // Label-permutation isolation: scrambling test-split labels must leave the
  // fitted model untouched; scrambling training labels must change it.
  rng::SplitMix64 fg(5);
  std::vector<TrainingSample> base;
  for (int i = 1; i <= 40; ++i) {
    char b[16];
    std::snprintf(b, sizeof b, "s%02d", i);
    TrainingSample ts;
    for (int j = 0; j < kNumFeatures; ++j) ts.features[j] = fg.unit();
    std::array<int, kNumRegions> scores{};
    for (int j = 0; j < kNumRegions; ++j)
      scores[j] = static_cast<int>(fg.below(4));
    ts.rating = make_rating(b, "truth", scores);
    base.push_back(ts);
  }
  TrainConfig tc;
  tc.seed = 123;
  const PredictorModel m0 = train(base, tc);

  std::vector<std::string> sample_ids;
  for (const auto& ts : base) sample_ids.push_back(ts.rating.scan_id);
  const SplitAssignment sp = split_dataset(sample_ids, tc.seed);
  const auto rotate_labels = [&](Split member) {
    std::vector<TrainingSample> out = base;
    std::vector<size_t> idx;
    for (size_t i = 0; i < out.size(); ++i)
      if (sp.assignment.at(out[i].rating.scan_id) == member) idx.push_back(i);
    for (size_t i = 0; i < idx.size(); ++i) {
      const size_t from = idx[(i + 1) % idx.size()];
      out[idx[i]].rating.scores = base[from].rating.scores;
    }
    return out;
  };
  const PredictorModel m_test = train(rotate_labels(Split::kTest), tc);
  check(m_test.region_weights == m0.region_weights &&
            m_test.total_weights == m0.total_weights &&
            m_test.lambda == m0.lambda && m_test.mode == m0.mode,
        "permuting test-split labels changed the trained model (leakage)");
  const PredictorModel m_train = train(rotate_labels(Split::kTrain), tc);
  check(m_train.region_weights != m0.region_weights ||
            m_train.total_weights != m0.total_weights,
        "permuting training labels left the model unchanged");
}

void criterion_inference_budget() {
  const Template& tmpl = canonical_template();
  PredictorModel m;
  m.mode = PredictorMode::kDirectTotal;
  for (int j = 0; j <= kNumFeatures; ++j) {
    m.total_weights[j] = 0.25 * (j + 1);
    for (int r = 0; r < kNumRegions; ++r) m.region_weights[r][j] = 0.01 * j;
  }
  const auto t0 = std::chrono::steady_clock::now();
  const FeatureVector f = extract_features(tmpl.volume, tmpl);
  const Prediction pred = predict_gca(m, f);
  const double secs = seconds_since(t0);
  check(secs <= 4.0, "feature extraction + prediction took " + num(secs) +
                         " s on a 128^3 volume, budget 4 s");
  check(pred.total >= 0 && pred.total <= 39,
        "prediction left the 0-39 range");
}

// Compares two output directories file by file, ignoring manifest.json
// (it records wall-clock timings).
void check_same_tree(const fs::path& a, const fs::path& b,
                     const std::string& what) {
  std::vector<fs::path> rel;
  for (const auto& e : fs::recursive_directory_iterator(a))
    if (e.is_regular_file()) rel.push_back(fs::relative(e.path(), a));
  std::sort(rel.begin(), rel.end());
  size_t b_files = 0;
  for (const auto& e : fs::recursive_directory_iterator(b))
    if (e.is_regular_file()) ++b_files;
  check(b_files == rel.size(),
        what + ": rerun produced " + std::to_string(b_files) +
            " files, first run " + std::to_string(rel.size()));
  for (const auto& r : rel) {
    if (r.filename() == "manifest.json") continue;
    if (!fs::exists(b / r)) {
      check(false, what + ": rerun lacks " + r.string());
      continue;
    }
    if (read_file_bytes(a / r) != read_file_bytes(b / r))
      check(false, what + ": " + r.string() + " differs between reruns");
  }
}

void criterion_round_trips() {
  // NIfTI write -> read identity
  Volume v;
  v.dims = {7, 6, 5};
  v.spacing = {1.5, 2.0, 2.5};
  v.affine = Mat4::identity();
  for (int i = 0; i < 3; ++i) v.affine(i, i) = v.spacing[i];
  v.affine(0, 3) = -5.25;
  v.affine(1, 3) = 3.5;
  v.affine(2, 3) = 2.0;
  v.data.resize(v.voxel_count());
  for (size_t i = 0; i < v.data.size(); ++i)
    v.data[i] = static_cast<float>(std::sin(0.37 * static_cast<double>(i)) *
                                       500.0 -
                                   100.0);
  v.validate();
  const std::vector<uint8_t> bytes = write_nifti_bytes(v);
  const Volume r = read_nifti_bytes(bytes, "roundtrip");
  check(r.dims == v.dims, "nifti round trip changed dims");
  check(r.data == v.data, "nifti round trip changed voxel data");
  bool geom = true;
  for (int i = 0; i < 3; ++i)
    if (std::fabs(r.spacing[i] - v.spacing[i]) > 1e-5) geom = false;
  for (int i = 0; i < 16; ++i)
    if (std::fabs(r.affine.m[i] - v.affine.m[i]) > 1e-4) geom = false;
  check(geom, "nifti round trip distorted spacing or affine");
  check(write_nifti_bytes(r) == bytes, "second nifti write not byte-identical");

  // rating CSV parse -> write identity
  std::vector<GcaRating> ratings;
  ratings.push_back(make_rating("scan_a", "rater1", {0, 1, 2, 3, 0, 1, 2, 3, 0,
                                                     1, 2, 3, 0}));
  ratings.push_back(make_rating("scan_b", "rater1", {3, 3, 3, 3, 3, 3, 3, 3, 3,
                                                     3, 3, 3, 3}));
  ratings.back().set_unassessable(GcaRegion::kTemporalL);
  ratings.push_back(make_rating("scan_a", "rater2", {1, 1, 1, 1, 1, 1, 1, 1, 1,
                                                     1, 1, 1, 1}));
  const std::string csv = write_rating_csv(ratings);
  const std::vector<GcaRating> parsed = parse_rating_csv(csv);
  check(parsed.size() == ratings.size(), "rating csv round trip lost rows");
  check(write_rating_csv(parsed) == csv,
        "rating csv parse -> write not byte-identical");
  bool same = parsed.size() == ratings.size();
  for (size_t i = 0; same && i < parsed.size(); ++i)
    same = parsed[i].scan_id == ratings[i].scan_id &&
           parsed[i].rater_id == ratings[i].rater_id &&
           parsed[i].assessable == ratings[i].assessable &&
           [&] {
             for (GcaRegion reg : all_regions())
               if (ratings[i].assessable[static_cast<size_t>(reg)] &&
                   parsed[i].score(reg) != ratings[i].score(reg))
                 return false;
             return true;
           }();
  check(same, "rating csv round trip changed cell values");

  // every CLI command byte-identical across reruns with the same seed
  const fs::path root = fs::temp_directory_path() / "ctgca_acceptance_cli";
  fs::remove_all(root);
  fs::create_directories(root);
  const fs::path cfg = root / "cfg.json";
  write_file_bytes(cfg,
                   "{\"n\": 4, \"master_seed\": 424242, \"noise_sigma\": 8.0, "
                   "\"pose_translation_mm\": 3.0, \"pose_rotation_deg\": "
                   "3.0}\n");
  const auto run = [&](const std::vector<std::string>& args,
                       const std::string& what) {
    const int rc = cli::run_cli(args);
    check(rc == 0, what + " exited " + std::to_string(rc));
    return rc == 0;
  };
  const fs::path pa = root / "phantom_a", pb = root / "phantom_b";
  if (!run({"phantom", "--config", cfg.string(), "--out", pa.string()},
           "phantom run 1") ||
      !run({"phantom", "--config", cfg.string(), "--out", pb.string()},
           "phantom run 2"))
    return;
  check_same_tree(pa, pb, "phantom");

  const fs::path fa = root / "pipe_a", fb = root / "pipe_b";
  if (!run({"pipeline", (pa / "scans").string(), "--out", fa.string()},
           "pipeline run 1") ||
      !run({"pipeline", (pa / "scans").string(), "--out", fb.string()},
           "pipeline run 2"))
    return;
  check_same_tree(fa, fb, "pipeline");

  const fs::path ta = root / "train_a", tb = root / "train_b";
  if (!run({"train", "--features", (fa / "features.csv").string(),
            "--ratings", (pa / "truth.csv").string(), "--seed", "9", "--out",
            ta.string()},
           "train run 1") ||
      !run({"train", "--features", (fa / "features.csv").string(),
            "--ratings", (pa / "truth.csv").string(), "--seed", "9", "--out",
            tb.string()},
           "train run 2"))
    return;
  check_same_tree(ta, tb, "train");

  const fs::path va = root / "val_a", vb = root / "val_b";
  const std::vector<std::string> vargs = {
      "validate",     "--model",  (ta / "model.json").string(), "--features",
      (fa / "features.csv").string(), "--ratings",
      (pa / "truth.csv").string(),    "--covariates",
      (pa / "cohort.csv").string()};
  auto with_out = [&](const fs::path& out) {
    std::vector<std::string> a = vargs;
    a.push_back("--out");
    a.push_back(out.string());
    return a;
  };
  if (!run(with_out(va), "validate run 1") ||
      !run(with_out(vb), "validate run 2"))
    return;
  check_same_tree(va, vb, "validate");
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<int> wanted;
  for (int i = 1; i < argc; ++i) wanted.push_back(std::atoi(argv[i]));
  const auto selected = [&](int id) {
    return wanted.empty() ||
           std::find(wanted.begin(), wanted.end(), id) != wanted.end();
  };

  const std::vector<std::pair<const char*, std::function<void()>>> criteria = {
      {"statistics oracle suite", criterion_stats_oracles},
      {"kappa null and perfect calibration", criterion_kappa_calibration},
      {"severity bin boundaries", criterion_severity_bins},
      {"rigid registration recovery", criterion_registration_recovery},
      {"200-phantom end-to-end accuracy", criterion_end_to_end},
      {"split protocol and label isolation", criterion_split_protocol},
      {"per-scan inference budget", criterion_inference_budget},
      {"format round trips and rerun identity", criterion_round_trips},
  };

  int failures = 0;
  for (size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!selected(id)) continue;
    failures += run_criterion(id, criteria[i].first, criteria[i].second);
  }
  if (failures == 0)
    std::printf("all criteria passed\n");
  else
    std::printf("%d criteria FAILED\n", failures);
  return failures;
}
