#include "ctgca/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "CLI11.hpp"
#include "ctgca/gca.hpp"
#include "ctgca/manifest.hpp"
#include "ctgca/nifti.hpp"
#include "ctgca/phantom.hpp"
#include "ctgca/predictor.hpp"
#include "ctgca/preprocess.hpp"
#include "ctgca/report.hpp"
#include "json.hpp"

namespace ctgca::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// ---- small text helpers ---------------------------------------------------

std::string fmt17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string join(const std::vector<std::string>& parts,
                 const std::string& sep) {
  std::string out;
  for (size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

std::vector<std::string> split_lines(const std::string& text) {
  std::vector<std::string> lines;
  size_t pos = 0;
  while (pos < text.size()) {
    size_t nl = text.find('\n', pos);
    if (nl == std::string::npos) nl = text.size();
    std::string line = text.substr(pos, nl - pos);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(std::move(line));
    pos = nl + 1;
  }
  while (!lines.empty() && lines.back().empty()) lines.pop_back();
  return lines;
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  size_t pos = 0;
  while (true) {
    const size_t c = line.find(',', pos);
    if (c == std::string::npos) {
      fields.push_back(line.substr(pos));
      return fields;
    }
    fields.push_back(line.substr(pos, c - pos));
    pos = c + 1;
  }
}

std::string csv_quote(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += "\"\"";
    else out += c;
  }
  out += "\"";
  return out;
}

double parse_double_cell(const std::string& s, const std::string& ctx) {
  if (s.empty()) throw FormatError(ctx + ": empty numeric cell");
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size())
    throw FormatError(ctx + ": bad number \"" + s + "\"");
  return v;
}

long parse_int_cell(const std::string& s, const std::string& ctx) {
  if (s.empty()) throw FormatError(ctx + ": empty integer cell");
  char* end = nullptr;
  const long v = std::strtol(s.c_str(), &end, 10);
  if (end != s.c_str() + s.size())
    throw FormatError(ctx + ": bad integer \"" + s + "\"");
  return v;
}

// ---- JSON config loading --------------------------------------------------

// Configuration-style files (cohort config, model.json, split.json) map
// problems to UsageError: a wrong path or malformed structure is a usage /
// config error (exit 2), per the CLI contract.
std::string read_config_bytes(const std::string& path, const char* what) {
  try {
    return read_file_bytes(path);
  } catch (const Error& e) {
    throw UsageError(std::string(what) + ": " + e.what());
  }
}

json parse_config_json(const std::string& bytes, const char* what) {
  try {
    return json::parse(bytes);
  } catch (const json::parse_error& e) {
    throw UsageError(std::string(what) + ": " + e.what());
  }
}

void reject_unknown_fields(const json& j, const std::set<std::string>& known,
                           const char* what) {
  if (!j.is_object())
    throw UsageError(std::string(what) + ": expected a JSON object");
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!known.count(it.key()))
      throw UsageError(std::string(what) + ": unknown field \"" + it.key() +
                       "\"");
}

void get_int_field(const json& j, const char* key, int& target,
                   const char* what) {
  if (!j.contains(key)) return;
  if (!j[key].is_number_integer())
    throw UsageError(std::string(what) + ": field \"" + key +
                     "\" must be an integer");
  target = j[key].get<int>();
}

void get_u64_field(const json& j, const char* key, std::uint64_t& target,
                   const char* what) {
  if (!j.contains(key)) return;
  if (!j[key].is_number_integer() && !j[key].is_number_unsigned())
    throw UsageError(std::string(what) + ": field \"" + key +
                     "\" must be an integer");
  target = j[key].get<std::uint64_t>();
}

void get_double_field(const json& j, const char* key, double& target,
                      const char* what) {
  if (!j.contains(key)) return;
  if (!j[key].is_number())
    throw UsageError(std::string(what) + ": field \"" + key +
                     "\" must be a number");
  target = j[key].get<double>();
}

// ---- CohortSpec <-> JSON --------------------------------------------------

CohortSpec cohort_spec_from_json(const json& j) {
  static const char* what = "config";
  reject_unknown_fields(j,
                        {"n", "master_seed", "score_distribution", "age_model",
                         "cognition_model", "noise_sigma",
                         "pose_translation_mm", "pose_rotation_deg"},
                        what);
  CohortSpec c;
  get_int_field(j, "n", c.n, what);
  get_u64_field(j, "master_seed", c.master_seed, what);
  get_double_field(j, "noise_sigma", c.noise_sigma, what);
  get_double_field(j, "pose_translation_mm", c.pose_translation_mm, what);
  get_double_field(j, "pose_rotation_deg", c.pose_rotation_deg, what);
  if (j.contains("age_model")) {
    const json& a = j["age_model"];
    reject_unknown_fields(a, {"intercept", "slope", "sd", "min_age", "max_age"},
                          "config.age_model");
    get_double_field(a, "intercept", c.age_model.intercept, "config.age_model");
    get_double_field(a, "slope", c.age_model.slope, "config.age_model");
    get_double_field(a, "sd", c.age_model.sd, "config.age_model");
    get_double_field(a, "min_age", c.age_model.min_age, "config.age_model");
    get_double_field(a, "max_age", c.age_model.max_age, "config.age_model");
  }
  if (j.contains("cognition_model")) {
    const json& g = j["cognition_model"];
    reject_unknown_fields(g, {"midpoint", "scale"}, "config.cognition_model");
    get_double_field(g, "midpoint", c.cognition_model.midpoint,
                     "config.cognition_model");
    get_double_field(g, "scale", c.cognition_model.scale,
                     "config.cognition_model");
  }
  if (j.contains("score_distribution")) {
    const json& d = j["score_distribution"];
    if (!d.is_array() || d.size() != static_cast<size_t>(kNumRegions))
      throw UsageError(
          "config: \"score_distribution\" must be an array of 13 rows");
    for (size_t r = 0; r < d.size(); ++r) {
      if (!d[r].is_array() || d[r].size() != 4)
        throw UsageError("config: score_distribution[" + std::to_string(r) +
                         "] must have 4 probabilities");
      for (size_t s = 0; s < 4; ++s) {
        if (!d[r][s].is_number())
          throw UsageError("config: score_distribution[" + std::to_string(r) +
                           "][" + std::to_string(s) + "] must be a number");
        c.score_distribution[r][s] = d[r][s].get<double>();
      }
    }
  }
  return c;
}

json cohort_spec_to_json(const CohortSpec& c) {
  json j;
  j["n"] = c.n;
  j["master_seed"] = c.master_seed;
  j["noise_sigma"] = c.noise_sigma;
  j["pose_translation_mm"] = c.pose_translation_mm;
  j["pose_rotation_deg"] = c.pose_rotation_deg;
  j["age_model"] = {{"intercept", c.age_model.intercept},
                    {"slope", c.age_model.slope},
                    {"sd", c.age_model.sd},
                    {"min_age", c.age_model.min_age},
                    {"max_age", c.age_model.max_age}};
  j["cognition_model"] = {{"midpoint", c.cognition_model.midpoint},
                          {"scale", c.cognition_model.scale}};
  j["score_distribution"] = c.score_distribution;
  return j;
}

// ---- RegistrationConfig <-> JSON ------------------------------------------

RegistrationConfig registration_config_from_json(const json& j) {
  static const char* what = "config";
  reject_unknown_fields(
      j, {"dof", "pyramid_factors", "max_iters", "convergence_tol"}, what);
  RegistrationConfig c;
  get_int_field(j, "dof", c.dof, what);
  get_int_field(j, "max_iters", c.max_iters, what);
  get_double_field(j, "convergence_tol", c.convergence_tol, what);
  if (j.contains("pyramid_factors")) {
    if (!j["pyramid_factors"].is_array())
      throw UsageError("config: \"pyramid_factors\" must be an array");
    c.pyramid_factors.clear();
    for (const auto& f : j["pyramid_factors"]) {
      if (!f.is_number_integer())
        throw UsageError("config: pyramid factors must be integers");
      c.pyramid_factors.push_back(f.get<int>());
    }
  }
  try {
    c.validate();
  } catch (const Error& e) {
    throw UsageError(std::string("config: ") + e.what());
  }
  return c;
}

json registration_config_to_json(const RegistrationConfig& c) {
  return json{{"dof", c.dof},
              {"pyramid_factors", c.pyramid_factors},
              {"max_iters", c.max_iters},
              {"convergence_tol", c.convergence_tol}};
}

// ---- features.csv ---------------------------------------------------------

std::array<std::string, kNumFeatures> feature_names() {
  std::array<std::string, kNumFeatures> names;
  for (int i = 0; i < kNumRegions; ++i)
    names[static_cast<size_t>(i)] = region_name(all_regions()[i]);
  names[13] = "global_csf_fraction";
  names[14] = "ventricle_brain_ratio";
  return names;
}

std::string features_header() {
  const auto names = feature_names();
  std::string h = "scan_id";
  for (const std::string& n : names) h += "," + n;
  return h;
}

std::string write_features_csv(
    const std::vector<std::pair<std::string, FeatureVector>>& rows) {
  std::string out = features_header() + "\n";
  for (const auto& [id, f] : rows) {
    out += id;
    for (double v : f) out += "," + fmt17(v);
    out += "\n";
  }
  return out;
}

std::map<std::string, FeatureVector> parse_features_csv(
    const std::string& text) {
  const std::vector<std::string> lines = split_lines(text);
  if (lines.empty()) throw FormatError("features: empty file");
  if (lines[0] != features_header())
    throw FormatError("features: unexpected header \"" + lines[0] + "\"");
  std::map<std::string, FeatureVector> out;
  for (size_t i = 1; i < lines.size(); ++i) {
    const std::string ctx = "features row " + std::to_string(i + 1);
    const std::vector<std::string> cells = split_fields(lines[i]);
    if (cells.size() != 1 + static_cast<size_t>(kNumFeatures))
      throw FormatError(ctx + ": expected " +
                        std::to_string(1 + kNumFeatures) + " cells, found " +
                        std::to_string(cells.size()));
    if (cells[0].empty()) throw FormatError(ctx + ": empty scan_id");
    FeatureVector f{};
    for (int k = 0; k < kNumFeatures; ++k)
      f[static_cast<size_t>(k)] =
          parse_double_cell(cells[static_cast<size_t>(k) + 1], ctx);
    if (!out.emplace(cells[0], f).second)
      throw FormatError(ctx + ": duplicate scan_id \"" + cells[0] + "\"");
  }
  return out;
}

// ---- cohort.csv (covariates) ----------------------------------------------

constexpr const char* kCohortHeader =
    "scan_id,cohort,age,sex,amt_score,ocs_tasks_impaired";

std::string write_cohort_csv(const std::vector<CohortScan>& scans) {
  std::string out = std::string(kCohortHeader) + "\n";
  for (const CohortScan& s : scans) {
    const CohortRecord& r = s.record;
    out += r.scan_id + "," + r.cohort + "," + fmt17(r.age) + "," + r.sex + ",";
    if (r.amt_score) out += std::to_string(*r.amt_score);
    out += ",";
    if (r.ocs_tasks_impaired) out += std::to_string(*r.ocs_tasks_impaired);
    out += "\n";
  }
  return out;
}

struct CovariateRow {
  std::optional<double> age;
  std::optional<int> amt_score;
  std::optional<int> ocs_tasks_impaired;
};

std::map<std::string, CovariateRow> parse_cohort_csv(const std::string& text) {
  const std::vector<std::string> lines = split_lines(text);
  if (lines.empty()) throw FormatError("covariates: empty file");
  if (lines[0] != kCohortHeader)
    throw FormatError("covariates: unexpected header \"" + lines[0] + "\"");
  std::map<std::string, CovariateRow> out;
  for (size_t i = 1; i < lines.size(); ++i) {
    const std::string ctx = "covariates row " + std::to_string(i + 1);
    const std::vector<std::string> cells = split_fields(lines[i]);
    if (cells.size() != 6)
      throw FormatError(ctx + ": expected 6 cells, found " +
                        std::to_string(cells.size()));
    if (cells[0].empty()) throw FormatError(ctx + ": empty scan_id");
    CovariateRow r;
    if (!cells[2].empty()) {
      const double age = parse_double_cell(cells[2], ctx);
      if (!(age > 0.0) || !std::isfinite(age))
        throw FormatError(ctx + ": age must be positive and finite");
      r.age = age;
    }
    if (!cells[4].empty()) {
      const long amt = parse_int_cell(cells[4], ctx);
      if (amt < 0 || amt > 10)
        throw FormatError(ctx + ": amt_score must lie in 0-10");
      r.amt_score = static_cast<int>(amt);
    }
    if (!cells[5].empty()) {
      const long ocs = parse_int_cell(cells[5], ctx);
      if (ocs < 0) throw FormatError(ctx + ": ocs_tasks_impaired must be >= 0");
      r.ocs_tasks_impaired = static_cast<int>(ocs);
    }
    if (!out.emplace(cells[0], r).second)
      throw FormatError(ctx + ": duplicate scan_id \"" + cells[0] + "\"");
  }
  return out;
}

// ---- ratings loading ------------------------------------------------------

// One sheet = one rater: multiple rows for a scan would make "the" reference
// total ambiguous, so they are rejected as a usage error.
std::map<std::string, GcaRating> load_single_rater_sheet(
    const std::string& bytes, const char* what) {
  const std::vector<GcaRating> rows = parse_rating_csv(bytes);
  std::map<std::string, GcaRating> out;
  for (const GcaRating& r : rows)
    if (!out.emplace(r.scan_id, r).second)
      throw UsageError(std::string(what) + ": multiple rows for scan \"" +
                       r.scan_id + "\"; supply a single-rater sheet");
  return out;
}

// ---- model.json -----------------------------------------------------------

json model_to_json(const PredictorModel& m) {
  json j;
  j["format"] = kModelFormat;
  j["mode"] = predictor_mode_name(m.mode);
  j["lambda"] = m.lambda;
  j["seed"] = m.seed;
  j["split_hash"] = m.split_hash;
  j["feature_names"] = feature_names();
  json rw = json::array();
  for (const auto& row : m.region_weights) rw.push_back(row);
  j["region_weights"] = rw;
  j["total_weights"] = m.total_weights;
  return j;
}

PredictorModel model_from_json(const json& j) {
  static const char* what = "model";
  reject_unknown_fields(j,
                        {"format", "mode", "lambda", "seed", "split_hash",
                         "feature_names", "region_weights", "total_weights"},
                        what);
  for (const char* key : {"format", "mode", "lambda", "seed", "split_hash",
                          "region_weights", "total_weights"})
    if (!j.contains(key))
      throw UsageError(std::string(what) + ": missing field \"" + key + "\"");
  if (!j["format"].is_string() || j["format"].get<std::string>() != kModelFormat)
    throw UsageError(std::string(what) + ": unsupported format (expected \"" +
                     kModelFormat + "\")");
  PredictorModel m;
  const std::string mode = j["mode"].is_string() ? j["mode"].get<std::string>()
                                                 : std::string();
  if (mode == predictor_mode_name(PredictorMode::kSumOfRegions))
    m.mode = PredictorMode::kSumOfRegions;
  else if (mode == predictor_mode_name(PredictorMode::kDirectTotal))
    m.mode = PredictorMode::kDirectTotal;
  else
    throw UsageError(std::string(what) + ": unknown mode \"" + mode + "\"");
  if (!j["lambda"].is_number())
    throw UsageError(std::string(what) + ": \"lambda\" must be a number");
  m.lambda = j["lambda"].get<double>();
  get_u64_field(j, "seed", m.seed, what);
  if (!j["split_hash"].is_string())
    throw UsageError(std::string(what) + ": \"split_hash\" must be a string");
  m.split_hash = j["split_hash"].get<std::string>();
  const json& rw = j["region_weights"];
  if (!rw.is_array() || rw.size() != static_cast<size_t>(kNumRegions))
    throw UsageError(std::string(what) +
                     ": \"region_weights\" must have 13 rows");
  for (size_t r = 0; r < rw.size(); ++r) {
    if (!rw[r].is_array() || rw[r].size() != kNumFeatures + 1)
      throw UsageError(std::string(what) + ": region_weights[" +
                       std::to_string(r) + "] must have 16 numbers");
    for (size_t k = 0; k < rw[r].size(); ++k) {
      if (!rw[r][k].is_number())
        throw UsageError(std::string(what) + ": region_weights[" +
                         std::to_string(r) + "][" + std::to_string(k) +
                         "] must be a number");
      m.region_weights[r][k] = rw[r][k].get<double>();
    }
  }
  const json& tw = j["total_weights"];
  if (!tw.is_array() || tw.size() != kNumFeatures + 1)
    throw UsageError(std::string(what) +
                     ": \"total_weights\" must have 16 numbers");
  for (size_t k = 0; k < tw.size(); ++k) {
    if (!tw[k].is_number())
      throw UsageError(std::string(what) + ": total_weights[" +
                       std::to_string(k) + "] must be a number");
    m.total_weights[k] = tw[k].get<double>();
  }
  return m;
}

json split_to_json(const SplitAssignment& split, std::uint64_t seed) {
  json j;
  j["seed"] = seed;
  j["hash"] = hash_split(split);
  const auto counts = split.counts();
  j["counts"] = {{"train", counts[0]},
                 {"optimisation", counts[1]},
                 {"test", counts[2]}};
  json a = json::object();
  for (const auto& [id, s] : split.assignment) a[id] = split_name(s);
  j["assignment"] = a;
  return j;
}

void ensure_out_dir(const std::string& out_dir) {
  if (out_dir.empty()) throw UsageError("--out is required");
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec)
    throw UsageError("cannot create output directory " + out_dir + ": " +
                     ec.message());
}

}  // namespace

// ---- phantom --------------------------------------------------------------

int run_phantom(const PhantomArgs& args) {
  ensure_out_dir(args.out_dir);
  if (args.config_path.empty())
    throw UsageError("phantom: --config <cohort-config.json> is required");
  const StageTimer t_total;
  RunManifest mf(args.command_line);

  const std::string cfg_bytes = read_config_bytes(args.config_path.c_str(),
                                                  "config");
  CohortSpec spec = cohort_spec_from_json(
      parse_config_json(cfg_bytes, "config"));
  if (args.seed) spec.master_seed = *args.seed;
  if (args.n) spec.n = *args.n;
  try {
    spec.validate();
  } catch (const Error& e) {
    throw UsageError(std::string("config: ") + e.what());
  }
  mf.add_input("config", cfg_bytes);
  mf.set_seed(spec.master_seed);
  mf.set_config(cohort_spec_to_json(spec));

  const fs::path out(args.out_dir);
  std::error_code ec;
  fs::create_directories(out / "scans", ec);
  if (ec)
    throw UsageError("cannot create output directory " +
                     (out / "scans").string() + ": " + ec.message());

  std::vector<GcaRating> truths;
  std::vector<CohortScan> scans;
  json cohort_meta = json::array();
  const StageTimer t_generate;
  auto last = std::chrono::steady_clock::now();
  generate_cohort(spec, [&](const CohortScan& scan, const Volume& v) {
    write_nifti((out / "scans" / (scan.scan_id + ".nii")).string(), v);
    truths.push_back(scan.rating);
    scans.push_back(scan);
    json meta;
    meta["scan_id"] = scan.scan_id;
    meta["seed"] = scan.spec.seed;
    meta["noise_sigma"] = scan.spec.noise_sigma;
    meta["pose_params"] = scan.spec.pose.params;
    json scores = json::array();
    for (GcaRegion r : all_regions()) scores.push_back(scan.rating.score(r));
    meta["region_scores"] = scores;
    meta["total"] = total_score(scan.rating);
    meta["age"] = scan.record.age;
    meta["sex"] = scan.record.sex;
    meta["amt_score"] =
        scan.record.amt_score ? json(*scan.record.amt_score) : json();
    meta["ocs_tasks_impaired"] = scan.record.ocs_tasks_impaired
                                     ? json(*scan.record.ocs_tasks_impaired)
                                     : json();
    meta["impaired"] = scan.impaired;
    cohort_meta.push_back(meta);
    const auto now = std::chrono::steady_clock::now();
    mf.add_scan_seconds(scan.scan_id,
                        std::chrono::duration<double>(now - last).count());
    last = now;
  });
  mf.add_stage_seconds("generate", t_generate.seconds());

  write_file_bytes(out / "truth.csv", write_rating_csv(truths));
  write_file_bytes(out / "cohort.csv", write_cohort_csv(scans));
  write_file_bytes(out / "cohort.json", cohort_meta.dump(2) + "\n");
  mf.add_stage_seconds("total", t_total.seconds());
  mf.write(out);
  std::cout << "phantom: wrote " << scans.size() << " scans to "
            << (out / "scans").string() << "\n";
  return 0;
}

// ---- pipeline -------------------------------------------------------------

int run_pipeline(const PipelineArgs& args) {
  ensure_out_dir(args.out_dir);
  const StageTimer t_total;
  RunManifest mf(args.command_line);

  RegistrationConfig cfg;
  if (!args.config_path.empty()) {
    const std::string bytes = read_config_bytes(args.config_path.c_str(),
                                                "config");
    cfg = registration_config_from_json(parse_config_json(bytes, "config"));
    mf.add_input("config", bytes);
  }
  mf.set_config(registration_config_to_json(cfg));

  if (!fs::is_directory(args.scan_dir))
    throw UsageError("pipeline: scan directory not found: " + args.scan_dir);
  std::vector<fs::path> scan_files;
  for (const auto& entry : fs::directory_iterator(args.scan_dir))
    if (entry.is_regular_file() && entry.path().extension() == ".nii")
      scan_files.push_back(entry.path());
  std::sort(scan_files.begin(), scan_files.end());
  if (scan_files.empty())
    throw UsageError("pipeline: no .nii scans found in " + args.scan_dir);

  const fs::path out(args.out_dir);
  std::error_code ec;
  fs::create_directories(out / "transforms", ec);
  if (ec)
    throw UsageError("cannot create output directory " +
                     (out / "transforms").string() + ": " + ec.message());

  const StageTimer t_template;
  const Template& tmpl = canonical_template();
  mf.add_stage_seconds("template", t_template.seconds());

  std::vector<std::pair<std::string, FeatureVector>> feature_rows;
  std::string failures = "scan_id,stage,error\n";
  size_t n_failed = 0;
  for (const fs::path& path : scan_files) {
    const std::string id = path.stem().string();
    const StageTimer t_scan;
    std::string stage = "read";
    try {
      const std::string bytes = read_file_bytes(path);
      mf.add_input("scans/" + path.filename().string(), bytes);
      const Volume raw = read_nifti_bytes(
          std::vector<std::uint8_t>(bytes.begin(), bytes.end()),
          path.filename().string());
      stage = "extract";
      const ExtractionResult ex = extract_brain(raw);
      stage = "register";
      const AffineTransform t = register_affine(ex.masked, tmpl, cfg);
      stage = "resample";
      const Volume warped = to_template_space(raw, t, tmpl);
      stage = "features";
      const FeatureVector f = extract_features(warped, tmpl);
      feature_rows.emplace_back(id, f);
      json tj;
      tj["scan_id"] = id;
      tj["params"] = t.params;
      tj["matrix"] = t.matrix.m;
      write_file_bytes(out / "transforms" / (id + "_transform.json"),
                       tj.dump(2) + "\n");
    } catch (const Error& e) {
      ++n_failed;
      failures += id + "," + stage + "," + csv_quote(e.what()) + "\n";
      std::cerr << "pipeline: scan " << id << " failed at " << stage << ": "
                << e.what() << "\n";
    }
    mf.add_scan_seconds(id, t_scan.seconds());
  }

  write_file_bytes(out / "features.csv", write_features_csv(feature_rows));
  write_file_bytes(out / "failures.csv", failures);
  mf.add_stage_seconds("total", t_total.seconds());
  mf.write(out);
  std::cout << "pipeline: " << feature_rows.size() << " of "
            << scan_files.size() << " scans processed\n";
  return n_failed == scan_files.size() ? 1 : 0;
}

// ---- train ----------------------------------------------------------------

int run_train(const TrainArgs& args) {
  ensure_out_dir(args.out_dir);
  const StageTimer t_total;
  RunManifest mf(args.command_line);

  TrainConfig cfg;
  if (!args.config_path.empty()) {
    const std::string bytes = read_config_bytes(args.config_path.c_str(),
                                                "config");
    const json j = parse_config_json(bytes, "config");
    reject_unknown_fields(j, {"lambda_grid", "seed"}, "config");
    get_u64_field(j, "seed", cfg.seed, "config");
    if (j.contains("lambda_grid")) {
      if (!j["lambda_grid"].is_array())
        throw UsageError("config: \"lambda_grid\" must be an array");
      cfg.lambda_grid.clear();
      for (const auto& l : j["lambda_grid"]) {
        if (!l.is_number())
          throw UsageError("config: lambda grid entries must be numbers");
        cfg.lambda_grid.push_back(l.get<double>());
      }
    }
    mf.add_input("config", bytes);
  }
  if (args.seed) cfg.seed = *args.seed;
  if (!args.lambda_grid.empty()) cfg.lambda_grid = args.lambda_grid;
  try {
    cfg.validate();
  } catch (const Error& e) {
    throw UsageError(std::string("config: ") + e.what());
  }

  const StageTimer t_load;
  std::string fbytes, rbytes;
  try {
    fbytes = read_file_bytes(args.features_path);
    rbytes = read_file_bytes(args.ratings_path);
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
  mf.add_input("features", fbytes);
  mf.add_input("ratings", rbytes);
  mf.set_seed(cfg.seed);
  mf.set_config(json{{"seed", cfg.seed}, {"lambda_grid", cfg.lambda_grid}});

  const std::map<std::string, FeatureVector> feats = parse_features_csv(fbytes);
  const std::map<std::string, GcaRating> ratings =
      load_single_rater_sheet(rbytes, "ratings");
  std::vector<std::string> missing;
  for (const auto& [id, f] : feats)
    if (!ratings.count(id)) missing.push_back(id);
  if (!missing.empty())
    throw UsageError("train: no rating for scan ids: " + join(missing, ", "));

  std::vector<TrainingSample> dataset;
  for (const auto& [id, f] : feats)
    dataset.push_back({f, impute_homologous(ratings.at(id))});
  mf.add_stage_seconds("load", t_load.seconds());

  const StageTimer t_train;
  std::vector<TrainSelection> selection;
  const PredictorModel model = train(dataset, cfg, &selection);
  mf.add_stage_seconds("train", t_train.seconds());

  std::vector<std::string> ids;
  for (const auto& [id, f] : feats) ids.push_back(id);
  const SplitAssignment split = split_dataset(ids, cfg.seed);

  const fs::path out(args.out_dir);
  write_file_bytes(out / "model.json", model_to_json(model).dump(2) + "\n");
  write_file_bytes(out / "split.json",
                   split_to_json(split, cfg.seed).dump(2) + "\n");
  std::string sel = "mode,lambda,optimisation_mae,selected\n";
  for (const TrainSelection& e : selection)
    sel += predictor_mode_name(e.mode) + "," + format_g6(e.lambda) + "," +
           format_g6(e.opt_mae) + "," + (e.selected ? "1" : "0") + "\n";
  write_file_bytes(out / "selection.csv", sel);
  mf.add_stage_seconds("total", t_total.seconds());
  mf.write(out);
  std::cout << "train: selected " << predictor_mode_name(model.mode)
            << " with lambda " << format_g6(model.lambda) << "\n";
  return 0;
}

// ---- validate -------------------------------------------------------------

int run_validate(const ValidateArgs& args) {
  ensure_out_dir(args.out_dir);
  const StageTimer t_total;
  RunManifest mf(args.command_line);

  const StageTimer t_load;
  const std::string mbytes = read_config_bytes(args.model_path.c_str(),
                                               "model");
  const PredictorModel model =
      model_from_json(parse_config_json(mbytes, "model"));
  mf.add_input("model", mbytes);

  std::string fbytes, rbytes;
  try {
    fbytes = read_file_bytes(args.features_path);
    rbytes = read_file_bytes(args.ratings_path);
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
  mf.add_input("features", fbytes);
  mf.add_input("ratings", rbytes);
  mf.set_seed(model.seed);

  const std::map<std::string, FeatureVector> feats = parse_features_csv(fbytes);
  const std::map<std::string, GcaRating> ratings =
      load_single_rater_sheet(rbytes, "ratings");
  std::vector<std::string> missing;
  std::vector<std::string> ids;
  for (const auto& [id, f] : feats) {
    ids.push_back(id);
    if (!ratings.count(id)) missing.push_back(id);
  }
  if (!missing.empty())
    throw UsageError("validate: no rating for scan ids: " +
                     join(missing, ", "));

  // The test split is re-derived from the model's recorded seed over the
  // feature ids; the recorded hash must confirm it is the training split.
  const SplitAssignment split = split_dataset(ids, model.seed);
  if (hash_split(split) != model.split_hash)
    throw UsageError(
        "validate: test split not recoverable: split hash mismatch (the "
        "feature set or seed differs from training)");
  if (!args.split_path.empty()) {
    const json sj = parse_config_json(
        read_config_bytes(args.split_path.c_str(), "split"), "split");
    if (!sj.contains("hash") || !sj["hash"].is_string() ||
        sj["hash"].get<std::string>() != model.split_hash)
      throw UsageError("split: hash does not match the model's split_hash");
    std::uint64_t sseed = model.seed;
    get_u64_field(sj, "seed", sseed, "split");
    if (sseed != model.seed)
      throw UsageError("split: seed does not match the model's seed");
  }

  std::map<std::string, GcaRating> ratings2;
  if (!args.ratings2_path.empty()) {
    std::string r2bytes;
    try {
      r2bytes = read_file_bytes(args.ratings2_path);
    } catch (const Error& e) {
      throw UsageError(e.what());
    }
    mf.add_input("ratings2", r2bytes);
    ratings2 = load_single_rater_sheet(r2bytes, "ratings2");
  }
  std::map<std::string, CovariateRow> covariates;
  if (!args.covariates_path.empty()) {
    std::string cbytes;
    try {
      cbytes = read_file_bytes(args.covariates_path);
    } catch (const Error& e) {
      throw UsageError(e.what());
    }
    mf.add_input("covariates", cbytes);
    covariates = parse_cohort_csv(cbytes);
  }
  mf.add_stage_seconds("load", t_load.seconds());

  const StageTimer t_predict;
  std::vector<ScanAnalysis> rows;
  for (const std::string& id : split.ids_in(Split::kTest)) {
    ScanAnalysis row;
    row.scan_id = id;
    const Prediction p = predict_gca(model, feats.at(id));
    row.pred_raw = p.raw;
    row.pred_total = p.total;
    row.pred_severity = p.severity;
    row.rater1_total = total_score(impute_homologous(ratings.at(id)));
    row.rater1_severity = classify_severity(row.rater1_total);
    if (const auto it = ratings2.find(id); it != ratings2.end())
      row.rater2_total = total_score(impute_homologous(it->second));
    if (const auto it = covariates.find(id); it != covariates.end()) {
      row.age = it->second.age;
      row.amt_score = it->second.amt_score;
      row.ocs_tasks_impaired = it->second.ocs_tasks_impaired;
    }
    rows.push_back(std::move(row));
  }
  mf.add_stage_seconds("predict", t_predict.seconds());

  const StageTimer t_report;
  json context;
  context["model"] = {{"mode", predictor_mode_name(model.mode)},
                      {"lambda", model.lambda},
                      {"seed", model.seed},
                      {"split_hash", model.split_hash}};
  const auto counts = split.counts();
  context["split_counts"] = {{"train", counts[0]},
                             {"optimisation", counts[1]},
                             {"test", counts[2]}};
  ReportBundle bundle = build_validation_report(rows, context);
  const fs::path out(args.out_dir);
  write_file_bytes(out / "report.json", dump_json_g6(bundle.report));
  for (const auto& [name, bytes] : bundle.files)
    write_file_bytes(out / name, bytes);
  mf.add_stage_seconds("report", t_report.seconds());
  mf.add_stage_seconds("total", t_total.seconds());
  mf.write(out);
  for (const std::string& n : bundle.notices)
    std::cout << "notice: " << n << "\n";
  std::cout << "validate: report on " << rows.size() << " test scans written to "
            << (out / "report.json").string() << "\n";
  return 0;
}

// ---- argv entry point -----------------------------------------------------

int dispatch(int argc, const char* const* argv) {
  CLI::App app{"CT-based global cortical atrophy (GCA) scoring pipeline"};
  app.require_subcommand(1);

  std::string out_dir, config_path;
  std::uint64_t seed = 0;
  int threads = 0;
  auto* seed_opt = app.add_option("--seed", seed, "master seed override");
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--threads", threads, "worker thread count (0 = default)");
  app.add_option("--config", config_path, "JSON configuration file");

  CLI::App* ph = app.add_subcommand("phantom",
                                    "generate a synthetic CT cohort");
  ph->fallthrough();
  int n_override = 0;
  auto* n_opt = ph->add_option("--n", n_override, "cohort size override");

  CLI::App* pl = app.add_subcommand(
      "pipeline", "preprocess scans and extract features");
  pl->fallthrough();
  std::string scan_dir;
  pl->add_option("scans", scan_dir, "directory containing .nii scans")
      ->required();

  CLI::App* tr = app.add_subcommand("train", "train the GCA predictor");
  tr->fallthrough();
  std::string t_features, t_ratings;
  std::vector<double> t_lambdas;
  tr->add_option("--features", t_features, "features.csv from the pipeline")
      ->required();
  tr->add_option("--ratings", t_ratings, "reference rating sheet (CSV)")
      ->required();
  tr->add_option("--lambda", t_lambdas, "ridge penalty grid (repeatable)");

  CLI::App* va = app.add_subcommand(
      "validate", "evaluate a model on its test split and emit the report");
  va->fallthrough();
  std::string v_model, v_features, v_ratings, v_ratings2, v_covariates,
      v_split;
  va->add_option("--model", v_model, "model.json from train")->required();
  va->add_option("--features", v_features, "features.csv from the pipeline")
      ->required();
  va->add_option("--ratings", v_ratings, "rater-1 rating sheet (CSV)")
      ->required();
  va->add_option("--ratings2", v_ratings2, "optional rater-2 rating sheet");
  va->add_option("--covariates", v_covariates,
                 "optional cohort.csv with age / AMT / OCS covariates");
  va->add_option("--split", v_split, "optional split.json to cross-check");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  std::string command_line;
  for (int i = 0; i < argc; ++i) {
    if (i) command_line += ' ';
    command_line += argv[i];
  }

  try {
    if (threads < 0) throw UsageError("--threads must be >= 0");
#ifdef _OPENMP
    if (threads > 0) omp_set_num_threads(threads);
#endif
    if (ph->parsed()) {
      PhantomArgs a;
      a.config_path = config_path;
      a.out_dir = out_dir;
      if (seed_opt->count() > 0) a.seed = seed;
      if (n_opt->count() > 0) a.n = n_override;
      a.command_line = command_line;
      return run_phantom(a);
    }
    if (pl->parsed()) {
      PipelineArgs a;
      a.scan_dir = scan_dir;
      a.out_dir = out_dir;
      a.config_path = config_path;
      a.command_line = command_line;
      return run_pipeline(a);
    }
    if (tr->parsed()) {
      TrainArgs a;
      a.features_path = t_features;
      a.ratings_path = t_ratings;
      a.out_dir = out_dir;
      a.config_path = config_path;
      if (seed_opt->count() > 0) a.seed = seed;
      a.lambda_grid = t_lambdas;
      a.command_line = command_line;
      return run_train(a);
    }
    ValidateArgs a;
    a.model_path = v_model;
    a.features_path = v_features;
    a.ratings_path = v_ratings;
    a.ratings2_path = v_ratings2;
    a.covariates_path = v_covariates;
    a.split_path = v_split;
    a.out_dir = out_dir;
    a.command_line = command_line;
    return run_validate(a);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

int run_cli(const std::vector<std::string>& args) {
  std::vector<std::string> full;
  full.reserve(args.size() + 1);
  full.push_back("ctgca");
  full.insert(full.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  argv.reserve(full.size());
  for (const std::string& s : full) argv.push_back(s.c_str());
  return dispatch(static_cast<int>(argv.size()), argv.data());
}

}  // namespace ctgca::cli
