#include "ctgca/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <optional>

#include "ctgca/errors.hpp"
#include "ctgca/stats.hpp"
#include "ctgca/svg.hpp"

namespace ctgca {

using nlohmann::json;

std::string format_g6(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (v == 0.0) v = 0.0;  // normalize -0
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

namespace {

void dump_rec(const json& j, std::string& out, int indent, int depth) {
  const std::string pad(static_cast<size_t>(indent) * (depth + 1), ' ');
  const std::string pad_close(static_cast<size_t>(indent) * depth, ' ');
  switch (j.type()) {
    case json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += "{\n";
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) out += ",\n";
        first = false;
        out += pad + json(it.key()).dump() + ": ";
        dump_rec(it.value(), out, indent, depth + 1);
      }
      out += "\n" + pad_close + "}";
      return;
    }
    case json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      out += "[\n";
      bool first = true;
      for (const auto& el : j) {
        if (!first) out += ",\n";
        first = false;
        out += pad;
        dump_rec(el, out, indent, depth + 1);
      }
      out += "\n" + pad_close + "]";
      return;
    }
    case json::value_t::number_float: {
      const double d = j.get<double>();
      out += std::isfinite(d) ? format_g6(d) : std::string("null");
      return;
    }
    default:
      out += j.dump();  // strings, ints, bools, null
      return;
  }
}

}  // namespace

std::string dump_json_g6(const json& j, int indent) {
  std::string out;
  dump_rec(j, out, indent, 0);
  out += "\n";
  return out;
}

double quantile(std::vector<double> v, double p) {
  if (v.empty()) throw DomainError("quantile: empty sample");
  if (!(p >= 0.0 && p <= 1.0))
    throw DomainError("quantile: p must lie in [0, 1]");
  std::sort(v.begin(), v.end());
  const double h = static_cast<double>(v.size() - 1) * p;
  const size_t lo = static_cast<size_t>(h);
  const size_t hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (v[hi] - v[lo]) * (h - static_cast<double>(lo));
}

const std::array<const char*, 3> kAgeBandLabels = {"65-75", "76-84", ">84"};

int age_band(double age) {
  if (age <= 75.0) return 0;
  if (age <= 84.0) return 1;
  return 2;
}

namespace {

// ---- plotting scaffolding -------------------------------------------------

struct PlotBox {
  double left = 70, right = 770, top = 50, bottom = 540;
  double xmin = 0, xmax = 1, ymin = 0, ymax = 1;
  double X(double x) const {
    return left + (x - xmin) / (xmax - xmin) * (right - left);
  }
  double Y(double y) const {
    return bottom - (y - ymin) / (ymax - ymin) * (bottom - top);
  }
};

void pad_range(double& lo, double& hi, double frac = 0.05) {
  if (!(hi > lo)) {
    lo -= 1.0;
    hi += 1.0;
    return;
  }
  const double pad = (hi - lo) * frac;
  lo -= pad;
  hi += pad;
}

std::vector<double> nice_ticks(double lo, double hi) {
  const double span = hi - lo;
  double step = std::pow(10.0, std::floor(std::log10(span / 5.0)));
  for (double m : {1.0, 2.0, 5.0, 10.0})
    if (span / (step * m) <= 8.0) {
      step *= m;
      break;
    }
  std::vector<double> ticks;
  const double first = std::ceil(lo / step - 1e-9) * step;
  for (double t = first; t <= hi + 1e-9 * span; t += step) {
    double v = t;
    if (std::fabs(v) < step * 1e-9) v = 0.0;
    ticks.push_back(v);
  }
  return ticks;
}

void draw_frame(SvgCanvas& c, const PlotBox& b, const std::string& title,
                const std::string& xlabel, const std::string& ylabel,
                bool x_ticks = true) {
  c.text(400, 28, title, 16, "middle");
  c.line(b.left, b.bottom, b.right, b.bottom, "#000000");
  c.line(b.left, b.bottom, b.left, b.top, "#000000");
  if (x_ticks) {
    for (double t : nice_ticks(b.xmin, b.xmax)) {
      const double x = b.X(t);
      c.line(x, b.bottom, x, b.bottom + 5, "#000000");
      c.text(x, b.bottom + 20, format_g6(t), 11, "middle");
    }
  }
  for (double t : nice_ticks(b.ymin, b.ymax)) {
    const double y = b.Y(t);
    c.line(b.left - 5, y, b.left, y, "#000000");
    c.text(b.left - 8, y + 4, format_g6(t), 11, "end");
  }
  c.text(400, 582, xlabel, 13, "middle");
  c.text(22, 295, ylabel, 13, "middle", "#000000", -90);
}

constexpr const char* kBlue = "#1f77b4";
constexpr const char* kLightBlue = "#aec7e8";
constexpr const char* kRed = "#d62728";
constexpr const char* kGrey = "#888888";

struct BoxStats {
  size_t n = 0;
  double mn = 0, q1 = 0, med = 0, q3 = 0, mx = 0;
};

BoxStats box_stats(const std::vector<double>& v) {
  BoxStats s;
  s.n = v.size();
  if (v.empty()) return s;
  s.mn = *std::min_element(v.begin(), v.end());
  s.mx = *std::max_element(v.begin(), v.end());
  s.q1 = quantile(v, 0.25);
  s.med = quantile(v, 0.5);
  s.q3 = quantile(v, 0.75);
  return s;
}

void draw_box(SvgCanvas& c, const PlotBox& b, double xc, double halfw,
              const BoxStats& s) {
  const double x = b.X(xc);
  const double xl = b.X(xc - halfw), xr = b.X(xc + halfw);
  const double cap = (xr - xl) * 0.3;
  c.line(x, b.Y(s.mn), x, b.Y(s.q1), "#000000");
  c.line(x, b.Y(s.q3), x, b.Y(s.mx), "#000000");
  c.line(x - cap, b.Y(s.mn), x + cap, b.Y(s.mn), "#000000");
  c.line(x - cap, b.Y(s.mx), x + cap, b.Y(s.mx), "#000000");
  c.rect(xl, b.Y(s.q3), xr - xl, b.Y(s.q1) - b.Y(s.q3), kLightBlue, kBlue);
  c.line(xl, b.Y(s.med), xr, b.Y(s.med), kRed, 2.0);
}

// ---- stats -> json --------------------------------------------------------

json agreement_to_json(const stats::AgreementReport& r) {
  json ba{{"mean_diff", r.bland_altman.mean_diff},
          {"sd_diff", r.bland_altman.sd_diff},
          {"loa_low", r.bland_altman.loa_low},
          {"loa_high", r.bland_altman.loa_high}};
  json conf;
  conf["counts"] = r.confusion.counts;
  json acc = json::array();
  for (const auto& a : r.confusion.class_accuracy())
    acc.push_back(a ? json(*a) : json());
  conf["class_accuracy"] = acc;
  json norm = json::array();
  for (const auto& row : r.confusion.normalized_rows())
    norm.push_back(row ? json(*row) : json());
  conf["normalized_rows"] = norm;
  return json{{"n", r.n},
              {"mae", r.mae},
              {"err_mean", r.err_mean},
              {"err_sd", r.err_sd},
              {"bland_altman", ba},
              {"kappa_total", r.kappa_total},
              {"kappa_total_label", r.kappa_total_label},
              {"kappa_severity", r.kappa_severity},
              {"kappa_severity_label", r.kappa_severity_label},
              {"confusion", conf},
              {"frac_within_2", r.frac_within_2},
              {"frac_within_5_4", r.frac_within_5_4}};
}

json rank_sum_to_json(const stats::RankSumResult& r) {
  return json{{"u", r.u}, {"mu", r.mu}, {"sigma", r.sigma}, {"z", r.z},
              {"p", r.p}};
}

std::string csv_num(double v) { return format_g6(v); }

}  // namespace

ReportBundle build_validation_report(const std::vector<ScanAnalysis>& rows,
                                     const json& context) {
  if (rows.empty())
    throw DomainError("validation report: no test scans to analyse");

  ReportBundle out;
  json& rep = out.report;
  if (context.is_object())
    for (auto it = context.begin(); it != context.end(); ++it)
      rep[it.key()] = it.value();
  rep["n_test"] = rows.size();

  const auto notice = [&](const std::string& msg) {
    out.notices.push_back(msg);
  };
  json figures = json::array();
  const auto add_file = [&](const std::string& name, const std::string& bytes) {
    out.files.emplace_back(name, bytes);
    if (name.size() > 4 && name.substr(name.size() - 4) == ".svg")
      figures.push_back(name);
  };

  // ---- agreement: tool vs rater 1 (all test scans) ------------------------
  stats::PairedScores p1;
  p1.label_a = "tool";
  p1.label_b = "rater1";
  for (const auto& r : rows) {
    p1.ids.push_back(r.scan_id);
    p1.a.push_back(r.pred_raw);
    p1.b.push_back(static_cast<double>(r.rater1_total));
  }
  std::optional<stats::AgreementReport> ag1;
  try {
    ag1 = stats::agreement_report(p1);
    rep["agreement"]["tool_vs_rater1"] = agreement_to_json(*ag1);
  } catch (const Error& e) {
    notice(std::string("skipped agreement tool_vs_rater1: ") + e.what());
  }
  // Rank correlation of the two series in each agreement pairing.
  const auto pair_spearman = [&](const char* key,
                                 const stats::PairedScores& p) {
    try {
      const stats::SpearmanResult s = stats::spearman(p.a, p.b);
      rep["agreement"][key]["spearman"] =
          json{{"rho", s.rho}, {"p", s.p}, {"n", s.n}};
    } catch (const Error& e) {
      notice(std::string("skipped Spearman ") + key + ": " + e.what());
    }
  };
  pair_spearman("tool_vs_rater1", p1);

  // ---- rater 2: pairwise agreement + repeated-measures comparison ---------
  std::vector<const ScanAnalysis*> shared;
  for (const auto& r : rows)
    if (r.rater2_total) shared.push_back(&r);
  if (shared.empty()) {
    notice("no rater-2 ratings supplied; inter-rater analyses skipped");
  } else {
    rep["rater_comparison"]["n_shared"] = shared.size();
    stats::PairedScores p2, p12;
    p2.label_a = "tool";
    p2.label_b = "rater2";
    p12.label_a = "rater1";
    p12.label_b = "rater2";
    for (const ScanAnalysis* r : shared) {
      p2.ids.push_back(r->scan_id);
      p2.a.push_back(r->pred_raw);
      p2.b.push_back(static_cast<double>(*r->rater2_total));
      p12.ids.push_back(r->scan_id);
      p12.a.push_back(static_cast<double>(r->rater1_total));
      p12.b.push_back(static_cast<double>(*r->rater2_total));
    }
    try {
      rep["agreement"]["tool_vs_rater2"] =
          agreement_to_json(stats::agreement_report(p2));
    } catch (const Error& e) {
      notice(std::string("skipped agreement tool_vs_rater2: ") + e.what());
    }
    try {
      rep["agreement"]["rater1_vs_rater2"] =
          agreement_to_json(stats::agreement_report(p12));
    } catch (const Error& e) {
      notice(std::string("skipped agreement rater1_vs_rater2: ") + e.what());
    }
    pair_spearman("tool_vs_rater2", p2);
    pair_spearman("rater1_vs_rater2", p12);
    try {
      std::vector<std::vector<double>> triples;
      for (const ScanAnalysis* r : shared)
        triples.push_back({r->pred_raw, static_cast<double>(r->rater1_total),
                           static_cast<double>(*r->rater2_total)});
      const stats::RmAnovaResult rm = stats::rm_anova(triples);
      rep["rater_comparison"]["rm_anova"] =
          json{{"f", rm.f},           {"df1", rm.df1},
               {"df2", rm.df2},       {"p", rm.p},
               {"ss_treat", rm.ss_treat}, {"ss_subject", rm.ss_subject},
               {"ss_error", rm.ss_error}};
    } catch (const Error& e) {
      notice(std::string("skipped rm-ANOVA: ") + e.what());
    }
    // Paired t trio on the shared scans, same data as the rm-ANOVA.
    const auto paired = [&](const char* key, const std::vector<double>& a,
                            const std::vector<double>& b) {
      try {
        const stats::PairedTResult t = stats::paired_t(a, b);
        rep["rater_comparison"]["paired_t"][key] =
            json{{"t", t.t}, {"df", t.df}, {"p", t.p}};
      } catch (const Error& e) {
        notice(std::string("skipped paired t ") + key + ": " + e.what());
      }
    };
    paired("tool_vs_rater1", p2.a, p12.a);
    paired("tool_vs_rater2", p2.a, p2.b);
    paired("rater1_vs_rater2", p12.a, p12.b);
  }

  // ---- covariates ---------------------------------------------------------
  std::vector<double> ages, age_pred;
  std::array<std::vector<double>, 3> band_pred;
  std::vector<double> over75, under75;
  for (const auto& r : rows) {
    if (!r.age) continue;
    ages.push_back(*r.age);
    age_pred.push_back(r.pred_raw);
    band_pred[static_cast<size_t>(age_band(*r.age))].push_back(r.pred_raw);
    (*r.age > 75.0 ? over75 : under75).push_back(r.pred_raw);
  }
  if (ages.empty()) {
    notice("no age covariates supplied; age analyses skipped");
  } else {
    json& ja = rep["covariates"]["age"];
    ja["n"] = ages.size();
    try {
      const stats::SpearmanResult s = stats::spearman(ages, age_pred);
      ja["spearman"] = json{{"rho", s.rho}, {"p", s.p}, {"n", s.n}};
    } catch (const Error& e) {
      notice(std::string("skipped Spearman age: ") + e.what());
    }
    json bands = json::array();
    std::vector<std::vector<double>> nonempty;
    for (size_t i = 0; i < 3; ++i) {
      bands.push_back(
          json{{"label", kAgeBandLabels[i]}, {"n", band_pred[i].size()}});
      if (!band_pred[i].empty()) nonempty.push_back(band_pred[i]);
    }
    ja["kruskal_wallis"]["bands"] = bands;
    try {
      if (nonempty.size() < 2)
        throw DomainError("fewer than two non-empty age bands");
      const stats::KruskalWallisResult k = stats::kruskal_wallis(nonempty);
      ja["kruskal_wallis"]["h"] = k.h;
      ja["kruskal_wallis"]["df"] = k.df;
      ja["kruskal_wallis"]["p"] = k.p;
    } catch (const Error& e) {
      notice(std::string("skipped Kruskal-Wallis age bands: ") + e.what());
    }
    try {
      if (over75.empty() || under75.empty())
        throw DomainError("one age group is empty");
      json jr = rank_sum_to_json(stats::rank_sum_test(over75, under75));
      jr["n_over_75"] = over75.size();
      jr["n_at_or_under_75"] = under75.size();
      ja["rank_sum_over_75"] = jr;
    } catch (const Error& e) {
      notice(std::string("skipped rank-sum age >75 vs <=75: ") + e.what());
    }
  }

  std::vector<double> amts, amt_pred, impaired_pred, unimpaired_pred;
  for (const auto& r : rows) {
    if (!r.amt_score) continue;
    amts.push_back(static_cast<double>(*r.amt_score));
    amt_pred.push_back(r.pred_raw);
    (*r.amt_score < 9 ? impaired_pred : unimpaired_pred).push_back(r.pred_raw);
  }
  if (amts.empty()) {
    notice("no AMT covariates supplied; AMT analyses skipped");
  } else {
    json& jc = rep["covariates"]["amt"];
    jc["n"] = amts.size();
    try {
      const stats::SpearmanResult s = stats::spearman(amts, amt_pred);
      jc["spearman"] = json{{"rho", s.rho}, {"p", s.p}, {"n", s.n}};
    } catch (const Error& e) {
      notice(std::string("skipped Spearman AMT: ") + e.what());
    }
    try {
      if (impaired_pred.empty() || unimpaired_pred.empty())
        throw DomainError("one AMT group is empty");
      json jr =
          rank_sum_to_json(stats::rank_sum_test(impaired_pred, unimpaired_pred));
      jr["n_impaired"] = impaired_pred.size();
      jr["n_unimpaired"] = unimpaired_pred.size();
      jc["rank_sum_impaired"] = jr;
    } catch (const Error& e) {
      notice(std::string("skipped rank-sum AMT impaired vs unimpaired: ") +
             e.what());
    }
  }

  std::vector<double> ocs, ocs_pred;
  for (const auto& r : rows) {
    if (!r.ocs_tasks_impaired) continue;
    ocs.push_back(static_cast<double>(*r.ocs_tasks_impaired));
    ocs_pred.push_back(r.pred_raw);
  }
  if (ocs.empty()) {
    notice("no OCS covariates supplied; OCS analyses skipped");
  } else {
    json& jo = rep["covariates"]["ocs"];
    jo["n"] = ocs.size();
    try {
      const stats::SpearmanResult s = stats::spearman(ocs, ocs_pred);
      jo["spearman"] = json{{"rho", s.rho}, {"p", s.p}, {"n", s.n}};
    } catch (const Error& e) {
      notice(std::string("skipped Spearman OCS: ") + e.what());
    }
    try {
      const double med = stats::median(ocs);
      std::vector<double> above, rest;
      for (size_t i = 0; i < ocs.size(); ++i)
        (ocs[i] > med ? above : rest).push_back(ocs_pred[i]);
      if (above.empty() || rest.empty())
        throw DomainError("one OCS group is empty");
      json jr = rank_sum_to_json(stats::rank_sum_test(above, rest));
      jr["median"] = med;
      jr["n_above_median"] = above.size();
      jr["n_at_or_below_median"] = rest.size();
      jo["rank_sum_above_median"] = jr;
    } catch (const Error& e) {
      notice(std::string("skipped rank-sum OCS above vs at/below median: ") +
             e.what());
    }
  }

  // ---- figures (each with its numbers in a companion CSV) -----------------

  double pred_lo = rows[0].pred_raw, pred_hi = rows[0].pred_raw;
  for (const auto& r : rows) {
    pred_lo = std::min(pred_lo, r.pred_raw);
    pred_hi = std::max(pred_hi, r.pred_raw);
  }
  const double ylo_scores = std::min(0.0, pred_lo);
  const double yhi_scores = std::max(39.0, pred_hi);

  {  // reference score histogram
    std::array<long, 40> cnt{};
    for (const auto& r : rows)
      ++cnt[static_cast<size_t>(std::clamp(r.rater1_total, 0, 39))];
    std::string csv = "total,count\n";
    long top = 1;
    for (int t = 0; t < 40; ++t) {
      csv += std::to_string(t) + "," + std::to_string(cnt[t]) + "\n";
      top = std::max(top, cnt[t]);
    }
    SvgCanvas c;
    PlotBox b;
    b.xmin = -0.5;
    b.xmax = 39.5;
    b.ymin = 0;
    b.ymax = static_cast<double>(top) * 1.05;
    draw_frame(c, b, "Reference GCA total distribution (test split)",
               "GCA total (rater 1)", "scans");
    for (int t = 0; t < 40; ++t) {
      if (cnt[t] == 0) continue;
      const double x0 = b.X(t - 0.45), x1 = b.X(t + 0.45);
      const double y = b.Y(static_cast<double>(cnt[t]));
      c.rect(x0, y, x1 - x0, b.bottom - y, kBlue);
    }
    add_file("fig_score_histogram.svg", c.finish());
    add_file("fig_score_histogram.csv", csv);
  }

  {  // predicted vs reference scatter with identity line
    std::string csv = "scan_id,rater1_total,predicted_raw,predicted_total\n";
    SvgCanvas c;
    PlotBox b;
    b.xmin = -1;
    b.xmax = 40;
    b.ymin = ylo_scores - 1;
    b.ymax = yhi_scores + 1;
    draw_frame(c, b, "Tool vs rater 1", "GCA total (rater 1)",
               "predicted GCA total (raw)");
    c.line(b.X(0), b.Y(0), b.X(39), b.Y(39), kGrey, 1.0, "6,4");
    for (const auto& r : rows) {
      c.circle(b.X(r.rater1_total), b.Y(r.pred_raw), 4, kBlue, 0.55);
      csv += r.scan_id + "," + std::to_string(r.rater1_total) + "," +
             csv_num(r.pred_raw) + "," + std::to_string(r.pred_total) + "\n";
    }
    add_file("fig_scatter_tool_vs_rater1.svg", c.finish());
    add_file("fig_scatter_tool_vs_rater1.csv", csv);
  }

  if (ag1) {  // Bland-Altman
    const stats::BlandAltmanResult& ba = ag1->bland_altman;
    std::string csv = "scan_id,mean,diff,mean_diff,loa_low,loa_high\n";
    double mlo = 1e300, mhi = -1e300, dlo = ba.loa_low, dhi = ba.loa_high;
    std::vector<std::pair<double, double>> pts;
    for (const auto& r : rows) {
      const double m = (r.pred_raw + r.rater1_total) / 2.0;
      const double d = r.pred_raw - r.rater1_total;
      pts.emplace_back(m, d);
      mlo = std::min(mlo, m);
      mhi = std::max(mhi, m);
      dlo = std::min(dlo, d);
      dhi = std::max(dhi, d);
      csv += r.scan_id + "," + csv_num(m) + "," + csv_num(d) + "," +
             csv_num(ba.mean_diff) + "," + csv_num(ba.loa_low) + "," +
             csv_num(ba.loa_high) + "\n";
    }
    pad_range(mlo, mhi);
    pad_range(dlo, dhi);
    SvgCanvas c;
    PlotBox b;
    b.xmin = mlo;
    b.xmax = mhi;
    b.ymin = dlo;
    b.ymax = dhi;
    draw_frame(c, b, "Bland-Altman: tool vs rater 1",
               "mean of tool and rater 1", "tool - rater 1");
    c.line(b.left, b.Y(ba.mean_diff), b.right, b.Y(ba.mean_diff), kRed, 1.5);
    c.line(b.left, b.Y(ba.loa_low), b.right, b.Y(ba.loa_low), kRed, 1.0,
           "6,4");
    c.line(b.left, b.Y(ba.loa_high), b.right, b.Y(ba.loa_high), kRed, 1.0,
           "6,4");
    for (const auto& [m, d] : pts) c.circle(b.X(m), b.Y(d), 4, kBlue, 0.55);
    add_file("fig_bland_altman.svg", c.finish());
    add_file("fig_bland_altman.csv", csv);
  }

  {  // severity confusion heatmap
    std::vector<Severity> ref, pred;
    for (const auto& r : rows) {
      ref.push_back(r.rater1_severity);
      pred.push_back(r.pred_severity);
    }
    const stats::ConfusionMatrix3 cm = stats::confusion_matrix(ref, pred);
    const auto norm = cm.normalized_rows();
    std::string csv = "reference,predicted,count,row_fraction\n";
    SvgCanvas c;
    c.text(400, 28, "Severity confusion (rows: rater 1)", 16, "middle");
    const double gx = 250, gy = 110, cell = 130;
    for (int i = 0; i < 3; ++i) {
      const std::string ref_label =
          severity_label(static_cast<Severity>(i));
      c.text(gx - 12, gy + i * cell + cell / 2 + 4, ref_label, 13, "end");
      for (int jx = 0; jx < 3; ++jx) {
        const double frac = norm[i] ? (*norm[i])[jx] : 0.0;
        const int cr = static_cast<int>(std::lround(255 - frac * (255 - 31)));
        const int cg = static_cast<int>(std::lround(255 - frac * (255 - 119)));
        const int cb = static_cast<int>(std::lround(255 - frac * (255 - 180)));
        char fill[16];
        std::snprintf(fill, sizeof(fill), "#%02x%02x%02x", cr, cg, cb);
        c.rect(gx + jx * cell, gy + i * cell, cell, cell, fill, "#555555");
        const std::string color = frac > 0.5 ? "#ffffff" : "#000000";
        c.text(gx + jx * cell + cell / 2, gy + i * cell + cell / 2 - 2,
               std::to_string(cm.counts[i][jx]), 15, "middle", color);
        if (norm[i])
          c.text(gx + jx * cell + cell / 2, gy + i * cell + cell / 2 + 18,
                 format_g6(frac), 11, "middle", color);
        csv += ref_label + "," +
               severity_label(static_cast<Severity>(jx)) + "," +
               std::to_string(cm.counts[i][jx]) + "," +
               (norm[i] ? csv_num(frac) : std::string()) + "\n";
      }
    }
    for (int jx = 0; jx < 3; ++jx)
      c.text(gx + jx * cell + cell / 2, gy + 3 * cell + 22,
             severity_label(static_cast<Severity>(jx)), 13, "middle");
    c.text(gx + 1.5 * cell, gy + 3 * cell + 48, "predicted", 13, "middle");
    add_file("fig_confusion_severity.svg", c.finish());
    add_file("fig_confusion_severity.csv", csv);
  }

  if (!ages.empty()) {  // age scatter + band box plot
    std::string csv = "scan_id,age,predicted_raw\n";
    double alo = ages[0], ahi = ages[0];
    for (double a : ages) {
      alo = std::min(alo, a);
      ahi = std::max(ahi, a);
    }
    pad_range(alo, ahi);
    SvgCanvas c;
    PlotBox b;
    b.xmin = alo;
    b.xmax = ahi;
    b.ymin = ylo_scores - 1;
    b.ymax = yhi_scores + 1;
    draw_frame(c, b, "Predicted GCA vs age", "age (years)",
               "predicted GCA total (raw)");
    for (const auto& r : rows) {
      if (!r.age) continue;
      c.circle(b.X(*r.age), b.Y(r.pred_raw), 4, kBlue, 0.55);
      csv += r.scan_id + "," + csv_num(*r.age) + "," + csv_num(r.pred_raw) +
             "\n";
    }
    add_file("fig_age_scatter.svg", c.finish());
    add_file("fig_age_scatter.csv", csv);

    std::string bcsv = "band,n,min,q1,median,q3,max\n";
    SvgCanvas cb;
    PlotBox bb;
    bb.xmin = 0.5;
    bb.xmax = 3.5;
    bb.ymin = ylo_scores - 1;
    bb.ymax = yhi_scores + 1;
    draw_frame(cb, bb, "Predicted GCA by age band", "age band",
               "predicted GCA total (raw)", /*x_ticks=*/false);
    for (size_t i = 0; i < 3; ++i) {
      const BoxStats s = box_stats(band_pred[i]);
      cb.text(bb.X(static_cast<double>(i) + 1.0), bb.bottom + 20,
              kAgeBandLabels[i], 12, "middle");
      if (s.n > 0) draw_box(cb, bb, static_cast<double>(i) + 1.0, 0.28, s);
      bcsv += std::string(kAgeBandLabels[i]) + "," + std::to_string(s.n);
      if (s.n > 0)
        bcsv += "," + csv_num(s.mn) + "," + csv_num(s.q1) + "," +
                csv_num(s.med) + "," + csv_num(s.q3) + "," + csv_num(s.mx);
      else
        bcsv += ",,,,,";
      bcsv += "\n";
    }
    add_file("fig_age_bands_box.svg", cb.finish());
    add_file("fig_age_bands_box.csv", bcsv);
  }

  if (!amts.empty()) {  // AMT scatter + impaired/unimpaired box plot
    std::string csv = "scan_id,amt_score,predicted_raw\n";
    SvgCanvas c;
    PlotBox b;
    b.xmin = -0.5;
    b.xmax = 10.5;
    b.ymin = ylo_scores - 1;
    b.ymax = yhi_scores + 1;
    draw_frame(c, b, "Predicted GCA vs AMT", "AMT score",
               "predicted GCA total (raw)");
    for (const auto& r : rows) {
      if (!r.amt_score) continue;
      c.circle(b.X(*r.amt_score), b.Y(r.pred_raw), 4, kBlue, 0.55);
      csv += r.scan_id + "," + std::to_string(*r.amt_score) + "," +
             csv_num(r.pred_raw) + "\n";
    }
    add_file("fig_amt_scatter.svg", c.finish());
    add_file("fig_amt_scatter.csv", csv);

    std::string bcsv = "group,n,min,q1,median,q3,max\n";
    SvgCanvas cb;
    PlotBox bb;
    bb.xmin = 0.5;
    bb.xmax = 2.5;
    bb.ymin = ylo_scores - 1;
    bb.ymax = yhi_scores + 1;
    draw_frame(cb, bb, "Predicted GCA by cognitive impairment (AMT < 9)",
               "group", "predicted GCA total (raw)", /*x_ticks=*/false);
    const std::array<std::pair<const char*, const std::vector<double>*>, 2>
        groups{{{"impaired", &impaired_pred}, {"unimpaired", &unimpaired_pred}}};
    for (size_t i = 0; i < groups.size(); ++i) {
      const BoxStats s = box_stats(*groups[i].second);
      cb.text(bb.X(static_cast<double>(i) + 1.0), bb.bottom + 20,
              groups[i].first, 12, "middle");
      if (s.n > 0) draw_box(cb, bb, static_cast<double>(i) + 1.0, 0.22, s);
      bcsv += std::string(groups[i].first) + "," + std::to_string(s.n);
      if (s.n > 0)
        bcsv += "," + csv_num(s.mn) + "," + csv_num(s.q1) + "," +
                csv_num(s.med) + "," + csv_num(s.q3) + "," + csv_num(s.mx);
      else
        bcsv += ",,,,,";
      bcsv += "\n";
    }
    add_file("fig_amt_impaired_box.svg", cb.finish());
    add_file("fig_amt_impaired_box.csv", bcsv);
  }

  {  // signed error histogram (rounded totals)
    std::map<int, long> cnt;
    for (const auto& r : rows) ++cnt[r.pred_total - r.rater1_total];
    const int lo = std::min(cnt.begin()->first, -3);
    const int hi = std::max(cnt.rbegin()->first, 3);
    std::string csv = "error,count\n";
    long top = 1;
    for (int e = lo; e <= hi; ++e) {
      const long n = cnt.count(e) ? cnt[e] : 0;
      csv += std::to_string(e) + "," + std::to_string(n) + "\n";
      top = std::max(top, n);
    }
    SvgCanvas c;
    PlotBox b;
    b.xmin = lo - 0.5;
    b.xmax = hi + 0.5;
    b.ymin = 0;
    b.ymax = static_cast<double>(top) * 1.05;
    draw_frame(c, b, "Signed error distribution (tool - rater 1, rounded)",
               "error (points)", "scans");
    for (int e = lo; e <= hi; ++e) {
      const long n = cnt.count(e) ? cnt[e] : 0;
      if (n == 0) continue;
      const double x0 = b.X(e - 0.45), x1 = b.X(e + 0.45);
      const double y = b.Y(static_cast<double>(n));
      c.rect(x0, y, x1 - x0, b.bottom - y, kBlue);
    }
    c.line(b.X(0), b.bottom, b.X(0), b.top, kGrey, 1.0, "4,3");
    add_file("fig_error_histogram.svg", c.finish());
    add_file("fig_error_histogram.csv", csv);
  }

  rep["figures"] = figures;
  rep["notices"] = out.notices;
  return out;
}

}  // namespace ctgca
