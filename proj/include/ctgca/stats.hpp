#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "ctgca/errors.hpp"
#include "ctgca/gca.hpp"

namespace ctgca::stats {

// All tests are two-sided and deterministic; p-value backends are the
// self-contained special functions at the bottom of this header.

// ---- descriptive ----------------------------------------------------------
double mean(const std::vector<double>& x);        // n >= 1
double sample_sd(const std::vector<double>& x);   // n >= 2, (n-1) denominator
double median(std::vector<double> x);             // n >= 1 (takes a copy)

// Pooled average ranks (1-based, ties get the mean of their rank span).
std::vector<double> average_ranks(const std::vector<double>& x);

// ---- agreement ------------------------------------------------------------

// Two aligned score series for the same scans (tool vs rater, rater vs rater).
struct PairedScores {
  std::string label_a, label_b;
  std::vector<std::string> ids;
  std::vector<double> a, b;  // same length as ids
};

double mae(const std::vector<double>& a, const std::vector<double>& b);

struct BlandAltmanResult {
  double mean_diff = 0, sd_diff = 0, loa_low = 0, loa_high = 0;
};
// d_i = a_i - b_i; loa = mean +/- 1.96 * sample sd. n >= 2.
BlandAltmanResult bland_altman(const std::vector<double>& a,
                               const std::vector<double>& b);

// Linear-weight Cohen kappa over categories fixed a priori at k (not derived
// from the data): weights v_ij = |i-j|/(k-1). q_e = 0 (all mass on one shared
// category) is defined as kappa = 1.
double weighted_kappa(const std::vector<int>& a, const std::vector<int>& b, int k);

// Verbal band for a kappa value (upper boundary inclusive).
std::string landis_koch(double kappa);

// 3x3 severity confusion matrix, rows = reference class, cols = predicted.
struct ConfusionMatrix3 {
  std::array<std::array<long, 3>, 3> counts{};
  // Row recall; empty rows have no defined accuracy.
  std::array<std::optional<double>, 3> class_accuracy() const;
  // Rows normalized to sum 1; empty rows come back as nullopt.
  std::array<std::optional<std::array<double, 3>>, 3> normalized_rows() const;
};
ConfusionMatrix3 confusion_matrix(const std::vector<Severity>& ref,
                                  const std::vector<Severity>& pred);

// Everything the paper reports for one predicted-vs-reference pairing.
// Raw values feed mae / signed errors / Bland-Altman; values rounded half
// away from zero and clamped to 0-39 feed kappa, severity and the error
// histogram fractions.
struct AgreementReport {
  size_t n = 0;
  double mae = 0;
  double err_mean = 0, err_sd = 0;              // signed a-b, raw
  BlandAltmanResult bland_altman;
  double kappa_total = 0;                       // k = 40 categories
  std::string kappa_total_label;
  double kappa_severity = 0;                    // k = 3 classes
  std::string kappa_severity_label;
  ConfusionMatrix3 confusion;                   // severity classes
  double frac_within_2 = 0;                     // rounded error in [-2, 2]
  double frac_within_5_4 = 0;                   // rounded error in [-5, 4]
};
AgreementReport agreement_report(const PairedScores& p);

// ---- hypothesis tests -----------------------------------------------------

struct SpearmanResult {
  double rho = 0, p = 1;
  size_t n = 0;
};
// Rank correlation with average ranks; p from t = rho*sqrt((n-2)/(1-rho^2))
// against Student t(n-2); |rho| = 1 gives p = 0 exactly. Constant input
// (zero rank variance) -> NumericError.
SpearmanResult spearman(const std::vector<double>& x, const std::vector<double>& y);

// Pooled samples up to this size get an exact two-sided p by exhaustive
// permutation (at most C(12,6) = 924 regroupings); larger samples use the
// continuity-corrected normal approximation.
inline constexpr size_t kRankSumExactLimit = 12;

struct RankSumResult {
  double u = 0;      // Mann-Whitney U of group a
  double mu = 0;     // null mean n_a*n_b/2
  double sigma = 0;  // tie-corrected null sd
  double z = 0;      // continuity-corrected (normal approximation, always)
  double p = 1;      // exact when n_a+n_b <= kRankSumExactLimit
};
RankSumResult rank_sum_test(const std::vector<double>& a,
                            const std::vector<double>& b);

struct KruskalWallisResult {
  double h = 0;  // tie-corrected
  int df = 0;
  double p = 1;
};
KruskalWallisResult kruskal_wallis(const std::vector<std::vector<double>>& groups);

struct PairedTResult {
  double t = 0;
  int df = 0;
  double p = 1;
};
PairedTResult paired_t(const std::vector<double>& a, const std::vector<double>& b);

struct RmAnovaResult {
  double f = 0;
  int df1 = 0, df2 = 0;
  double p = 1;
  double ss_treat = 0, ss_subject = 0, ss_error = 0;
};
// One-way repeated measures: rows = subjects (scans), cols = raters.
RmAnovaResult rm_anova(const std::vector<std::vector<double>>& rows);

// ---- special functions ----------------------------------------------------
double ln_gamma(double x);                        // x > 0, Lanczos
double reg_incomplete_gamma_p(double s, double x);  // P(s,x), lower
double reg_incomplete_gamma_q(double s, double x);  // Q(s,x), upper
double reg_incomplete_beta(double a, double b, double x);  // I_x(a,b)
double chi2_sf(double x, int df);                 // upper tail
double student_t_cdf(double t, int df);
double normal_sf(double z);                       // upper tail of N(0,1)

}  // namespace ctgca::stats
