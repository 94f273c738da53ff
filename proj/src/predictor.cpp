#include "ctgca/predictor.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "ctgca/rng.hpp"

namespace ctgca {
namespace {

bool near_same_grid(const Volume& v, const Volume& t) {
  if (v.dims != t.dims) return false;
  for (int i = 0; i < 16; ++i)
    if (std::fabs(v.affine.m[static_cast<size_t>(i)] -
                  t.affine.m[static_cast<size_t>(i)]) > 1e-6)
      return false;
  return true;
}

bool in_csf_window(float h) {
  return h >= kCsfWindowLoHu && h <= kCsfWindowHiHu;
}

double dot_with_intercept(const std::array<double, kNumFeatures + 1>& w,
                          const FeatureVector& f) {
  double s = w[kNumFeatures];
  for (int i = 0; i < kNumFeatures; ++i) s += w[static_cast<size_t>(i)] * f[static_cast<size_t>(i)];
  return s;
}

int clamp_round(double x, int lo, int hi) {
  const long r = std::llround(x);
  if (r < lo) return lo;
  if (r > hi) return hi;
  return static_cast<int>(r);
}

}  // namespace

FeatureVector extract_features(const Volume& v, const Template& atlas) {
  v.validate();
  if (!near_same_grid(v, atlas.volume))
    throw DomainError(
        "extract_features: volume is not on the template grid (resample with "
        "to_template_space first)");
  const size_t brain_total = atlas.brain_mask.count();
  if (brain_total == 0)
    throw ExtractionError("extract_features: template brain mask is empty");

  FeatureVector f{};
  size_t ventricle_csf = 0;
  const auto& regions = all_regions();
  for (size_t r = 0; r < regions.size(); ++r) {
    const Mask& m = atlas.atlas[r];
    size_t in_mask = 0, csf = 0;
    for (size_t i = 0; i < m.bits.size(); ++i) {
      if (!m.bits[i]) continue;
      ++in_mask;
      csf += in_csf_window(v.data[i]);
    }
    f[r] = in_mask ? static_cast<double>(csf) / static_cast<double>(in_mask)
                   : 0.0;
    if (is_ventricular(regions[r])) ventricle_csf += csf;
  }

  size_t brain_csf = 0;
  for (size_t i = 0; i < atlas.brain_mask.bits.size(); ++i)
    if (atlas.brain_mask.bits[i]) brain_csf += in_csf_window(v.data[i]);
  f[13] = static_cast<double>(brain_csf) / static_cast<double>(brain_total);
  f[14] =
      static_cast<double>(ventricle_csf) / static_cast<double>(brain_total);
  return f;
}

const std::string& split_name(Split s) {
  static const std::array<std::string, 3> names = {"train", "optimisation",
                                                   "test"};
  return names[static_cast<size_t>(s)];
}

std::array<size_t, 3> SplitAssignment::counts() const {
  std::array<size_t, 3> c{};
  for (const auto& [id, s] : assignment) ++c[static_cast<size_t>(s)];
  return c;
}

std::vector<std::string> SplitAssignment::ids_in(Split s) const {
  std::vector<std::string> out;
  for (const auto& [id, sp] : assignment)
    if (sp == s) out.push_back(id);
  return out;  // std::map iterates in sorted order
}

SplitAssignment split_dataset(const std::vector<std::string>& ids,
                              uint64_t seed) {
  std::vector<std::string> sorted = ids;
  std::sort(sorted.begin(), sorted.end());
  for (size_t i = 1; i < sorted.size(); ++i)
    if (sorted[i] == sorted[i - 1])
      throw DomainError("split_dataset: duplicate scan id \"" + sorted[i] +
                        "\"");
  if (sorted.empty()) throw DomainError("split_dataset: no scan ids");

  rng::SplitMix64 engine(seed);
  rng::shuffle(sorted, engine);

  const size_t n = sorted.size();
  const size_t n_test = static_cast<size_t>(std::llround(0.2 * static_cast<double>(n)));
  const size_t n_opt = n_test;
  const size_t n_train = n - n_test - n_opt;

  SplitAssignment out;
  for (size_t i = 0; i < n; ++i) {
    Split s = Split::kTrain;
    if (i >= n_train + n_opt)
      s = Split::kTest;
    else if (i >= n_train)
      s = Split::kOptimisation;
    out.assignment[sorted[i]] = s;
  }
  return out;
}

std::string hash_split(const SplitAssignment& split) {
  uint64_t h = 0xCBF29CE484222325ull;  // FNV-1a offset basis
  const auto mix = [&h](const std::string& s) {
    for (unsigned char c : s) {
      h ^= c;
      h *= 0x100000001B3ull;
    }
  };
  for (const auto& [id, s] : split.assignment) {
    mix(id);
    mix("=");
    mix(split_name(s));
    mix("\n");
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(h));
  return std::string(buf);
}

std::vector<double> fit_ridge(const std::vector<std::vector<double>>& x,
                              const std::vector<double>& y, double lambda) {
  const size_t n = x.size();
  if (n == 0 || y.size() != n)
    throw DomainError("fit_ridge: need at least one row and matching targets");
  if (!(lambda >= 0) || !std::isfinite(lambda))
    throw DomainError("fit_ridge: lambda must be finite and >= 0");
  const size_t d = x[0].size();
  for (const auto& row : x) {
    if (row.size() != d) throw DomainError("fit_ridge: ragged design matrix");
    for (double v : row)
      if (!std::isfinite(v)) throw DomainError("fit_ridge: non-finite feature");
  }
  for (double v : y)
    if (!std::isfinite(v)) throw DomainError("fit_ridge: non-finite target");

  // Normal equations over the intercept-augmented design A = [X 1]:
  // (A^T A + lambda diag(1,...,1,0)) theta = A^T y.
  const size_t m = d + 1;
  std::vector<double> mat(m * m, 0.0), rhs(m, 0.0);
  for (size_t i = 0; i < n; ++i) {
    const auto row = [&](size_t j) { return j < d ? x[i][j] : 1.0; };
    for (size_t j = 0; j < m; ++j) {
      rhs[j] += row(j) * y[i];
      for (size_t k = j; k < m; ++k) mat[j * m + k] += row(j) * row(k);
    }
  }
  for (size_t j = 0; j + 1 < m; ++j) mat[j * m + j] += lambda;
  for (size_t j = 0; j < m; ++j)
    for (size_t k = 0; k < j; ++k) mat[j * m + k] = mat[k * m + j];

  // Cholesky factorization M = L L^T.
  std::vector<double> l(m * m, 0.0);
  double max_diag = 0.0;
  for (size_t j = 0; j < m; ++j) max_diag = std::max(max_diag, mat[j * m + j]);
  for (size_t j = 0; j < m; ++j) {
    double diag = mat[j * m + j];
    for (size_t k = 0; k < j; ++k) diag -= l[j * m + k] * l[j * m + k];
    if (!(diag > 1e-12 * std::max(max_diag, 1.0)))
      throw NumericError(
          "fit_ridge: normal equations are singular or indefinite (collinear "
          "features?); use lambda > 0");
    const double root = std::sqrt(diag);
    l[j * m + j] = root;
    for (size_t i = j + 1; i < m; ++i) {
      double s = mat[i * m + j];
      for (size_t k = 0; k < j; ++k) s -= l[i * m + k] * l[j * m + k];
      l[i * m + j] = s / root;
    }
  }
  // Solve L z = rhs, then L^T theta = z.
  std::vector<double> theta(m, 0.0), z(m, 0.0);
  for (size_t i = 0; i < m; ++i) {
    double s = rhs[i];
    for (size_t k = 0; k < i; ++k) s -= l[i * m + k] * z[k];
    z[i] = s / l[i * m + i];
  }
  for (size_t ii = m; ii-- > 0;) {
    double s = z[ii];
    for (size_t k = ii + 1; k < m; ++k) s -= l[k * m + ii] * theta[k];
    theta[ii] = s / l[ii * m + ii];
  }

  // Contract: the solution satisfies the normal equations to 1e-8 relative.
  double rnorm = 0.0, bnorm = 0.0;
  for (size_t j = 0; j < m; ++j) {
    double mj = 0.0;
    for (size_t k = 0; k < m; ++k) mj += mat[j * m + k] * theta[k];
    rnorm += (mj - rhs[j]) * (mj - rhs[j]);
    bnorm += rhs[j] * rhs[j];
  }
  if (std::sqrt(rnorm) > 1e-8 * std::max(std::sqrt(bnorm), 1.0))
    throw NumericError(
        "fit_ridge: normal-equation residual exceeds 1e-8 relative; the "
        "system is too ill-conditioned, use a larger lambda");
  return theta;
}

const std::string& predictor_mode_name(PredictorMode m) {
  static const std::array<std::string, 2> names = {"sum-of-regions",
                                                   "direct-total"};
  return names[static_cast<size_t>(m)];
}

void TrainConfig::validate() const {
  if (lambda_grid.empty())
    throw DomainError("TrainConfig: lambda grid must not be empty");
  for (double l : lambda_grid)
    if (!(l >= 0) || !std::isfinite(l))
      throw DomainError("TrainConfig: lambdas must be finite and >= 0");
}

PredictorModel train(const std::vector<TrainingSample>& dataset,
                     const TrainConfig& cfg,
                     std::vector<TrainSelection>* selection) {
  cfg.validate();
  if (selection) selection->clear();
  if (dataset.empty()) throw ProtocolError("train: dataset is empty");

  std::vector<std::string> ids;
  ids.reserve(dataset.size());
  for (const auto& s : dataset) ids.push_back(s.rating.scan_id);
  const SplitAssignment split = split_dataset(ids, cfg.seed);

  // Rows in scan_id order so that the dataset's order cannot matter.
  std::vector<size_t> order(dataset.size());
  std::iota(order.begin(), order.end(), size_t{0});
  std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    return dataset[a].rating.scan_id < dataset[b].rating.scan_id;
  });

  std::vector<size_t> train_rows, opt_rows;
  for (size_t i : order) {
    switch (split.assignment.at(dataset[i].rating.scan_id)) {
      case Split::kTrain: train_rows.push_back(i); break;
      case Split::kOptimisation: opt_rows.push_back(i); break;
      case Split::kTest: break;  // never touched by fitting or selection
    }
  }
  if (train_rows.empty()) throw ProtocolError("train: training split is empty");
  if (opt_rows.empty())
    throw ProtocolError("train: optimisation split is empty");

  const auto& regions = all_regions();
  std::vector<std::vector<double>> x_train;
  x_train.reserve(train_rows.size());
  std::array<std::vector<double>, kNumRegions> y_region;
  std::vector<double> y_total;
  for (size_t i : train_rows) {
    const TrainingSample& s = dataset[i];
    x_train.emplace_back(s.features.begin(), s.features.end());
    for (size_t r = 0; r < regions.size(); ++r)
      y_region[r].push_back(static_cast<double>(s.rating.score(regions[r])));
    y_total.push_back(static_cast<double>(total_score(s.rating)));
  }

  PredictorModel best;
  double best_mae = 0.0;
  bool have_best = false;
  for (double lambda : cfg.lambda_grid) {
    PredictorModel cand;
    cand.lambda = lambda;
    for (size_t r = 0; r < regions.size(); ++r) {
      const std::vector<double> w = fit_ridge(x_train, y_region[r], lambda);
      std::copy(w.begin(), w.end(), cand.region_weights[r].begin());
    }
    const std::vector<double> wt = fit_ridge(x_train, y_total, lambda);
    std::copy(wt.begin(), wt.end(), cand.total_weights.begin());

    for (PredictorMode mode :
         {PredictorMode::kSumOfRegions, PredictorMode::kDirectTotal}) {
      cand.mode = mode;
      double abs_err = 0.0;
      for (size_t i : opt_rows) {
        const TrainingSample& s = dataset[i];
        double raw;
        if (mode == PredictorMode::kSumOfRegions) {
          int sum = 0;
          for (size_t r = 0; r < regions.size(); ++r)
            sum += clamp_round(
                dot_with_intercept(cand.region_weights[r], s.features), 0, 3);
          raw = static_cast<double>(sum);
        } else {
          raw = dot_with_intercept(cand.total_weights, s.features);
        }
        abs_err += std::fabs(raw - static_cast<double>(total_score(s.rating)));
      }
      const double mae = abs_err / static_cast<double>(opt_rows.size());
      if (selection) selection->push_back({mode, lambda, mae, false});
      const bool wins =
          !have_best || mae < best_mae ||
          (mae == best_mae &&
           (lambda < best.lambda ||
            (lambda == best.lambda && mode == PredictorMode::kDirectTotal &&
             best.mode != PredictorMode::kDirectTotal)));
      if (wins) {
        best = cand;
        best_mae = mae;
        have_best = true;
      }
    }
  }
  best.seed = cfg.seed;
  best.split_hash = hash_split(split);
  if (selection)
    for (TrainSelection& e : *selection)
      e.selected = (e.mode == best.mode && e.lambda == best.lambda);
  return best;
}

Prediction predict_gca(const PredictorModel& m, const FeatureVector& f) {
  for (double v : f)
    if (!std::isfinite(v))
      throw DomainError("predict_gca: non-finite feature value");
  for (const auto& head : m.region_weights)
    for (double w : head)
      if (!std::isfinite(w))
        throw DomainError("predict_gca: model has non-finite weights");
  for (double w : m.total_weights)
    if (!std::isfinite(w))
      throw DomainError("predict_gca: model has non-finite weights");

  Prediction p;
  int sum = 0;
  for (size_t r = 0; r < static_cast<size_t>(kNumRegions); ++r) {
    p.region_scores[r] =
        clamp_round(dot_with_intercept(m.region_weights[r], f), 0, 3);
    sum += p.region_scores[r];
  }
  p.raw = m.mode == PredictorMode::kSumOfRegions
              ? static_cast<double>(sum)
              : dot_with_intercept(m.total_weights, f);
  p.total = clamp_round(p.raw, 0, 39);
  p.severity = classify_severity(p.total);
  return p;
}

}  // namespace ctgca
