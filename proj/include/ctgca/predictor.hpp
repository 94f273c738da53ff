#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "ctgca/gca.hpp"
#include "ctgca/preprocess.hpp"
#include "ctgca/volume.hpp"

namespace ctgca {

// HU window that counts as CSF when turning a warped volume into fractions.
inline constexpr float kCsfWindowLoHu = 2.0f;
inline constexpr float kCsfWindowHiHu = 18.0f;

// 15 features: 13 per-region CSF fractions (atlas order), the global CSF
// fraction over the brain mask, and the ventricle-to-brain volume ratio
// (CSF inside the 7 ventricular masks over brain-mask volume). Every
// component lies in [0, 1].
inline constexpr int kNumFeatures = 15;
using FeatureVector = std::array<double, kNumFeatures>;

// Computes the feature vector of a volume already on the template grid.
// Throws DomainError when the grid differs from the template and
// ExtractionError when the template brain mask is empty.
FeatureVector extract_features(const Volume& v, const Template& atlas);

enum class Split : int { kTrain = 0, kOptimisation = 1, kTest = 2 };
const std::string& split_name(Split s);  // "train" / "optimisation" / "test"

struct SplitAssignment {
  std::map<std::string, Split> assignment;

  std::array<size_t, 3> counts() const;
  std::vector<std::string> ids_in(Split s) const;  // sorted
};

// Seeded 60/20/20 split: ids are sorted (so input order never matters),
// shuffled by Fisher-Yates over SplitMix64(seed), and cut contiguously with
// n_test = n_opt = round(0.2 n) and the remainder to train. Duplicate ids
// raise DomainError.
SplitAssignment split_dataset(const std::vector<std::string>& ids,
                              uint64_t seed);

// FNV-1a digest of the assignment (sorted "id=split" lines), recorded in the
// model so a serialized model can be matched to the split that produced it.
std::string hash_split(const SplitAssignment& split);

// Ridge regression with unpenalized intercept: minimizes
// ||X w + b - y||^2 + lambda ||w||^2 and returns d+1 weights (w..., b),
// solved by Cholesky on the normal equations. Throws NumericError when the
// system is singular (collinear X at lambda = 0) or the normal-equation
// residual exceeds 1e-8 relative.
std::vector<double> fit_ridge(const std::vector<std::vector<double>>& x,
                              const std::vector<double>& y, double lambda);

enum class PredictorMode : int { kSumOfRegions = 0, kDirectTotal = 1 };
const std::string& predictor_mode_name(PredictorMode m);

struct TrainConfig {
  std::vector<double> lambda_grid{0.01, 0.1, 1.0, 10.0};
  uint64_t seed = 0;

  void validate() const;  // DomainError on empty grid / bad lambda
};

struct PredictorModel {
  // 13 region heads and one total head; intercept is the last coefficient.
  std::array<std::array<double, kNumFeatures + 1>, kNumRegions>
      region_weights{};
  std::array<double, kNumFeatures + 1> total_weights{};
  PredictorMode mode = PredictorMode::kDirectTotal;
  double lambda = 0.0;
  uint64_t seed = 0;
  std::string split_hash;
};

struct TrainingSample {
  FeatureVector features{};
  GcaRating rating;  // complete (impute before training)
};

// One evaluated (mode, lambda) candidate and its optimisation-split MAE;
// `train` fills a table of these on request so tools can report the whole
// model-selection grid.
struct TrainSelection {
  PredictorMode mode = PredictorMode::kDirectTotal;
  double lambda = 0.0;
  double opt_mae = 0.0;
  bool selected = false;
};

// Fits region and total heads on the train split for every lambda in the
// grid, evaluates both modes on the optimisation split by MAE of the raw
// prediction against the true total, and keeps the (mode, lambda) with the
// smallest MAE (ties: smaller lambda, then direct-total). Rows are processed
// in scan_id order so dataset order never matters, and test-split rows are
// never touched. Empty train or optimisation split raises ProtocolError.
PredictorModel train(const std::vector<TrainingSample>& dataset,
                     const TrainConfig& cfg = {},
                     std::vector<TrainSelection>* selection = nullptr);

struct Prediction {
  double raw = 0.0;  // selected-mode output before rounding
  int total = 0;     // round-half-away-from-zero, clamped to [0, 39]
  Severity severity = Severity::kMild;
  std::array<int, kNumRegions> region_scores{};  // clamped to [0, 3]
};

// Applies the model. Non-finite features or weights raise DomainError.
Prediction predict_gca(const PredictorModel& m, const FeatureVector& f);

}  // namespace ctgca
