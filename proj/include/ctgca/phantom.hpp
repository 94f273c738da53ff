#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "ctgca/gca.hpp"
#include "ctgca/volume.hpp"

namespace ctgca {

// Synthetic CT heads with known per-region GCA ground truth. The canonical
// head lives on a fixed 128^3 grid at 1.5 mm spacing, world origin at the
// grid center. Atrophy in each of the 13 scale regions is encoded by
// converting a fraction 0.02 + 0.10 * score of that region's mask voxels
// from brain tissue to CSF, selected by thresholding a seeded smooth noise
// field so the converted sets are nested across scores.

inline constexpr int kPhantomDim = 128;
inline constexpr double kPhantomSpacingMm = 1.5;

// Tissue HU values of the canonical head.
inline constexpr float kHuAir = -1024.0f;
inline constexpr float kHuBone = 1000.0f;
inline constexpr float kHuCsf = 8.0f;
inline constexpr float kHuBrain = 35.0f;

// The generated-HU clamp range; keeps extreme noise draws inside the range
// downstream stages accept as CT data.
inline constexpr float kHuFloor = -1100.0f;
inline constexpr float kHuCeil = 4000.0f;

struct PhantomSpec {
  std::array<int, kNumRegions> region_scores{};        // each 0-3
  double noise_sigma = 0.0;                            // HU
  AffineTransform pose = AffineTransform::identity();  // rigid world perturbation
  uint64_t seed = 0;
  void validate() const;  // DomainError on bad scores / sigma
};

// Linear age model: age = intercept + slope * total + N(0, sd^2), clamped.
struct AgeModel {
  double intercept = 60.0;
  double slope = 1.1;
  double sd = 5.0;
  double min_age = 65.0;
  double max_age = 102.0;
};

// P(impaired) = logistic((total - midpoint) / scale).
struct CognitionModel {
  double midpoint = 16.0;
  double scale = 4.0;
};

struct CohortSpec {
  int n = 1;
  uint64_t master_seed = 0;
  // Per-region categorical probabilities over scores {0,1,2,3}; defaults to
  // uniform. Each row must sum to 1.
  std::array<std::array<double, 4>, kNumRegions> score_distribution =
      uniform_scores();
  AgeModel age_model;
  CognitionModel cognition_model;
  double noise_sigma = 15.0;
  // Rigid pose jitter: per-axis translation in [-t, t] mm and rotation in
  // [-r, r] degrees, drawn per scan.
  double pose_translation_mm = 5.0;
  double pose_rotation_deg = 5.0;

  static std::array<std::array<double, 4>, kNumRegions> uniform_scores();
  void validate() const;
};

// Geometry of the canonical space (128^3, 1.5 mm, centered).
GridSpec canonical_grid();

// Canonical ground-truth mask of region r (atrophy target set), cached.
const Mask& region_mask(GcaRegion r);

// Everything inside the brain compartment ellipsoid (tissue + converted CSF,
// excluding the subarachnoid rim), cached.
const Mask& canonical_brain_mask();

// Atrophy-free canonical head (bone shell, rim, uniform brain), no noise.
Volume canonical_base();

struct PhantomResult {
  Volume volume;
  GcaRating rating;  // rater_id "truth"; equals spec.region_scores
};

// Deterministic in spec.seed; bit-identical on repeat calls.
PhantomResult generate_phantom(const PhantomSpec& spec);

// Adds N(0, sigma^2) HU noise with a counter-based per-voxel stream, then
// clamps to [kHuFloor, kHuCeil]. Thread count cannot change the result; the
// serial variant is the reference for the kernel-equality tests.
void add_gaussian_noise(Volume& v, double sigma, uint64_t seed);
void add_gaussian_noise_serial(Volume& v, double sigma, uint64_t seed);

// One planned cohort entry: everything but the voxels.
struct CohortScan {
  std::string scan_id;  // "scan_0001", 1-based, zero padded
  PhantomSpec spec;
  GcaRating rating;
  CohortRecord record;
  bool impaired = false;  // cognition draw; record.amt_score < 9 agrees
};

// Draws scores, poses and covariates for all n scans without generating any
// volumes. Per-scan seeds are rng::mix(master_seed, i).
std::vector<CohortScan> plan_cohort(const CohortSpec& c);

// Generates each scan and hands it to `sink` in id order; memory stays at one
// volume regardless of n.
void generate_cohort(const CohortSpec& c,
                     const std::function<void(const CohortScan&, const Volume&)>& sink);

// Collecting overload for small cohorts (holds all n volumes in memory).
std::vector<std::pair<CohortScan, Volume>> generate_cohort(const CohortSpec& c);

}  // namespace ctgca
