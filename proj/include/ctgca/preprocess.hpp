#pragma once

#include <array>
#include <vector>

#include "ctgca/gca.hpp"
#include "ctgca/volume.hpp"

namespace ctgca {

// Voxels strictly above this HU count as head tissue for the registration
// metric and for center-of-mass initialization. Skull-stripped volumes are
// -1024 outside the brain, so any tissue (CSF ~8, parenchyma ~35) clears it.
inline constexpr float kTissueFloorHu = -500.0f;

// Brain extraction output: the binary brain mask and the input with every
// voxel outside the mask replaced by -1024.
struct ExtractionResult {
  Mask mask;
  Volume masked;
};

// Deterministic brain extraction for CT: soft-tissue candidates (HU in
// [0, 90]), removal of candidates within Chebyshev distance 2 of bone
// (HU > 200), largest 6-connected component, then closing with a radius-2
// ball. Throws DomainError if values fall outside [-1100, 4000] and
// ExtractionError when no candidate tissue survives.
ExtractionResult extract_brain(const Volume& v);

// The fixed registration target: the canonical zero-atrophy, noise-free,
// identity-pose head, skull-stripped with extract_brain, together with the
// 13 parametric region masks and the parametric brain support defined on the
// same 128^3 @ 1.5 mm grid. Built once and cached.
struct Template {
  Volume volume;
  Mask brain_mask;
  std::array<Mask, kNumRegions> atlas;
};
const Template& canonical_template();

struct RegistrationConfig {
  int dof = 9;                        // 6 rigid, 9 rigid+scale, 12 full affine
  std::vector<int> pyramid_factors{4, 2, 1};
  int max_iters = 100;                // coordinate-descent sweeps per level
  double convergence_tol = 1e-6;      // relative cost decrease that ends a level

  void validate() const;  // DomainError on out-of-contract settings
};

// Accepted-cost history of a registration run, one sequence per pyramid
// level. Each sequence is non-increasing; sequences from different levels are
// not comparable because the voxel sets differ.
struct RegistrationTrace {
  std::vector<std::vector<double>> level_costs;
};

// Mean squared error between `fixed` and `moving` resampled through `t`,
// taken over fixed voxels above kTissueFloorHu whose mapped position lands
// inside `moving`. Returns +infinity when no voxel overlaps. The parallel
// version accumulates per-slice partial sums that are reduced in fixed z
// order, so it matches the serial twin bitwise.
double registration_cost(const Volume& moving, const Volume& fixed,
                         const AffineTransform& t);
double registration_cost_serial(const Volume& moving, const Volume& fixed,
                                const AffineTransform& t);

// Estimates the transform t minimizing registration_cost(moving, template, t)
// by multi-resolution cyclic coordinate descent with a golden-section line
// search per parameter, initialized from center-of-mass alignment. Bracket
// widths start at +/-10 mm, 0.2 rad, 0.1 log-scale, 0.05 shear and halve at
// each finer level. The internal objective differs from registration_cost in
// two documented ways: it also scores a ~6 mm shell of air voxels outside
// the fixed brain surface (a tissue-only metric punishes undershoot but not
// overshoot, which rewards warps that inflate the moving brain to dodge
// per-scan extraction-boundary differences and the diseased cortical
// periphery), and the finest level scores every second slice. Deterministic.
// Throws RegistrationError when either volume has no tissue voxels or when
// the cost is non-finite (no overlap).
AffineTransform register_affine(const Volume& moving, const Template& fixed,
                                const RegistrationConfig& cfg = {},
                                RegistrationTrace* trace = nullptr);

// Resamples v through t onto the template grid. Output dims always equal the
// template dims; a singular t raises NumericError.
Volume to_template_space(const Volume& v, const AffineTransform& t,
                         const Template& tmpl);

}  // namespace ctgca
