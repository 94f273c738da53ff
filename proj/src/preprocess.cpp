#include "ctgca/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "ctgca/morphology.hpp"
#include "ctgca/phantom.hpp"
#include "ctgca/resample.hpp"

namespace ctgca {
namespace {

// Maximal x-runs of tissue voxels per fixed slice. Precomputed once per
// pyramid level so each cost evaluation touches only tissue voxels and can
// walk x incrementally.
struct Run {
  int y, x0, x1;  // [x0, x1)
};

struct RunTable {
  std::vector<std::vector<Run>> by_slice;
  size_t total = 0;
};

// register_affine scores every fixed tissue voxel plus an air shell this far
// outside the fixed brain surface. The shell matters because the phantom
// brain is uniform tissue inside - nearly all alignment signal lives at the
// surface - and a tissue-only metric is one-sided there: it punishes warps
// that leave fixed tissue uncovered but never warps that push the moving
// brain out past the fixed surface. Extraction resolves the boundary a
// little differently on every scan (anisotropic bone clearance in the scan's
// own posed grid, plus noise nibbling), so a one-sided metric lets the
// optimizer silence those unavoidable boundary misses by inflating the
// moving brain - which also lets it dodge the tissue-to-CSF conversions of
// the diseased cortical periphery that the pristine template lacks. Scoring
// outside air symmetrically walls that off: overshoot costs air-vs-tissue
// just as undershoot does, and the equilibrium stays within a voxel of the
// true surface.
constexpr double kEvalShellMm = 6.0;

RunTable build_runs(const Volume& fixed, bool with_shell) {
  const size_t n = fixed.voxel_count();
  Mask eval = make_mask(fixed.dims);
  for (size_t i = 0; i < n; ++i)
    eval.bits[i] = fixed.data[i] > kTissueFloorHu ? 1 : 0;

  if (with_shell) {
    const double sp =
        std::min({fixed.spacing[0], fixed.spacing[1], fixed.spacing[2]});
    const int r_shell = static_cast<int>(std::ceil(kEvalShellMm / sp - 1e-9));
    eval = dilate_chebyshev(eval, r_shell);
  }

  RunTable t;
  t.by_slice.resize(static_cast<size_t>(fixed.dims[2]));
  for (int z = 0; z < fixed.dims[2]; ++z) {
    auto& runs = t.by_slice[static_cast<size_t>(z)];
    for (int y = 0; y < fixed.dims[1]; ++y) {
      int x = 0;
      while (x < fixed.dims[0]) {
        if (eval.bits[fixed.index(x, y, z)]) {
          const int x0 = x;
          while (x < fixed.dims[0] && eval.bits[fixed.index(x, y, z)]) ++x;
          runs.push_back({y, x0, x});
          t.total += static_cast<size_t>(x - x0);
        } else {
          ++x;
        }
      }
    }
  }
  return t;
}

// Squared-error sum and overlap count for one fixed slice. `m` maps fixed
// voxel indices to moving voxel coordinates; column 0 is the x step.
void cost_slice(const Volume& moving, const Volume& fixed,
                const std::vector<Run>& runs, const Mat4& m, int z,
                double& sum, long& cnt) {
  double s = 0;
  long c = 0;
  for (const Run& r : runs) {
    double px = m(0, 0) * r.x0 + m(0, 1) * r.y + m(0, 2) * z + m(0, 3);
    double py = m(1, 0) * r.x0 + m(1, 1) * r.y + m(1, 2) * z + m(1, 3);
    double pz = m(2, 0) * r.x0 + m(2, 1) * r.y + m(2, 2) * z + m(2, 3);
    size_t idx = fixed.index(r.x0, r.y, z);
    for (int x = r.x0; x < r.x1; ++x, ++idx) {
      float val;
      if (sample_trilinear_inside(moving, px, py, pz, &val)) {
        const double d = static_cast<double>(val) - fixed.data[idx];
        s += d * d;
        ++c;
      }
      px += m(0, 0);
      py += m(1, 0);
      pz += m(2, 0);
    }
  }
  sum = s;
  cnt = c;
}

// `z_stride` > 1 evaluates only every z_stride-th slice; register_affine uses
// that at the finest pyramid level, where the smooth volumes make the thinned
// objective share the full objective's optimum to well below a voxel.
double eval_cost(const Volume& moving, const Volume& fixed,
                 const RunTable& runs, const Mat4& m, bool parallel,
                 int z_stride = 1) {
  const int nz = fixed.dims[2];
  const int n_slices = (nz + z_stride - 1) / z_stride;
  std::vector<double> sums(static_cast<size_t>(n_slices), 0.0);
  std::vector<long> cnts(static_cast<size_t>(n_slices), 0);
  if (parallel) {
#pragma omp parallel for schedule(static)
    for (int i = 0; i < n_slices; ++i) {
      const int z = i * z_stride;
      cost_slice(moving, fixed, runs.by_slice[static_cast<size_t>(z)], m, z,
                 sums[static_cast<size_t>(i)], cnts[static_cast<size_t>(i)]);
    }
  } else {
    for (int i = 0; i < n_slices; ++i) {
      const int z = i * z_stride;
      cost_slice(moving, fixed, runs.by_slice[static_cast<size_t>(z)], m, z,
                 sums[static_cast<size_t>(i)], cnts[static_cast<size_t>(i)]);
    }
  }
  double sum = 0;
  long cnt = 0;
  for (int i = 0; i < n_slices; ++i) {
    sum += sums[static_cast<size_t>(i)];
    cnt += cnts[static_cast<size_t>(i)];
  }
  if (cnt == 0) return std::numeric_limits<double>::infinity();
  return sum / static_cast<double>(cnt);
}

// Fixed voxel indices -> moving voxel coordinates under transform t:
// resample(moving, t) samples moving at t^-1 * world(fixed voxel).
Mat4 fixed_to_moving(const Mat4& inv_moving_affine, const AffineTransform& t,
                     const Mat4& fixed_affine) {
  return inv_moving_affine * (t.matrix.inverse() * fixed_affine);
}

double cost_for(const Volume& moving, const Volume& fixed,
                const AffineTransform& t, bool parallel) {
  moving.validate();
  fixed.validate();
  const RunTable runs = build_runs(fixed, /*with_shell=*/false);
  const Mat4 m = fixed_to_moving(moving.affine.inverse(), t, fixed.affine);
  return eval_cost(moving, fixed, runs, m, parallel);
}

// Unweighted center of mass of tissue voxels in world mm. The affine is
// linear, so the mean world position is the affine of the mean index.
std::array<double, 3> tissue_center(const Volume& v, const char* label) {
  double sx = 0, sy = 0, sz = 0;
  long n = 0;
  size_t idx = 0;
  for (int z = 0; z < v.dims[2]; ++z)
    for (int y = 0; y < v.dims[1]; ++y)
      for (int x = 0; x < v.dims[0]; ++x, ++idx)
        if (v.data[idx] > kTissueFloorHu) {
          sx += x;
          sy += y;
          sz += z;
          ++n;
        }
  if (n == 0)
    throw RegistrationError(std::string("register_affine: ") + label +
                            " volume has no tissue voxels above " +
                            std::to_string(static_cast<int>(kTissueFloorHu)) +
                            " HU");
  const double inv = 1.0 / static_cast<double>(n);
  return v.affine.apply_point(sx * inv, sy * inv, sz * inv);
}

// Initial half-widths of the golden-section brackets, by parameter:
// translation mm, rotation rad, log-scale, shear. Halved at each finer level.
constexpr std::array<double, 12> kBracketHalfWidth = {
    10.0, 10.0, 10.0, 0.2, 0.2, 0.2, 0.1, 0.1, 0.1, 0.05, 0.05, 0.05};

// The line search stops once the bracket has shrunk to this fraction of its
// initial width (~11 golden-section iterations).
constexpr double kLineSearchShrink = 5e-3;

}  // namespace

ExtractionResult extract_brain(const Volume& v) {
  v.validate();
  float lo = v.data.empty() ? 0.0f : v.data[0];
  float hi = lo;
  for (float h : v.data) {
    lo = std::min(lo, h);
    hi = std::max(hi, h);
  }
  if (lo < kHuFloor || hi > kHuCeil)
    throw DomainError("extract_brain: data range [" + std::to_string(lo) +
                      ", " + std::to_string(hi) +
                      "] exceeds the CT range [-1100, 4000]");

  const size_t n = v.voxel_count();
  Mask cand = make_mask(v.dims);
  Mask bone = make_mask(v.dims);
  size_t n_cand = 0;
  bool any_bone = false;
  for (size_t i = 0; i < n; ++i) {
    const float h = v.data[i];
    if (h >= 0.0f && h <= 90.0f) {
      cand.bits[i] = 1;
      ++n_cand;
    } else if (h > 200.0f) {
      bone.bits[i] = 1;
      any_bone = true;
    }
  }
  if (n_cand == 0)
    throw ExtractionError(
        "extract_brain: no soft-tissue candidates with HU in [0, 90]");
  if (any_bone) {
    const Mask near_bone = dilate_chebyshev(bone, 2);
    size_t left = 0;
    for (size_t i = 0; i < n; ++i) {
      if (near_bone.bits[i]) cand.bits[i] = 0;
      left += cand.bits[i];
    }
    if (left == 0)
      throw ExtractionError(
          "extract_brain: every soft-tissue candidate lies within 2 voxels of "
          "bone");
  }

  Mask mask = close_ball(largest_component_6(cand), 2);
  Volume masked = make_volume(v.grid());
  for (size_t i = 0; i < n; ++i)
    masked.data[i] = mask.bits[i] ? v.data[i] : kBackgroundHu;
  return {std::move(mask), std::move(masked)};
}

const Template& canonical_template() {
  static const Template tmpl = [] {
    Template t;
    ExtractionResult ex = extract_brain(canonical_base());
    t.volume = std::move(ex.masked);
    t.brain_mask = canonical_brain_mask();
    const auto& regions = all_regions();
    for (size_t i = 0; i < regions.size(); ++i)
      t.atlas[i] = region_mask(regions[i]);
    return t;
  }();
  return tmpl;
}

void RegistrationConfig::validate() const {
  if (dof != 6 && dof != 9 && dof != 12)
    throw DomainError("RegistrationConfig: dof must be 6, 9 or 12, got " +
                      std::to_string(dof));
  if (pyramid_factors.empty() || pyramid_factors.back() != 1)
    throw DomainError("RegistrationConfig: pyramid_factors must end at 1");
  for (size_t i = 0; i < pyramid_factors.size(); ++i) {
    if (pyramid_factors[i] < 1)
      throw DomainError("RegistrationConfig: pyramid factors must be >= 1");
    if (i > 0 && pyramid_factors[i] >= pyramid_factors[i - 1])
      throw DomainError(
          "RegistrationConfig: pyramid_factors must be strictly decreasing");
  }
  if (max_iters < 1)
    throw DomainError("RegistrationConfig: max_iters must be >= 1");
  if (!(convergence_tol > 0) || !std::isfinite(convergence_tol))
    throw DomainError(
        "RegistrationConfig: convergence_tol must be positive and finite");
}

double registration_cost(const Volume& moving, const Volume& fixed,
                         const AffineTransform& t) {
  return cost_for(moving, fixed, t, /*parallel=*/true);
}

double registration_cost_serial(const Volume& moving, const Volume& fixed,
                                const AffineTransform& t) {
  return cost_for(moving, fixed, t, /*parallel=*/false);
}

AffineTransform register_affine(const Volume& moving, const Template& fixed,
                                const RegistrationConfig& cfg,
                                RegistrationTrace* trace) {
  cfg.validate();
  moving.validate();
  if (trace) trace->level_costs.clear();

  // Center-of-mass initialization: resample(moving, t) shifts content by the
  // translation, so start with the shift that moves the moving center onto
  // the template center.
  const auto com_m = tissue_center(moving, "moving");
  const auto com_f = tissue_center(fixed.volume, "template");
  AffineParams params{};
  for (int a = 0; a < 3; ++a) params[a] = com_f[a] - com_m[a];

  std::vector<int> active;
  for (int j = 0; j < 6; ++j) active.push_back(j);
  if (cfg.dof >= 9)
    for (int j = 6; j < 9; ++j) active.push_back(j);
  if (cfg.dof == 12)
    for (int j = 9; j < 12; ++j) active.push_back(j);

  constexpr double kInvPhi = 0.6180339887498949;
  for (size_t li = 0; li < cfg.pyramid_factors.size(); ++li) {
    const int factor = cfg.pyramid_factors[li];
    const Volume fixed_l =
        factor == 1 ? fixed.volume : downsample_box(fixed.volume, factor);
    const Volume moving_l = factor == 1 ? moving : downsample_box(moving, factor);
    const RunTable runs = build_runs(fixed_l, /*with_shell=*/true);
    if (runs.total == 0)
      throw RegistrationError(
          "register_affine: evaluation set is empty at pyramid "
          "factor " + std::to_string(factor));
    const Mat4 inv_moving = moving_l.affine.inverse();
    const int z_stride = factor == 1 ? 2 : 1;
    const auto cost_at = [&](const AffineParams& p) {
      const AffineTransform t = AffineTransform::from_params(p);
      return eval_cost(moving_l, fixed_l, runs,
                       fixed_to_moving(inv_moving, t, fixed_l.affine), true,
                       z_stride);
    };

    double cost = cost_at(params);
    if (!std::isfinite(cost))
      throw RegistrationError(
          "register_affine: no overlap between moving volume and template at "
          "pyramid factor " +
          std::to_string(factor));
    std::vector<double>* lvl = nullptr;
    if (trace) {
      trace->level_costs.emplace_back();
      lvl = &trace->level_costs.back();
      lvl->push_back(cost);
    }

    const double shrink = std::ldexp(1.0, -static_cast<int>(li));
    for (int it = 0; it < cfg.max_iters; ++it) {
      const double before = cost;
      for (int j : active) {
        const double w = kBracketHalfWidth[static_cast<size_t>(j)] * shrink;
        const auto eval1 = [&](double x) {
          AffineParams p = params;
          p[static_cast<size_t>(j)] = x;
          return cost_at(p);
        };
        double a = params[static_cast<size_t>(j)] - w;
        double b = params[static_cast<size_t>(j)] + w;
        double x1 = b - kInvPhi * (b - a);
        double x2 = a + kInvPhi * (b - a);
        double f1 = eval1(x1);
        double f2 = eval1(x2);
        while (b - a > 2.0 * w * kLineSearchShrink) {
          if (f1 <= f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - kInvPhi * (b - a);
            f1 = eval1(x1);
          } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + kInvPhi * (b - a);
            f2 = eval1(x2);
          }
        }
        const double xm = 0.5 * (a + b);
        const double fm = eval1(xm);
        if (fm < cost) {
          params[static_cast<size_t>(j)] = xm;
          cost = fm;
          if (lvl) lvl->push_back(cost);
        }
      }
      if (before - cost <= cfg.convergence_tol * std::max(before, 1e-300))
        break;
    }
  }
  return AffineTransform::from_params(params);
}

Volume to_template_space(const Volume& v, const AffineTransform& t,
                         const Template& tmpl) {
  // resample inverts t.matrix, so a singular transform surfaces as
  // NumericError from Mat4::inverse.
  return resample(v, t, tmpl.volume.grid());
}

}  // namespace ctgca
