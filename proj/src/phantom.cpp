#include "ctgca/phantom.hpp"

#include <algorithm>
#include <cmath>

#include "ctgca/resample.hpp"
#include "ctgca/rng.hpp"

namespace ctgca {
namespace {

// ---- canonical head geometry (all mm, world origin at grid center) --------
// Axes: +x right, +y anterior, +z superior. Left structures sit at x < 0;
// paired shapes are defined on |x| and mirrored.

// Nested ellipsoid semi-axes: skull outer surface, skull inner surface,
// brain compartment, and the deep/cortex boundary. The gap between brain and
// inner skull is the subarachnoid CSF rim; its 4.5 mm width matches the mean
// reach of the extractor's Chebyshev-2 bone dilation (3(|nx|+|ny|+|nz|) mm,
// averaging 4.5 over directions), so stripping removes the rim without biting
// far into the compartment.
constexpr double kSkullOuter[3] = {70, 82, 64};
constexpr double kSkullInner[3] = {65.5, 77.5, 59.5};
constexpr double kBrainShell[3] = {61, 73, 55};
constexpr double kDeepShell[3] = {51, 63, 45};

// Sulcal wedges partition the cortical band (between deep and brain shells)
// by coronal/axial planes; the superior vertex strip stays unassigned.
constexpr double kFrontalPlaneY = 20;           // frontal: y >= 20
constexpr double kParietoOccipitalPlaneY = -15; // parieto-occipital: y <= -15
constexpr double kTemporalPlaneZ = -10;         // temporal: between, z <= -10

// Third ventricle: midline slab.
constexpr double kTvHalfX = 3.5;
constexpr double kTvYMin = -16, kTvYMax = 4;
constexpr double kTvZMin = -8, kTvZMax = 10;

// Ventricular horns: straight capsule (frontal) and quadratic Bezier tubes
// (temporal, occipital), all inside the deep ellipsoid.
constexpr double kFrontalHornA[3] = {6, 2, 8};
constexpr double kFrontalHornB[3] = {14, 26, 10};
constexpr double kFrontalHornR = 5;
constexpr double kTemporalHornP[3][3] = {{16, -12, -2}, {30, -4, -16}, {34, 12, -24}};
constexpr double kTemporalHornR = 4;
constexpr double kOccipitalHornP[3][3] = {{10, -18, 2}, {18, -38, 2}, {22, -52, 0}};
constexpr double kOccipitalHornR = 4.5;

constexpr double kCsfFractionBase = 0.02;
constexpr double kCsfFractionPerScore = 0.10;

double ellipsoid(double x, double y, double z, const double s[3]) {
  return (x / s[0]) * (x / s[0]) + (y / s[1]) * (y / s[1]) + (z / s[2]) * (z / s[2]);
}

double seg_dist2(const double p[3], const std::array<double, 3>& a,
                 const std::array<double, 3>& b) {
  const double ab[3] = {b[0] - a[0], b[1] - a[1], b[2] - a[2]};
  const double ap[3] = {p[0] - a[0], p[1] - a[1], p[2] - a[2]};
  const double len2 = ab[0] * ab[0] + ab[1] * ab[1] + ab[2] * ab[2];
  double t = len2 > 0 ? (ap[0] * ab[0] + ap[1] * ab[1] + ap[2] * ab[2]) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  const double d[3] = {ap[0] - t * ab[0], ap[1] - t * ab[1], ap[2] - t * ab[2]};
  return d[0] * d[0] + d[1] * d[1] + d[2] * d[2];
}

// A tube around a polyline, tested by nearest-segment distance.
struct Tube {
  std::vector<std::array<double, 3>> pts;
  double r2 = 0;
  bool contains(const double p[3]) const {
    for (size_t i = 0; i + 1 < pts.size(); ++i)
      if (seg_dist2(p, pts[i], pts[i + 1]) <= r2) return true;
    return false;
  }
};

Tube capsule(const double a[3], const double b[3], double r) {
  Tube t;
  t.pts = {{a[0], a[1], a[2]}, {b[0], b[1], b[2]}};
  t.r2 = r * r;
  return t;
}

Tube bezier_tube(const double p[3][3], double r, int segments = 32) {
  Tube t;
  t.r2 = r * r;
  for (int s = 0; s <= segments; ++s) {
    const double u = static_cast<double>(s) / segments;
    const double w0 = (1 - u) * (1 - u), w1 = 2 * u * (1 - u), w2 = u * u;
    t.pts.push_back({w0 * p[0][0] + w1 * p[1][0] + w2 * p[2][0],
                     w0 * p[0][1] + w1 * p[1][1] + w2 * p[2][1],
                     w0 * p[0][2] + w1 * p[1][2] + w2 * p[2][2]});
  }
  return t;
}

struct CanonicalModel {
  Volume base;  // atrophy-free HU
  Mask brain;
  std::array<Mask, kNumRegions> masks;
  std::array<std::vector<uint32_t>, kNumRegions> voxels;  // ascending indices
};

// Region of a brain-compartment voxel, or -1. `w` is the world position,
// `m` the mirrored copy (|x|, y, z). Ventricles take priority where the
// frontal horns brush the third-ventricle slab.
int region_of(const double w[3], const double m[3], const Tube& frontal,
              const Tube& temporal, const Tube& occipital) {
  const bool left = w[0] < 0;
  if (std::fabs(w[0]) <= kTvHalfX && w[1] >= kTvYMin && w[1] <= kTvYMax &&
      w[2] >= kTvZMin && w[2] <= kTvZMax)
    return static_cast<int>(GcaRegion::kThirdVentricle);
  if (frontal.contains(m))
    return static_cast<int>(left ? GcaRegion::kFrontalHornL : GcaRegion::kFrontalHornR);
  if (temporal.contains(m))
    return static_cast<int>(left ? GcaRegion::kTemporalHornL : GcaRegion::kTemporalHornR);
  if (occipital.contains(m))
    return static_cast<int>(left ? GcaRegion::kOccipitalHornL
                                 : GcaRegion::kOccipitalHornR);
  if (ellipsoid(w[0], w[1], w[2], kDeepShell) > 1.0) {  // cortical band
    if (w[1] >= kFrontalPlaneY)
      return static_cast<int>(left ? GcaRegion::kFrontalL : GcaRegion::kFrontalR);
    if (w[1] <= kParietoOccipitalPlaneY)
      return static_cast<int>(left ? GcaRegion::kParietoOccipitalL
                                   : GcaRegion::kParietoOccipitalR);
    if (w[2] <= kTemporalPlaneZ)
      return static_cast<int>(left ? GcaRegion::kTemporalL : GcaRegion::kTemporalR);
  }
  return -1;
}

CanonicalModel build_model() {
  CanonicalModel cm;
  cm.base = make_volume(canonical_grid(), kHuAir);
  cm.brain = make_mask(cm.base.dims);
  for (auto& m : cm.masks) m = make_mask(cm.base.dims);

  const Tube frontal = capsule(kFrontalHornA, kFrontalHornB, kFrontalHornR);
  const Tube temporal = bezier_tube(kTemporalHornP, kTemporalHornR);
  const Tube occipital = bezier_tube(kOccipitalHornP, kOccipitalHornR);

  const double o = -kPhantomSpacingMm * (kPhantomDim - 1) / 2.0;
  size_t idx = 0;
  for (int k = 0; k < kPhantomDim; ++k) {
    const double z = o + kPhantomSpacingMm * k;
    for (int j = 0; j < kPhantomDim; ++j) {
      const double y = o + kPhantomSpacingMm * j;
      for (int i = 0; i < kPhantomDim; ++i, ++idx) {
        const double x = o + kPhantomSpacingMm * i;
        if (ellipsoid(x, y, z, kSkullOuter) > 1.0) continue;  // air
        if (ellipsoid(x, y, z, kSkullInner) > 1.0) {
          cm.base.data[idx] = kHuBone;
          continue;
        }
        if (ellipsoid(x, y, z, kBrainShell) > 1.0) {
          cm.base.data[idx] = kHuCsf;  // subarachnoid rim
          continue;
        }
        cm.base.data[idx] = kHuBrain;
        cm.brain.bits[idx] = 1;
        const double w[3] = {x, y, z};
        const double m[3] = {std::fabs(x), y, z};
        const int r = region_of(w, m, frontal, temporal, occipital);
        if (r >= 0) {
          cm.masks[r].bits[idx] = 1;
          cm.voxels[r].push_back(static_cast<uint32_t>(idx));
        }
      }
    }
  }
  return cm;
}

const CanonicalModel& model() {
  static const CanonicalModel cm = build_model();
  return cm;
}

// Smooth value-noise field in [0,1): hashed lattice values (cell size 4
// voxels) blended with smoothstep weights. Drives which mask voxels convert
// to CSF: thresholding a smooth field gives clustered, blob-like atrophy.
class NoiseField {
 public:
  explicit NoiseField(uint64_t seed) : seed_(seed) {}

  double at(int i, int j, int k) const {
    const double u = smooth(static_cast<double>(i % kCell) / kCell);
    const double v = smooth(static_cast<double>(j % kCell) / kCell);
    const double w = smooth(static_cast<double>(k % kCell) / kCell);
    const int ci = i / kCell, cj = j / kCell, ck = k / kCell;
    double c[2][2][2];
    for (int dz = 0; dz < 2; ++dz)
      for (int dy = 0; dy < 2; ++dy)
        for (int dx = 0; dx < 2; ++dx)
          c[dz][dy][dx] = corner(ci + dx, cj + dy, ck + dz);
    const double x00 = c[0][0][0] + (c[0][0][1] - c[0][0][0]) * u;
    const double x10 = c[0][1][0] + (c[0][1][1] - c[0][1][0]) * u;
    const double x01 = c[1][0][0] + (c[1][0][1] - c[1][0][0]) * u;
    const double x11 = c[1][1][0] + (c[1][1][1] - c[1][1][0]) * u;
    const double y0 = x00 + (x10 - x00) * v;
    const double y1 = x01 + (x11 - x01) * v;
    return y0 + (y1 - y0) * w;
  }

 private:
  static constexpr int kCell = 4;
  static double smooth(double t) { return t * t * (3.0 - 2.0 * t); }
  double corner(int x, int y, int z) const {
    const uint64_t lin =
        static_cast<uint64_t>(x) + 64 * (static_cast<uint64_t>(y) + 64 * z);
    return rng::to_unit(rng::mix(seed_, lin));
  }
  uint64_t seed_;
};

void noise_slice(Volume& v, double sigma, uint64_t seed, int k) {
  const size_t plane = static_cast<size_t>(v.dims[0]) * v.dims[1];
  size_t idx = plane * k;
  for (size_t q = 0; q < plane; ++q, ++idx) {
    float h = v.data[idx] + static_cast<float>(sigma * rng::gauss(seed, idx));
    if (h < kHuFloor) h = kHuFloor;
    if (h > kHuCeil) h = kHuCeil;
    v.data[idx] = h;
  }
}

double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace

void PhantomSpec::validate() const {
  for (int i = 0; i < kNumRegions; ++i)
    if (region_scores[i] < 0 || region_scores[i] > kMaxRegionScore)
      throw DomainError("PhantomSpec: score for " +
                        region_name(static_cast<GcaRegion>(i)) + " must be 0-3, got " +
                        std::to_string(region_scores[i]));
  if (!(noise_sigma >= 0))
    throw DomainError("PhantomSpec: noise_sigma must be >= 0");
}

std::array<std::array<double, 4>, kNumRegions> CohortSpec::uniform_scores() {
  std::array<std::array<double, 4>, kNumRegions> d;
  for (auto& row : d) row = {0.25, 0.25, 0.25, 0.25};
  return d;
}

void CohortSpec::validate() const {
  if (n < 1) throw DomainError("CohortSpec: n must be >= 1");
  if (n > 9999) throw DomainError("CohortSpec: n capped at 9999 (scan id width)");
  for (int r = 0; r < kNumRegions; ++r) {
    double sum = 0;
    for (double p : score_distribution[r]) {
      if (p < 0) throw DomainError("CohortSpec: negative score probability");
      sum += p;
    }
    if (std::fabs(sum - 1.0) > 1e-9)
      throw DomainError("CohortSpec: score probabilities for " +
                        region_name(static_cast<GcaRegion>(r)) + " sum to " +
                        std::to_string(sum) + ", expected 1");
  }
  if (!(noise_sigma >= 0)) throw DomainError("CohortSpec: noise_sigma must be >= 0");
  if (!(pose_translation_mm >= 0) || !(pose_rotation_deg >= 0))
    throw DomainError("CohortSpec: pose jitter amplitudes must be >= 0");
  if (!(age_model.min_age <= age_model.max_age))
    throw DomainError("CohortSpec: age clamp interval is empty");
}

GridSpec canonical_grid() {
  GridSpec g;
  g.dims = {kPhantomDim, kPhantomDim, kPhantomDim};
  g.spacing = {kPhantomSpacingMm, kPhantomSpacingMm, kPhantomSpacingMm};
  g.affine = Mat4::identity();
  const double o = -kPhantomSpacingMm * (kPhantomDim - 1) / 2.0;
  for (int a = 0; a < 3; ++a) {
    g.affine(a, a) = kPhantomSpacingMm;
    g.affine(a, 3) = o;
  }
  return g;
}

const Mask& region_mask(GcaRegion r) { return model().masks[static_cast<size_t>(r)]; }

const Mask& canonical_brain_mask() { return model().brain; }

Volume canonical_base() { return model().base; }

void add_gaussian_noise(Volume& v, double sigma, uint64_t seed) {
  if (!(sigma >= 0)) throw DomainError("add_gaussian_noise: sigma must be >= 0");
  if (sigma == 0) return;
  const int nz = v.dims[2];
#pragma omp parallel for schedule(static)
  for (int k = 0; k < nz; ++k) noise_slice(v, sigma, seed, k);
}

void add_gaussian_noise_serial(Volume& v, double sigma, uint64_t seed) {
  if (!(sigma >= 0)) throw DomainError("add_gaussian_noise: sigma must be >= 0");
  if (sigma == 0) return;
  for (int k = 0; k < v.dims[2]; ++k) noise_slice(v, sigma, seed, k);
}

PhantomResult generate_phantom(const PhantomSpec& spec) {
  spec.validate();
  const CanonicalModel& cm = model();
  PhantomResult out;
  out.volume = cm.base;

  // Fixed substreams of the scan seed: 1 = atrophy field, 2 = HU noise.
  const NoiseField field(rng::mix(spec.seed, 1));
  const int nx = kPhantomDim, nxy = kPhantomDim * kPhantomDim;
  for (int r = 0; r < kNumRegions; ++r) {
    const auto& vox = cm.voxels[r];
    const double fraction =
        kCsfFractionBase + kCsfFractionPerScore * spec.region_scores[r];
    const size_t k = static_cast<size_t>(
        std::llround(fraction * static_cast<double>(vox.size())));
    if (k == 0) continue;
    // Convert exactly k voxels: the k smallest field values (ties broken by
    // index). Same seed + higher score selects a strict superset.
    std::vector<std::pair<double, uint32_t>> scored;
    scored.reserve(vox.size());
    for (uint32_t idx : vox) {
      const int i = static_cast<int>(idx % nx);
      const int j = static_cast<int>((idx / nx) % kPhantomDim);
      const int kk = static_cast<int>(idx / nxy);
      scored.emplace_back(field.at(i, j, kk), idx);
    }
    std::nth_element(scored.begin(), scored.begin() + (k - 1), scored.end());
    for (size_t q = 0; q < k; ++q) out.volume.data[scored[q].second] = kHuCsf;
  }

  if (spec.noise_sigma > 0)
    add_gaussian_noise(out.volume, spec.noise_sigma, rng::mix(spec.seed, 2));

  bool identity_pose = true;
  for (double p : spec.pose.params)
    if (p != 0.0) identity_pose = false;
  if (!identity_pose)
    out.volume = resample(out.volume, spec.pose, canonical_grid());

  std::array<int, kNumRegions> scores = spec.region_scores;
  out.rating = make_rating("", "truth", scores);
  return out;
}

std::vector<CohortScan> plan_cohort(const CohortSpec& c) {
  c.validate();
  std::vector<CohortScan> out;
  out.reserve(static_cast<size_t>(c.n));
  const double deg2rad = 3.14159265358979323846 / 180.0;
  for (int i = 0; i < c.n; ++i) {
    const uint64_t seed = rng::mix(c.master_seed, static_cast<uint64_t>(i));
    CohortScan s;
    char id[16];
    std::snprintf(id, sizeof(id), "scan_%04d", i + 1);
    s.scan_id = id;

    // Covariate substreams (counters into rng::mix; gauss(i) burns 2i, 2i+1):
    //   10+r score draw, 30+a translation, 33+a rotation, 50 impaired,
    //   60 sex, 61 AMT, gauss 35 OCS jitter, gauss 40 age jitter.
    s.spec.seed = seed;
    s.spec.noise_sigma = c.noise_sigma;
    for (int r = 0; r < kNumRegions; ++r) {
      const double u = rng::to_unit(rng::mix(seed, 10 + r));
      const auto& p = c.score_distribution[r];
      double acc = 0;
      int score = 3;
      for (int v = 0; v < 4; ++v) {
        acc += p[v];
        if (u < acc) {
          score = v;
          break;
        }
      }
      s.spec.region_scores[r] = score;
    }
    AffineParams pose{};
    for (int a = 0; a < 3; ++a) {
      pose[a] = (2.0 * rng::to_unit(rng::mix(seed, 30 + a)) - 1.0) *
                c.pose_translation_mm;
      pose[3 + a] = (2.0 * rng::to_unit(rng::mix(seed, 33 + a)) - 1.0) *
                    c.pose_rotation_deg * deg2rad;
    }
    s.spec.pose = AffineTransform::from_params(pose);

    s.rating = make_rating(s.scan_id, "truth", s.spec.region_scores);
    const int total = total_score(s.rating);

    s.record.scan_id = s.scan_id;
    s.record.cohort = "synthetic";
    double age = c.age_model.intercept + c.age_model.slope * total +
                 c.age_model.sd * rng::gauss(seed, 40);
    s.record.age = std::clamp(age, c.age_model.min_age, c.age_model.max_age);
    const double p_imp =
        logistic((total - c.cognition_model.midpoint) / c.cognition_model.scale);
    const bool impaired = rng::to_unit(rng::mix(seed, 50)) < p_imp;
    s.impaired = impaired;
    s.record.sex = (rng::mix(seed, 60) & 1) ? "f" : "m";
    // AMT < 9 is the impairment criterion; draw inside the matching band.
    s.record.amt_score = impaired ? 4 + static_cast<int>(rng::mix(seed, 61) % 5)
                                  : 9 + static_cast<int>(rng::mix(seed, 61) % 2);
    const long ocs = std::llround(0.30 * total + 2.0 * rng::gauss(seed, 35));
    s.record.ocs_tasks_impaired = static_cast<int>(std::clamp(ocs, 0L, 13L));
    s.record.validate();
    out.push_back(std::move(s));
  }
  return out;
}

void generate_cohort(const CohortSpec& c,
                     const std::function<void(const CohortScan&, const Volume&)>& sink) {
  for (const CohortScan& s : plan_cohort(c)) {
    PhantomResult r = generate_phantom(s.spec);
    sink(s, r.volume);
  }
}

std::vector<std::pair<CohortScan, Volume>> generate_cohort(const CohortSpec& c) {
  std::vector<std::pair<CohortScan, Volume>> out;
  generate_cohort(c, [&out](const CohortScan& s, const Volume& v) {
    out.emplace_back(s, v);
  });
  return out;
}

}  // namespace ctgca
