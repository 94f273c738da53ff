#pragma once

#include "ctgca/volume.hpp"

namespace ctgca {

// Trilinear interpolation at continuous voxel coordinates. Points outside
// [0, dim-1] on any axis return kBackgroundHu (no clamping, no extrapolation).
inline float sample_trilinear(const Volume& v, double x, double y, double z) {
  if (x < 0.0 || y < 0.0 || z < 0.0 || x > v.dims[0] - 1 || y > v.dims[1] - 1 ||
      z > v.dims[2] - 1)
    return kBackgroundHu;
  int i0 = static_cast<int>(x), j0 = static_cast<int>(y), k0 = static_cast<int>(z);
  // x == dims-1 lands exactly on the last sample; keep the +1 corner in range.
  if (i0 > v.dims[0] - 2) i0 = v.dims[0] > 1 ? v.dims[0] - 2 : 0;
  if (j0 > v.dims[1] - 2) j0 = v.dims[1] > 1 ? v.dims[1] - 2 : 0;
  if (k0 > v.dims[2] - 2) k0 = v.dims[2] > 1 ? v.dims[2] - 2 : 0;
  const double fx = x - i0, fy = y - j0, fz = z - k0;
  const int i1 = v.dims[0] > 1 ? i0 + 1 : i0;
  const int j1 = v.dims[1] > 1 ? j0 + 1 : j0;
  const int k1 = v.dims[2] > 1 ? k0 + 1 : k0;
  const float* d = v.data.data();
  const size_t sx = 1, sy = static_cast<size_t>(v.dims[0]),
               sz = static_cast<size_t>(v.dims[0]) * v.dims[1];
  const size_t b = static_cast<size_t>(i0) * sx + static_cast<size_t>(j0) * sy +
                   static_cast<size_t>(k0) * sz;
  const size_t di = static_cast<size_t>(i1 - i0) * sx;
  const size_t dj = static_cast<size_t>(j1 - j0) * sy;
  const size_t dk = static_cast<size_t>(k1 - k0) * sz;
  const double c000 = d[b], c100 = d[b + di];
  const double c010 = d[b + dj], c110 = d[b + di + dj];
  const double c001 = d[b + dk], c101 = d[b + di + dk];
  const double c011 = d[b + dj + dk], c111 = d[b + di + dj + dk];
  const double c00 = c000 + (c100 - c000) * fx;
  const double c10 = c010 + (c110 - c010) * fx;
  const double c01 = c001 + (c101 - c001) * fx;
  const double c11 = c011 + (c111 - c011) * fx;
  const double c0 = c00 + (c10 - c00) * fy;
  const double c1 = c01 + (c11 - c01) * fy;
  return static_cast<float>(c0 + (c1 - c0) * fz);
}

// Same interpolation, but reports whether the point lies inside the support
// instead of substituting the background fill. Used by the registration
// metric, which only scores voxels that land inside the moving volume.
inline bool sample_trilinear_inside(const Volume& v, double x, double y,
                                    double z, float* out) {
  if (x < 0.0 || y < 0.0 || z < 0.0 || x > v.dims[0] - 1 || y > v.dims[1] - 1 ||
      z > v.dims[2] - 1)
    return false;
  *out = sample_trilinear(v, x, y, z);
  return true;
}

// Resamples `v` through the world-to-world transform `t` onto `grid`:
// output voxel x takes the value of v at t^-1 * world(x). OpenMP-parallel
// over output slices; resample_serial is the loop-identical reference used to
// check that threading never changes a byte.
Volume resample(const Volume& v, const AffineTransform& t, const GridSpec& grid);
Volume resample_serial(const Volume& v, const AffineTransform& t, const GridSpec& grid);

// Box-mean downsampling by an integer factor; partial boxes at the high edge
// average over the voxels they cover. Output affine maps box centers so world
// geometry is preserved. Used by the registration pyramid.
Volume downsample_box(const Volume& v, int factor);
Volume downsample_box_serial(const Volume& v, int factor);

}  // namespace ctgca
