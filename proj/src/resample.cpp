#include "ctgca/resample.hpp"

namespace ctgca {
namespace {

// Maps output voxel indices straight to input voxel coordinates:
// M = v.affine^-1 * t^-1 * grid.affine. One matrix apply per voxel.
Mat4 voxel_map(const Volume& v, const AffineTransform& t, const GridSpec& grid) {
  return v.affine.inverse() * (t.matrix.inverse() * grid.affine);
}

// Fills one output slice k. Shared by the parallel and serial drivers so the
// two can never drift apart arithmetically.
void resample_slice(const Volume& v, const Mat4& m, Volume& out, int k) {
  const int nx = out.dims[0], ny = out.dims[1];
  size_t idx = static_cast<size_t>(k) * nx * ny;
  for (int j = 0; j < ny; ++j) {
    double px = m(0, 1) * j + m(0, 2) * k + m(0, 3);
    double py = m(1, 1) * j + m(1, 2) * k + m(1, 3);
    double pz = m(2, 1) * j + m(2, 2) * k + m(2, 3);
    for (int i = 0; i < nx; ++i, ++idx) {
      out.data[idx] =
          sample_trilinear(v, px + m(0, 0) * i, py + m(1, 0) * i, pz + m(2, 0) * i);
    }
  }
}

Volume resample_setup(const Volume& v, const GridSpec& grid) {
  v.validate();
  if (std::fabs(grid.affine.det3()) <= 1e-9)
    throw DomainError("resample: grid affine is not invertible");
  return make_volume(grid);
}

void downsample_slice(const Volume& v, int factor, Volume& out, int k) {
  const int z0 = k * factor, z1 = std::min(z0 + factor, v.dims[2]);
  for (int j = 0; j < out.dims[1]; ++j) {
    const int y0 = j * factor, y1 = std::min(y0 + factor, v.dims[1]);
    for (int i = 0; i < out.dims[0]; ++i) {
      const int x0 = i * factor, x1 = std::min(x0 + factor, v.dims[0]);
      double acc = 0;
      for (int z = z0; z < z1; ++z)
        for (int y = y0; y < y1; ++y)
          for (int x = x0; x < x1; ++x) acc += v.at(x, y, z);
      const int n = (x1 - x0) * (y1 - y0) * (z1 - z0);
      out.at(i, j, k) = static_cast<float>(acc / n);
    }
  }
}

Volume downsample_setup(const Volume& v, int factor) {
  v.validate();
  if (factor < 1) throw DomainError("downsample_box: factor must be >= 1");
  Volume out;
  for (int a = 0; a < 3; ++a) {
    out.dims[a] = (v.dims[a] + factor - 1) / factor;
    out.spacing[a] = v.spacing[a] * factor;
  }
  // Columns scale by the factor; the origin shifts to the center of the first
  // box: world(out 0) = world(in (factor-1)/2).
  Mat4 m = v.affine;
  const double half = (factor - 1) / 2.0;
  for (int r = 0; r < 3; ++r) {
    m(r, 3) += (m(r, 0) + m(r, 1) + m(r, 2)) * half;
    m(r, 0) *= factor;
    m(r, 1) *= factor;
    m(r, 2) *= factor;
  }
  out.affine = m;
  out.data.assign(out.voxel_count(), 0.0f);
  return out;
}

}  // namespace

Volume resample(const Volume& v, const AffineTransform& t, const GridSpec& grid) {
  Volume out = resample_setup(v, grid);
  const Mat4 m = voxel_map(v, t, grid);
  const int nz = out.dims[2];
#pragma omp parallel for schedule(static)
  for (int k = 0; k < nz; ++k) resample_slice(v, m, out, k);
  return out;
}

Volume resample_serial(const Volume& v, const AffineTransform& t, const GridSpec& grid) {
  Volume out = resample_setup(v, grid);
  const Mat4 m = voxel_map(v, t, grid);
  for (int k = 0; k < out.dims[2]; ++k) resample_slice(v, m, out, k);
  return out;
}

Volume downsample_box(const Volume& v, int factor) {
  if (factor == 1) return v;
  Volume out = downsample_setup(v, factor);
  const int nz = out.dims[2];
#pragma omp parallel for schedule(static)
  for (int k = 0; k < nz; ++k) downsample_slice(v, factor, out, k);
  return out;
}

Volume downsample_box_serial(const Volume& v, int factor) {
  if (factor == 1) return v;
  Volume out = downsample_setup(v, factor);
  for (int k = 0; k < out.dims[2]; ++k) downsample_slice(v, factor, out, k);
  return out;
}

}  // namespace ctgca
