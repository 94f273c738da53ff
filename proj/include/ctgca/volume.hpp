#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <cstddef>
#include <string>
#include <vector>

#include "ctgca/errors.hpp"
#include "ctgca/mat4.hpp"

namespace ctgca {

// Fill value for samples that fall outside a volume: air in Hounsfield units.
inline constexpr float kBackgroundHu = -1024.0f;

// Geometry of a sampling grid without the data.
struct GridSpec {
  std::array<int, 3> dims{0, 0, 0};
  std::array<double, 3> spacing{1, 1, 1};  // mm
  Mat4 affine = Mat4::identity();          // voxel index -> world mm
};

// A 3-D scalar image. Data is float32 in Hounsfield units, x fastest.
struct Volume {
  std::array<int, 3> dims{0, 0, 0};
  std::array<double, 3> spacing{1, 1, 1};
  Mat4 affine = Mat4::identity();
  std::vector<float> data;

  size_t voxel_count() const {
    return static_cast<size_t>(dims[0]) * dims[1] * dims[2];
  }
  size_t index(int i, int j, int k) const {
    return static_cast<size_t>(i) +
           static_cast<size_t>(dims[0]) *
               (static_cast<size_t>(j) + static_cast<size_t>(dims[1]) * k);
  }
  float at(int i, int j, int k) const { return data[index(i, j, k)]; }
  float& at(int i, int j, int k) { return data[index(i, j, k)]; }

  GridSpec grid() const { return GridSpec{dims, spacing, affine}; }

  // Checks the class invariants; throws DomainError with the offending field.
  void validate() const {
    for (int a = 0; a < 3; ++a)
      if (dims[a] <= 0)
        throw DomainError("Volume: dims[" + std::to_string(a) + "] must be positive");
    if (data.size() != voxel_count())
      throw DomainError("Volume: data length " + std::to_string(data.size()) +
                        " does not match dims product " + std::to_string(voxel_count()));
    if (std::fabs(affine.det3()) <= 1e-9)
      throw DomainError("Volume: affine is not invertible (|det| <= 1e-9)");
    const auto norms = affine.column_norms3();
    for (int a = 0; a < 3; ++a)
      if (std::fabs(norms[a] - spacing[a]) > 1e-6)
        throw DomainError("Volume: spacing[" + std::to_string(a) +
                          "] disagrees with affine column norm");
  }
};

// Creates an empty (all background) volume on the given grid.
inline Volume make_volume(const GridSpec& g, float fill = kBackgroundHu) {
  Volume v;
  v.dims = g.dims;
  v.spacing = g.spacing;
  v.affine = g.affine;
  v.data.assign(static_cast<size_t>(g.dims[0]) * g.dims[1] * g.dims[2], fill);
  return v;
}

// Binary voxel mask on the same index convention as Volume.
struct Mask {
  std::array<int, 3> dims{0, 0, 0};
  std::vector<uint8_t> bits;

  size_t voxel_count() const {
    return static_cast<size_t>(dims[0]) * dims[1] * dims[2];
  }
  size_t index(int i, int j, int k) const {
    return static_cast<size_t>(i) +
           static_cast<size_t>(dims[0]) *
               (static_cast<size_t>(j) + static_cast<size_t>(dims[1]) * k);
  }
  bool get(int i, int j, int k) const { return bits[index(i, j, k)] != 0; }
  void set(int i, int j, int k, bool v) { bits[index(i, j, k)] = v ? 1 : 0; }

  size_t count() const {
    size_t n = 0;
    for (uint8_t b : bits) n += (b != 0);
    return n;
  }
};

inline Mask make_mask(const std::array<int, 3>& dims) {
  Mask m;
  m.dims = dims;
  m.bits.assign(static_cast<size_t>(dims[0]) * dims[1] * dims[2], 0);
  return m;
}

// A world-to-world affine transform, always carried together with the
// 12-parameter decomposition that generated it.
struct AffineTransform {
  AffineParams params{};            // all zero == identity
  Mat4 matrix = Mat4::identity();   // kept equal to compose_affine(params)

  static AffineTransform identity() { return AffineTransform{}; }

  static AffineTransform from_params(const AffineParams& p) {
    AffineTransform t;
    t.params = p;
    t.matrix = compose_affine(p);
    if (std::fabs(t.matrix.det3()) <= 1e-9)
      throw DomainError("AffineTransform: parameters give a singular matrix");
    return t;
  }

  static AffineTransform translation(double x, double y, double z) {
    AffineParams p{};
    p[0] = x;
    p[1] = y;
    p[2] = z;
    return from_params(p);
  }

  Mat4 inverse_matrix() const { return matrix.inverse(); }
};

}  // namespace ctgca
