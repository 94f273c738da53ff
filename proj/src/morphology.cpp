#include "ctgca/morphology.hpp"

#include <algorithm>

namespace ctgca {
namespace {

void check(const Mask& m, int radius) {
  if (radius < 0) throw DomainError("morphology: radius must be >= 0");
  if (m.bits.size() != m.voxel_count())
    throw DomainError("morphology: mask bits length does not match dims");
}

// 1-D running max (OR) of half-width r along the given axis for one (j,k)
// line. Dumb window scan; r is tiny (2) everywhere we use this.
void max_line(const Mask& in, Mask& out, int axis, int radius, int b, int c) {
  const int n = in.dims[axis];
  int idx[3];
  for (int i = 0; i < n; ++i) {
    const int lo = std::max(0, i - radius), hi = std::min(n - 1, i + radius);
    uint8_t v = 0;
    for (int s = lo; s <= hi && !v; ++s) {
      idx[axis] = s;
      idx[(axis + 1) % 3] = b;
      idx[(axis + 2) % 3] = c;
      v = in.bits[in.index(idx[0], idx[1], idx[2])];
    }
    idx[axis] = i;
    idx[(axis + 1) % 3] = b;
    idx[(axis + 2) % 3] = c;
    out.bits[out.index(idx[0], idx[1], idx[2])] = v;
  }
}

template <bool kParallel>
Mask chebyshev_impl(const Mask& m, int radius) {
  check(m, radius);
  Mask a = m, b = make_mask(m.dims);
  for (int axis = 0; axis < 3; ++axis) {
    const int nb = m.dims[(axis + 1) % 3], nc = m.dims[(axis + 2) % 3];
    if constexpr (kParallel) {
#pragma omp parallel for schedule(static)
      for (int c = 0; c < nc; ++c)
        for (int bb = 0; bb < nb; ++bb) max_line(a, b, axis, radius, bb, c);
    } else {
      for (int c = 0; c < nc; ++c)
        for (int bb = 0; bb < nb; ++bb) max_line(a, b, axis, radius, bb, c);
    }
    std::swap(a, b);
  }
  return a;
}

// Shared slice body for ball dilation (gather over offsets).
void dilate_slice(const Mask& m, const std::vector<std::array<int, 3>>& offs,
                  Mask& out, int k) {
  for (int j = 0; j < m.dims[1]; ++j)
    for (int i = 0; i < m.dims[0]; ++i) {
      uint8_t v = 0;
      for (const auto& o : offs) {
        const int x = i + o[0], y = j + o[1], z = k + o[2];
        if (x < 0 || y < 0 || z < 0 || x >= m.dims[0] || y >= m.dims[1] ||
            z >= m.dims[2])
          continue;
        if (m.bits[m.index(x, y, z)]) {
          v = 1;
          break;
        }
      }
      out.bits[out.index(i, j, k)] = v;
    }
}

void erode_slice(const Mask& m, const std::vector<std::array<int, 3>>& offs,
                 Mask& out, int k) {
  for (int j = 0; j < m.dims[1]; ++j)
    for (int i = 0; i < m.dims[0]; ++i) {
      uint8_t v = 1;
      for (const auto& o : offs) {
        const int x = i + o[0], y = j + o[1], z = k + o[2];
        if (x < 0 || y < 0 || z < 0 || x >= m.dims[0] || y >= m.dims[1] ||
            z >= m.dims[2] || !m.bits[m.index(x, y, z)]) {
          v = 0;
          break;
        }
      }
      out.bits[out.index(i, j, k)] = v;
    }
}

}  // namespace

Mask dilate_chebyshev(const Mask& m, int radius) {
  return chebyshev_impl<true>(m, radius);
}
Mask dilate_chebyshev_serial(const Mask& m, int radius) {
  return chebyshev_impl<false>(m, radius);
}

std::vector<std::array<int, 3>> ball_offsets(int radius) {
  std::vector<std::array<int, 3>> offs;
  for (int z = -radius; z <= radius; ++z)
    for (int y = -radius; y <= radius; ++y)
      for (int x = -radius; x <= radius; ++x)
        if (x * x + y * y + z * z <= radius * radius) offs.push_back({x, y, z});
  return offs;
}

Mask dilate_ball(const Mask& m, int radius) {
  check(m, radius);
  const auto offs = ball_offsets(radius);
  Mask out = make_mask(m.dims);
  const int nz = m.dims[2];
#pragma omp parallel for schedule(static)
  for (int k = 0; k < nz; ++k) dilate_slice(m, offs, out, k);
  return out;
}

Mask dilate_ball_serial(const Mask& m, int radius) {
  check(m, radius);
  const auto offs = ball_offsets(radius);
  Mask out = make_mask(m.dims);
  for (int k = 0; k < m.dims[2]; ++k) dilate_slice(m, offs, out, k);
  return out;
}

Mask erode_ball(const Mask& m, int radius) {
  check(m, radius);
  const auto offs = ball_offsets(radius);
  Mask out = make_mask(m.dims);
  const int nz = m.dims[2];
#pragma omp parallel for schedule(static)
  for (int k = 0; k < nz; ++k) erode_slice(m, offs, out, k);
  return out;
}

Mask erode_ball_serial(const Mask& m, int radius) {
  check(m, radius);
  const auto offs = ball_offsets(radius);
  Mask out = make_mask(m.dims);
  for (int k = 0; k < m.dims[2]; ++k) erode_slice(m, offs, out, k);
  return out;
}

Mask close_ball(const Mask& m, int radius) {
  return erode_ball(dilate_ball(m, radius), radius);
}

Mask largest_component_6(const Mask& m) {
  if (m.bits.size() != m.voxel_count())
    throw DomainError("morphology: mask bits length does not match dims");
  const int nx = m.dims[0], ny = m.dims[1], nz = m.dims[2];
  std::vector<int32_t> label(m.bits.size(), -1);
  std::vector<size_t> stack;
  size_t best_size = 0;
  int32_t best_label = -1, next_label = 0;
  const size_t sy = static_cast<size_t>(nx), sz = static_cast<size_t>(nx) * ny;
  for (size_t seed = 0; seed < m.bits.size(); ++seed) {
    if (!m.bits[seed] || label[seed] >= 0) continue;
    const int32_t lab = next_label++;
    size_t size = 0;
    stack.clear();
    stack.push_back(seed);
    label[seed] = lab;
    while (!stack.empty()) {
      const size_t p = stack.back();
      stack.pop_back();
      ++size;
      const int i = static_cast<int>(p % sy);
      const int j = static_cast<int>((p / sy) % ny);
      const int k = static_cast<int>(p / sz);
      const size_t nb[6] = {p - 1, p + 1, p - sy, p + sy, p - sz, p + sz};
      const bool ok[6] = {i > 0, i < nx - 1, j > 0, j < ny - 1, k > 0, k < nz - 1};
      for (int d = 0; d < 6; ++d) {
        if (!ok[d]) continue;
        const size_t q = nb[d];
        if (m.bits[q] && label[q] < 0) {
          label[q] = lab;
          stack.push_back(q);
        }
      }
    }
    if (size > best_size) {
      best_size = size;
      best_label = lab;
    }
  }
  Mask out = make_mask(m.dims);
  if (best_label >= 0)
    for (size_t p = 0; p < out.bits.size(); ++p)
      out.bits[p] = (label[p] == best_label) ? 1 : 0;
  return out;
}

}  // namespace ctgca
