#pragma once

#include <array>
#include <vector>

#include "ctgca/volume.hpp"

namespace ctgca {

// Binary morphology on Mask. The dilate/erode kernels are OpenMP-parallel
// over z slices with *_serial references used by the kernel-equality tests.

// Chebyshev (cube) dilation of radius r: separable 1-D max along x, y, z.
Mask dilate_chebyshev(const Mask& m, int radius);
Mask dilate_chebyshev_serial(const Mask& m, int radius);

// Offsets of the Euclidean ball |d|^2 <= r^2 (33 offsets for r = 2).
std::vector<std::array<int, 3>> ball_offsets(int radius);

// Euclidean-ball dilation / erosion (gather form). Outside the volume counts
// as unset, so erosion shrinks at the image border; callers keep structures
// away from the edge.
Mask dilate_ball(const Mask& m, int radius);
Mask dilate_ball_serial(const Mask& m, int radius);
Mask erode_ball(const Mask& m, int radius);
Mask erode_ball_serial(const Mask& m, int radius);

// Morphological closing: dilation followed by erosion with the same ball.
Mask close_ball(const Mask& m, int radius);

// Keeps only the largest 6-connected component (ties broken by the lowest
// linear start index, which BFS order makes deterministic). Empty input gives
// an empty mask.
Mask largest_component_6(const Mask& m);

}  // namespace ctgca
