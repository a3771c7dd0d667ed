#pragma once

// Single-threaded versions of the OpenMP kernels. The parallel kernels must
// reproduce these bit-for-bit; tests and the benchmark compare the two.

#include "xpatch/geometry.hpp"
#include "xpatch/image.hpp"

namespace xpatch::reference {

BinaryMask rasterize_serial(const geometry::ClosedContour& contour, int height, int width);

Image median_smooth_serial(const Image& image, int window);

}  // namespace xpatch::reference
