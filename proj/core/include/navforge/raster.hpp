#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "navforge/scene.hpp"

namespace navforge {

inline constexpr int kScreenshotSize = 512;
inline constexpr int kViewTourCount = 6;  // one top-down plus five obliques

struct Raster {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;  // row-major, row 0 on top

  std::uint8_t at(int row, int col) const { return pixels[row * width + col]; }
  void set(int row, int col, std::uint8_t v) { pixels[row * width + col] = v; }
};

std::uint8_t category_gray(Category c);
std::uint8_t ground_gray();

// Orthographic top-down semantic render over the full ground square. A pixel
// takes the category gray of the tallest actor whose rotated footprint
// contains the pixel center (closed containment), else the ground gray.
Raster render_topdown(const SceneGraph& scene, const AssetCatalog& catalog,
                      int size = kScreenshotSize);

// view 0 is the top-down render; views 1..5 are fixed oblique axonometric
// projections rotated 60 degrees apart.
Raster render_view(const SceneGraph& scene, const AssetCatalog& catalog, int view,
                   int size = kScreenshotSize);

void write_pgm(const Raster& raster, const std::filesystem::path& file);

}  // namespace navforge
