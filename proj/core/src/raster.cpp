#include "navforge/raster.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "navforge/error.hpp"

namespace navforge {

namespace {

constexpr double kObliqueTiltRad = kPi / 4.0;
constexpr double kObliqueYawStepDeg = 60.0;

struct Footprint {
  const ActorRecord* rec;
  double cx, cy;       // world center
  double hx, hy;       // scaled half extents
  double cos_yaw, sin_yaw;
  double top_z;
};

struct Poly {
  std::vector<std::pair<double, double>> pts;  // convex, CCW
  double depth = 0.0;
  std::uint8_t gray = 0;
};

double cross(const std::pair<double, double>& o, const std::pair<double, double>& a,
             const std::pair<double, double>& b) {
  return (a.first - o.first) * (b.second - o.second) -
         (a.second - o.second) * (b.first - o.first);
}

std::vector<std::pair<double, double>> convex_hull(std::vector<std::pair<double, double>> pts) {
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  if (pts.size() < 3) return pts;
  std::vector<std::pair<double, double>> hull(2 * pts.size());
  std::size_t k = 0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    while (k >= 2 && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
    hull[k++] = pts[i];
  }
  for (std::size_t i = pts.size() - 1, t = k + 1; i-- > 0;) {
    while (k >= t && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
    hull[k++] = pts[i];
  }
  hull.resize(k - 1);
  return hull;
}

bool inside_convex(const std::vector<std::pair<double, double>>& hull, double x, double y) {
  if (hull.size() < 3) return false;
  for (std::size_t i = 0; i < hull.size(); ++i) {
    const auto& a = hull[i];
    const auto& b = hull[(i + 1) % hull.size()];
    if (cross(a, b, {x, y}) < 0) return false;
  }
  return true;
}

void fill_convex(Raster& raster, const Poly& poly, double world_per_px, double half_world) {
  double min_x = 1e300, max_x = -1e300, min_y = 1e300, max_y = -1e300;
  for (const auto& [x, y] : poly.pts) {
    min_x = std::min(min_x, x);
    max_x = std::max(max_x, x);
    min_y = std::min(min_y, y);
    max_y = std::max(max_y, y);
  }
  auto col_of = [&](double x) { return (x + half_world) / world_per_px - 0.5; };
  auto row_of = [&](double y) { return (half_world - y) / world_per_px - 0.5; };
  int c0 = std::max(0, static_cast<int>(std::floor(col_of(min_x))));
  int c1 = std::min(raster.width - 1, static_cast<int>(std::ceil(col_of(max_x))));
  int r0 = std::max(0, static_cast<int>(std::floor(row_of(max_y))));
  int r1 = std::min(raster.height - 1, static_cast<int>(std::ceil(row_of(min_y))));
  for (int r = r0; r <= r1; ++r) {
    double y = half_world - (r + 0.5) * world_per_px;
    for (int c = c0; c <= c1; ++c) {
      double x = -half_world + (c + 0.5) * world_per_px;
      if (inside_convex(poly.pts, x, y)) raster.set(r, c, poly.gray);
    }
  }
}

}  // namespace

std::uint8_t category_gray(Category c) {
  switch (c) {
    case Category::Road: return 64;
    case Category::Building: return 96;
    case Category::Container: return 112;
    case Category::Vehicle: return 128;
    case Category::StreetFurniture: return 160;
    case Category::Prop: return 192;
    case Category::Tree: return 224;
  }
  return 192;
}

std::uint8_t ground_gray() { return 32; }

Raster render_topdown(const SceneGraph& scene, const AssetCatalog& catalog, int size) {
  if (size <= 0) throw_schema("bad-args", "raster size must be positive");
  Raster raster{size, size, std::vector<std::uint8_t>(static_cast<std::size_t>(size) * size,
                                                      ground_gray())};
  double half = scene.ground_half_extent;
  double world_per_px = (2.0 * half) / size;

  std::vector<Footprint> prints;
  for (const ActorRecord* rec : scene.actors_in_level()) {
    const AssetDescriptor& asset = catalog.get(rec->asset_id);
    const Transform& t = rec->transform;
    double yaw = deg_to_rad(t.rotation.yaw);
    prints.push_back({rec, t.location.x, t.location.y, asset.base_extent.x * t.scale.x,
                      asset.base_extent.y * t.scale.y, std::cos(yaw), std::sin(yaw),
                      t.location.z + asset.base_extent.z * t.scale.z});
  }
  // Taller actors paint last so the top-down view shows what a camera sees.
  std::sort(prints.begin(), prints.end(), [](const Footprint& a, const Footprint& b) {
    if (a.top_z != b.top_z) return a.top_z < b.top_z;
    return a.rec->name < b.rec->name;
  });

  for (const Footprint& fp : prints) {
    std::uint8_t gray = category_gray(fp.rec->category);
    double reach_x = std::fabs(fp.cos_yaw * fp.hx) + std::fabs(fp.sin_yaw * fp.hy);
    double reach_y = std::fabs(fp.sin_yaw * fp.hx) + std::fabs(fp.cos_yaw * fp.hy);
    auto col_of = [&](double x) { return (x + half) / world_per_px - 0.5; };
    auto row_of = [&](double y) { return (half - y) / world_per_px - 0.5; };
    int c0 = std::max(0, static_cast<int>(std::floor(col_of(fp.cx - reach_x))));
    int c1 = std::min(size - 1, static_cast<int>(std::ceil(col_of(fp.cx + reach_x))));
    int r0 = std::max(0, static_cast<int>(std::floor(row_of(fp.cy + reach_y))));
    int r1 = std::min(size - 1, static_cast<int>(std::ceil(row_of(fp.cy - reach_y))));
    for (int r = r0; r <= r1; ++r) {
      double y = half - (r + 0.5) * world_per_px;
      for (int c = c0; c <= c1; ++c) {
        double x = -half + (c + 0.5) * world_per_px;
        // Pixel center inside the yaw-rotated footprint, closed test.
        double dx = x - fp.cx;
        double dy = y - fp.cy;
        double lx = dx * fp.cos_yaw + dy * fp.sin_yaw;
        double ly = -dx * fp.sin_yaw + dy * fp.cos_yaw;
        if (std::fabs(lx) <= fp.hx && std::fabs(ly) <= fp.hy) raster.set(r, c, gray);
      }
    }
  }
  return raster;
}

Raster render_view(const SceneGraph& scene, const AssetCatalog& catalog, int view, int size) {
  if (view < 0 || view >= kViewTourCount) {
    throw_schema("bad-args", "view index must lie in 0..5");
  }
  if (view == 0) return render_topdown(scene, catalog, size);

  Raster raster{size, size, std::vector<std::uint8_t>(static_cast<std::size_t>(size) * size,
                                                      ground_gray())};
  double half = scene.ground_half_extent;
  // The oblique frame leans the camera over; the same world span maps onto
  // the image with a little headroom for lifted roofs.
  double half_world = half * 1.2;
  double world_per_px = (2.0 * half_world) / size;
  double view_yaw = deg_to_rad(kObliqueYawStepDeg * view);
  double cv = std::cos(view_yaw);
  double sv = std::sin(view_yaw);
  double ct = std::cos(kObliqueTiltRad);
  double st = std::sin(kObliqueTiltRad);

  std::vector<Poly> polys;
  for (const ActorRecord* rec : scene.actors_in_level()) {
    Aabb box = world_aabb(*rec, catalog);
    Poly poly;
    poly.gray = category_gray(rec->category);
    std::vector<std::pair<double, double>> projected;
    double depth = 0.0;
    for (int corner = 0; corner < 8; ++corner) {
      double x = (corner & 1) ? box.max.x : box.min.x;
      double y = (corner & 2) ? box.max.y : box.min.y;
      double z = (corner & 4) ? box.max.z : box.min.z;
      double rx = x * cv - y * sv;
      double ry = x * sv + y * cv;
      projected.push_back({rx, ry * ct + z * st});
      depth += ry;
    }
    poly.pts = convex_hull(std::move(projected));
    poly.depth = depth / 8.0;
    polys.push_back(std::move(poly));
  }
  // Painter order, farthest first; name breaks depth ties deterministically.
  std::vector<std::size_t> order(polys.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::vector<const ActorRecord*> recs = scene.actors_in_level();
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (polys[a].depth != polys[b].depth) return polys[a].depth > polys[b].depth;
    return recs[a]->name < recs[b]->name;
  });
  for (std::size_t idx : order) fill_convex(raster, polys[idx], world_per_px, half_world);
  return raster;
}

void write_pgm(const Raster& raster, const std::filesystem::path& file) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw_schema("io-error", "cannot write raster file " + file.string());
  out << "P5\n" << raster.width << " " << raster.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(raster.pixels.data()),
            static_cast<std::streamsize>(raster.pixels.size()));
}

}  // namespace navforge
