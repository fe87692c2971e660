#include "navforge/builder.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>

#include "navforge/error.hpp"
#include "navforge/scene_io.hpp"
#include "navforge/verify.hpp"

namespace navforge {

const std::vector<Archetype>& all_archetypes() {
  static const std::vector<Archetype> all = {
      Archetype::DowntownIntersection, Archetype::Residential, Archetype::Industrial,
      Archetype::CommercialAvenue, Archetype::MixedUse};
  return all;
}

std::string to_string(Archetype a) {
  switch (a) {
    case Archetype::DowntownIntersection:
      return "downtown_intersection";
    case Archetype::Residential:
      return "residential";
    case Archetype::Industrial:
      return "industrial";
    case Archetype::CommercialAvenue:
      return "commercial_avenue";
    case Archetype::MixedUse:
      return "mixed_use";
  }
  return "mixed_use";
}

std::optional<Archetype> archetype_from_string(const std::string& tag) {
  for (Archetype a : all_archetypes()) {
    if (to_string(a) == tag) return a;
  }
  return std::nullopt;
}

double category_spacing_cm(Category c) {
  switch (c) {
    case Category::Building:
      return 300.0;
    case Category::Container:
      return 250.0;
    case Category::Vehicle:
      return 200.0;
    case Category::Tree:
      return 150.0;
    case Category::StreetFurniture:
      return 100.0;
    case Category::Prop:
      return 80.0;
    case Category::Road:
      return 0.0;
  }
  return 80.0;
}

namespace {

using ordered_json = nlohmann::ordered_json;

std::string two_digit(const std::string& stem, int i) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "_%02d", i);
  return stem + buf;
}

// Clearance between two footprints: the largest axis separation, negative
// when the rectangles overlap on both axes.
double footprint_gap(const Aabb& a, const Aabb& b) {
  double gx = std::max(b.min.x - a.max.x, a.min.x - b.max.x);
  double gy = std::max(b.min.y - a.max.y, a.min.y - b.max.y);
  return std::max(gx, gy);
}

struct Placer {
  const AssetCatalog& catalog;
  Rng& rng;
  LayoutPlan& plan;
  double district = 0.0;  // placement half-extent
  std::vector<Aabb> boxes;
  std::vector<Category> categories;

  Transform make_transform(const AssetDescriptor& asset, double x, double y, double yaw) const {
    Transform t;
    t.location = {x, y, asset.base_extent.z};  // bottom on the ground plane
    t.rotation = Rotation::make(yaw);
    return t;
  }

  void push(const std::string& name, const AssetDescriptor& asset, const Transform& t) {
    plan.actors.push_back({name, asset.asset_id, asset.category, t});
    boxes.push_back(world_aabb(t, asset.base_extent));
    categories.push_back(asset.category);
  }

  // Roads and other fixed anchors skip the spacing checks.
  void road(const std::string& name, const std::string& asset_id, double x, double y,
            double yaw) {
    const AssetDescriptor& asset = catalog.get(asset_id);
    push(name, asset, make_transform(asset, x, y, yaw));
  }

  bool fits(const Aabb& box, Category category, bool allow_on_road) const {
    if (box.min.x < -district || box.max.x > district || box.min.y < -district ||
        box.max.y > district) {
      return false;
    }
    for (std::size_t i = 0; i < boxes.size(); ++i) {
      if (categories[i] == Category::Road) {
        if (allow_on_road) continue;
        if (aabb_xy_overlap_area(box, boxes[i]) > 0.0) return false;
        continue;
      }
      double required = std::min(category_spacing_cm(category), category_spacing_cm(categories[i]));
      if (footprint_gap(box, boxes[i]) < required) return false;
    }
    return true;
  }

  bool dress(const std::string& name, const std::string& asset_id, double x, double y, double yaw,
             double jitter, int tries = 40, bool allow_on_road = false) {
    const AssetDescriptor& asset = catalog.get(asset_id);
    for (int i = 0; i < tries; ++i) {
      double spread = i == 0 ? 0.0 : std::max(jitter, 80.0) * (1.0 + i / 8.0);
      double cx = x + (i == 0 ? 0.0 : rng.uniform(-spread, spread));
      double cy = y + (i == 0 ? 0.0 : rng.uniform(-spread, spread));
      Transform t = make_transform(asset, cx, cy, yaw);
      Aabb box = world_aabb(t, asset.base_extent);
      if (!fits(box, asset.category, allow_on_road)) continue;
      push(name, asset, t);
      return true;
    }
    return false;
  }

  void anchor(const std::string& name, const std::string& asset_id, double x, double y,
              double yaw, double jitter = 0.0, int tries = 40, bool allow_on_road = false) {
    if (dress(name, asset_id, x, y, yaw, jitter, tries, allow_on_road)) return;
    const AssetDescriptor& asset = catalog.get(asset_id);
    throw_experiment(
        "layout-infeasible",
        "cannot place " + name + " (" + asset_id + "): binding constraint is the " +
            to_string(asset.category) + " spacing floor of " +
            std::to_string(static_cast<int>(category_spacing_cm(asset.category))) +
            " cm within placement half-extent " + std::to_string(static_cast<int>(district)) +
            " cm");
  }
};

int scaled(int base, double f) {
  return std::max(1, static_cast<int>(std::llround(base * f)));
}

// Road axis of long segments every 2000 cm, clipped to the district.
void road_axis(Placer& p, const std::string& stem, bool horizontal, double cross_offset) {
  int kmax = static_cast<int>(std::floor((p.district - 1000.0) / 2000.0));
  kmax = std::max(kmax, 1);
  int i = 0;
  for (int k = -kmax; k <= kmax; ++k) {
    double along = 2000.0 * k;
    if (horizontal) {
      p.road(two_digit(stem, i++), "road_straight_long", along, cross_offset, 0.0);
    } else {
      p.road(two_digit(stem, i++), "road_straight_long", cross_offset, along, 90.0);
    }
  }
}

void plan_downtown(Placer& p, double f, Rng& rng) {
  road_axis(p, "dt_road_ew", true, 0.0);
  road_axis(p, "dt_road_ns", false, 0.0);
  p.road("dt_road_cross", "road_cross_section", 0.0, 0.0, 0.0);

  const double qx[4] = {1.0, -1.0, -1.0, 1.0};
  const double qy[4] = {1.0, 1.0, -1.0, -1.0};
  int towers = scaled(4, f);
  for (int i = 0; i < towers && i < 4; ++i) {
    const char* asset = i % 2 == 0 ? "bldg_tower_glass" : "bldg_tower_brick";
    p.anchor(two_digit("dt_tower", i), asset, qx[i] * 2200.0, qy[i] * 2000.0,
             rng.uniform(-10.0, 10.0), 50.0);
  }
  int ring = scaled(8, f);
  for (int i = 0; i < ring && i < 8; ++i) {
    int q = i % 4;
    const char* asset = i % 2 == 0 ? "bldg_office_low" : "bldg_shop_small";
    double x = i < 4 ? qx[q] * 4600.0 : qx[q] * 1800.0;
    double y = i < 4 ? qy[q] * 1800.0 : qy[q] * 4400.0;
    p.anchor(two_digit("dt_block", i), asset, x, y, rng.uniform(-10.0, 10.0), 50.0);
  }
  int trees = scaled(4, f);
  for (int i = 0; i < trees && i < 4; ++i) {
    p.dress(two_digit("dt_tree", i), i % 2 == 0 ? "tree_oak" : "tree_maple", qx[i] * 5000.0,
            qy[i] * 5000.0, rng.uniform(0.0, 180.0), 120.0);
  }
  int lamps = scaled(12, f);
  int placed = 0;
  for (int k = -2; k <= 2 && placed < lamps; ++k) {
    if (k == 0) continue;
    for (double side : {-1.0, 1.0}) {
      if (placed >= lamps) break;
      p.dress(two_digit("dt_lamp_ew", placed), "furn_lamp_post", 2000.0 * k, side * 600.0, 0.0,
              0.0);
      ++placed;
    }
  }
  for (int k = -1; k <= 1 && placed < lamps; ++k) {
    if (k == 0) continue;
    for (double side : {-1.0, 1.0}) {
      if (placed >= lamps) break;
      p.dress(two_digit("dt_lamp_ns", placed), "furn_lamp_post", side * 600.0, 3000.0 * k, 0.0,
              0.0);
      ++placed;
    }
  }
  int benches = scaled(4, f);
  for (int i = 0; i < benches && i < 4; ++i) {
    p.dress(two_digit("dt_bench", i), "furn_bench", qx[i] * 800.0, qy[i] * 800.0,
            qx[i] * qy[i] > 0 ? 0.0 : 90.0, 0.0);
  }
  int cars = scaled(6, f);
  const double car_x[6] = {-3500.0, -1500.0, 1500.0, 3500.0, -190.0, 190.0};
  const double car_y[6] = {-190.0, 190.0, -190.0, 190.0, 2500.0, -2500.0};
  const double car_yaw[6] = {0.0, 180.0, 0.0, 180.0, 90.0, -90.0};
  const char* car_assets[6] = {"veh_sedan", "veh_suv", "veh_bus", "veh_van", "veh_pickup",
                               "veh_sedan"};
  for (int i = 0; i < cars && i < 6; ++i) {
    p.dress(two_digit("dt_veh", i), car_assets[i], car_x[i], car_y[i], car_yaw[i], 200.0, 40,
            true);
  }
  int props = scaled(4, f);
  const double prop_x[4] = {1300.0, -1300.0, 700.0, -700.0};
  const double prop_y[4] = {-1300.0, 1300.0, 550.0, -550.0};
  for (int i = 0; i < props && i < 4; ++i) {
    p.dress(two_digit("dt_prop", i), i < 2 ? "prop_planter" : "prop_bollard", prop_x[i],
            prop_y[i], 0.0, 60.0);
  }
}

void plan_residential(Placer& p, double f, Rng& rng) {
  road_axis(p, "rs_road", true, 0.0);

  const char* house_pool[3] = {"bldg_house_small", "bldg_house_gable", "bldg_rowhouse"};
  const double slot_x[6] = {-4250.0, -2550.0, -850.0, 850.0, 2550.0, 4250.0};
  int houses = std::min(scaled(10, f), 12);
  for (int i = 0; i < houses; ++i) {
    double side = i % 2 == 0 ? 1.0 : -1.0;
    double x = slot_x[(i / 2) % 6];
    p.anchor(two_digit("rs_house", i), house_pool[rng.index(3)], x, side * 1500.0,
             side > 0 ? -90.0 : 90.0, 100.0);
  }
  int trees = std::min(scaled(12, f), 12);
  for (int i = 0; i < trees; ++i) {
    double side = i % 2 == 0 ? 1.0 : -1.0;
    double x = -4200.0 + 1400.0 * ((i / 2) % 6);
    const char* pool[3] = {"tree_oak", "tree_birch", "tree_maple"};
    p.dress(two_digit("rs_tree", i), pool[rng.index(3)], x, side * 2900.0,
            rng.uniform(0.0, 180.0), 150.0);
  }
  int boxes = scaled(4, f);
  const double mb_x[4] = {-3950.0, -2250.0, -550.0, 1150.0};
  for (int i = 0; i < boxes && i < 4; ++i) {
    double side = i % 2 == 0 ? 1.0 : -1.0;
    p.dress(two_digit("rs_mailbox", i), "furn_mailbox", mb_x[i], side * 650.0, 0.0, 40.0);
  }
  int benches = scaled(2, f);
  for (int i = 0; i < benches && i < 2; ++i) {
    p.dress(two_digit("rs_bench", i), "furn_bench", 0.0, (i == 0 ? 700.0 : -700.0), 0.0, 60.0);
  }
  int cars = scaled(3, f);
  const double car_x[3] = {-2600.0, 300.0, 2900.0};
  for (int i = 0; i < cars && i < 3; ++i) {
    const char* pool[3] = {"veh_sedan", "veh_pickup", "veh_suv"};
    p.dress(two_digit("rs_veh", i), pool[rng.index(3)], car_x[i], i % 2 == 0 ? -190.0 : 190.0,
            i % 2 == 0 ? 0.0 : 180.0, 150.0, 40, true);
  }
  int props = scaled(2, f);
  for (int i = 0; i < props && i < 2; ++i) {
    p.dress(two_digit("rs_planter", i), "prop_planter", i == 0 ? 4800.0 : -4800.0,
            i == 0 ? 700.0 : -700.0, 0.0, 60.0);
  }
}

void plan_industrial(Placer& p, double f, Rng& rng) {
  for (int k = 0; k < 4; ++k) {
    p.road(two_digit("in_road", k), "road_straight_long", -3000.0 + 2000.0 * k, 0.0, 0.0);
  }
  p.road("in_spur_00", "road_straight_short", 3900.0, 900.0, 90.0);
  p.road("in_spur_01", "road_straight_short", 3900.0, 1900.0, 90.0);

  p.anchor("in_hall", "bldg_factory_hall", -2800.0, 2600.0, 0.0, 60.0);
  p.anchor("in_warehouse", "bldg_warehouse", 1600.0, 2600.0, 0.0, 60.0);
  p.anchor("in_office", "bldg_office_low", 4500.0, -1400.0, 0.0, 60.0);

  int boxes = std::min(scaled(8, f), 8);
  const char* box_pool[4] = {"container_12m", "container_6m", "container_stack_2",
                             "container_open_top"};
  for (int i = 0; i < boxes; ++i) {
    double y = i % 2 == 0 ? -1700.0 : -2300.0;
    double x = -4000.0 + 1500.0 * (i / 2);
    p.anchor(two_digit("in_container", i), box_pool[rng.index(4)], x, y, 0.0, 30.0);
  }
  p.dress("in_silo", "container_silo", -4200.0, -3500.0, 0.0, 120.0);
  p.dress("in_tank", "container_tank", 4200.0, -3000.0, 0.0, 120.0);

  int cars = scaled(3, f);
  const double car_x[3] = {-1000.0, 1500.0, 0.0};
  const double car_y[3] = {190.0, -190.0, -900.0};
  const char* car_pool[3] = {"veh_truck_box", "veh_truck_box", "veh_van"};
  for (int i = 0; i < cars && i < 3; ++i) {
    p.dress(two_digit("in_veh", i), car_pool[i], car_x[i], car_y[i], i == 1 ? 180.0 : 0.0, 150.0,
            40, i < 2);
  }
  int props = scaled(5, f);
  const char* prop_pool[5] = {"prop_barrel", "prop_barrel", "prop_pallet", "prop_pallet",
                              "prop_dumpster"};
  const double prop_x[5] = {-600.0, -150.0, 800.0, 1400.0, 2200.0};
  const double prop_y[5] = {900.0, 950.0, 900.0, 900.0, 1100.0};
  for (int i = 0; i < props && i < 5; ++i) {
    p.dress(two_digit("in_prop", i), prop_pool[i], prop_x[i], prop_y[i], 0.0, 80.0);
  }
  p.dress("in_sign_00", "furn_sign_post", -2000.0, 550.0, 0.0, 40.0);
  p.dress("in_sign_01", "furn_sign_post", 2000.0, 550.0, 0.0, 40.0);
}

void plan_commercial(Placer& p, double f, Rng& rng) {
  int i = 0;
  for (int k = -2; k <= 2; ++k) {
    p.road(two_digit("ca_road_n", i), "road_straight_long", 2000.0 * k, 400.0, 0.0);
    p.road(two_digit("ca_road_s", i), "road_straight_long", 2000.0 * k, -400.0, 0.0);
    ++i;
  }
  p.road("ca_plaza_n", "road_plaza_tile", 0.0, 1200.0, 0.0);
  p.road("ca_plaza_s", "road_plaza_tile", 0.0, -1200.0, 0.0);
  for (int k = 0; k < 3; ++k) {
    double x = -2000.0 + 2000.0 * k;
    p.road(two_digit("ca_walk_n", k), "road_sidewalk", x, 950.0, 0.0);
    p.road(two_digit("ca_walk_s", k), "road_sidewalk", x, -950.0, 0.0);
  }

  const double shop_x[4] = {-4400.0, -2200.0, 2200.0, 4400.0};
  int shops = std::min(scaled(8, f), 8);
  for (int k = 0; k < shops; ++k) {
    double side = k % 2 == 0 ? 1.0 : -1.0;
    const char* asset = k % 3 == 0 ? "bldg_shop_small" : "bldg_shop_wide";
    p.anchor(two_digit("ca_shop", k), asset, shop_x[(k / 2) % 4], side * 2000.0,
             side > 0 ? -90.0 : 90.0, 80.0);
  }
  int lamps = std::min(scaled(8, f), 8);
  int placed = 0;
  for (int k = -4; k <= 4 && placed < lamps; ++k) {
    if (k == 0) continue;
    double side = k % 2 == 0 ? 1.0 : -1.0;
    p.dress(two_digit("ca_lamp", placed), "furn_lamp_post", 1000.0 * k, side * 1150.0, 0.0, 0.0);
    ++placed;
  }
  int cafes = scaled(4, f);
  const double cafe_x[4] = {-2200.0, 2200.0, -2200.0, 2200.0};
  const double cafe_y[4] = {1290.0, 1290.0, -1290.0, -1290.0};
  for (int k = 0; k < cafes && k < 4; ++k) {
    p.dress(two_digit("ca_cafe", k), "furn_cafe_table", cafe_x[k], cafe_y[k],
            rng.uniform(0.0, 90.0), 40.0);
  }
  p.dress("ca_bin_n", "furn_trash_bin", 2600.0, 1250.0, 0.0, 40.0);
  p.dress("ca_bin_s", "furn_trash_bin", -2600.0, -1250.0, 0.0, 40.0);
  p.dress("ca_bus_stop", "furn_bus_stop", -900.0, 1360.0, 0.0, 40.0);
  p.dress("ca_tree_e", "tree_palm", 5250.0, 0.0, 0.0, 30.0);
  p.dress("ca_tree_w", "tree_palm", -5250.0, 0.0, 0.0, 30.0);
  int planters = scaled(4, f);
  const double pl_x[4] = {3300.0, -3300.0, 3300.0, -3300.0};
  const double pl_y[4] = {1250.0, 1250.0, -1250.0, -1250.0};
  for (int k = 0; k < planters && k < 4; ++k) {
    p.dress(two_digit("ca_planter", k), "prop_planter", pl_x[k], pl_y[k], 0.0, 40.0);
  }
  int cars = scaled(4, f);
  const double car_x[4] = {-3300.0, -1100.0, 1100.0, 3300.0};
  for (int k = 0; k < cars && k < 4; ++k) {
    double side = k % 2 == 0 ? 1.0 : -1.0;
    const char* pool[4] = {"veh_sedan", "veh_van", "veh_suv", "veh_bus"};
    p.dress(two_digit("ca_veh", k), pool[k], car_x[k], side * 400.0, side > 0 ? 180.0 : 0.0,
            150.0, 40, true);
  }
}

void plan_mixed(Placer& p, double f, Rng& rng) {
  for (int k = 0; k < 5; ++k) {
    p.road(two_digit("mx_road", k), "road_straight_long", -4000.0 + 2000.0 * k, 0.0, 0.0);
  }
  p.road("mx_spur_00", "road_straight_long", 0.0, 1400.0, 90.0);
  p.road("mx_spur_01", "road_straight_long", 0.0, 3400.0, 90.0);

  p.anchor("mx_office_mid", "bldg_office_mid", -2600.0, 1800.0, 0.0, 60.0);
  p.anchor("mx_civic", "bldg_civic_hall", 2800.0, 2000.0, 0.0, 60.0);
  p.anchor("mx_office_nw", "bldg_office_low", -3000.0, 3800.0, 0.0, 60.0);
  const char* house_pool[3] = {"bldg_house_small", "bldg_house_gable", "bldg_rowhouse"};
  int houses = std::min(scaled(3, f), 3);
  for (int i = 0; i < houses; ++i) {
    p.anchor(two_digit("mx_house", i), house_pool[i], 1200.0 + 1500.0 * i, -1600.0, 90.0, 80.0);
  }
  p.anchor("mx_shop", "bldg_shop_wide", -2600.0, -1500.0, 90.0, 60.0);
  p.anchor("mx_office_sw", "bldg_office_low", -4600.0, -1600.0, 0.0, 40.0);

  int boxes = std::min(scaled(3, f), 3);
  const double box_x[3] = {2600.0, 4100.0, 1100.0};
  const char* box_pool[3] = {"container_12m", "container_6m", "container_tank"};
  for (int i = 0; i < boxes; ++i) {
    p.dress(two_digit("mx_container", i), box_pool[i], box_x[i], -3400.0, 0.0, 60.0);
  }
  int trees = std::min(scaled(6, f), 6);
  const double tree_x[6] = {-4700.0, -4700.0, -4700.0, -1500.0, 0.0, 1500.0};
  const double tree_y[6] = {1200.0, 2600.0, 4000.0, -2800.0, -2800.0, -2800.0};
  for (int i = 0; i < trees; ++i) {
    const char* pool[3] = {"tree_pine", "tree_oak", "tree_cypress"};
    p.dress(two_digit("mx_tree", i), pool[rng.index(3)], tree_x[i], tree_y[i],
            rng.uniform(0.0, 180.0), 100.0);
  }
  p.dress("mx_lamp_00", "furn_lamp_post", -2000.0, 600.0, 0.0, 0.0);
  p.dress("mx_lamp_01", "furn_lamp_post", 2000.0, 600.0, 0.0, 0.0);
  p.dress("mx_bus_stop", "furn_bus_stop", 900.0, 650.0, 0.0, 40.0);
  p.dress("mx_bench", "furn_bench", -900.0, 650.0, 0.0, 40.0);
  p.dress("mx_fountain", "furn_fountain", 900.0, 2800.0, 0.0, 60.0);
  int cars = scaled(3, f);
  const double car_x[3] = {-3200.0, -800.0, 2400.0};
  const double car_y[3] = {190.0, -190.0, 190.0};
  for (int i = 0; i < cars && i < 3; ++i) {
    const char* pool[3] = {"veh_sedan", "veh_van", "veh_suv"};
    p.dress(two_digit("mx_veh", i), pool[rng.index(3)], car_x[i], car_y[i],
            car_y[i] > 0 ? 180.0 : 0.0, 150.0, 40, true);
  }
  p.dress("mx_dumpster", "prop_dumpster", 3500.0, -2800.0, 0.0, 80.0);
  p.dress("mx_kiosk", "prop_kiosk", 800.0, -700.0, 0.0, 60.0);
  p.dress("mx_bike_rack", "prop_bike_rack", -800.0, -700.0, 0.0, 60.0);
}

std::string default_time_of_day(Archetype a) {
  switch (a) {
    case Archetype::DowntownIntersection:
      return "noon";
    case Archetype::Residential:
      return "morning";
    case Archetype::Industrial:
      return "overcast";
    case Archetype::CommercialAvenue:
      return "dusk";
    case Archetype::MixedUse:
      return "afternoon";
  }
  return "noon";
}

int default_total(Archetype a) {
  switch (a) {
    case Archetype::DowntownIntersection:
      return 53;
    case Archetype::Residential:
      return 38;
    case Archetype::Industrial:
      return 28;
    case Archetype::CommercialAvenue:
      return 52;
    case Archetype::MixedUse:
      return 35;
  }
  return 40;
}

}  // namespace

LayoutPlan plan_layout(const SceneRequest& request, const AssetCatalog& catalog, Rng& rng) {
  if (request.ground_half_extent < 2500.0) {
    throw_experiment("layout-infeasible",
                     "ground half-extent " + std::to_string(request.ground_half_extent) +
                         " cm is too small; binding constraint is the road axis length");
  }
  LayoutPlan plan;
  plan.archetype = request.archetype;
  plan.ground_half_extent = request.ground_half_extent;
  plan.time_of_day = request.time_of_day.empty() ? default_time_of_day(request.archetype)
                                                 : request.time_of_day;

  Placer p{catalog, rng, plan};
  p.district = std::min(request.ground_half_extent - 1000.0, 5500.0);

  double f = 1.0;
  if (request.target_actors > 0) {
    f = std::min(1.0, static_cast<double>(request.target_actors) /
                          default_total(request.archetype));
  }
  switch (request.archetype) {
    case Archetype::DowntownIntersection:
      plan_downtown(p, f, rng);
      break;
    case Archetype::Residential:
      plan_residential(p, f, rng);
      break;
    case Archetype::Industrial:
      plan_industrial(p, f, rng);
      break;
    case Archetype::CommercialAvenue:
      plan_commercial(p, f, rng);
      break;
    case Archetype::MixedUse:
      plan_mixed(p, f, rng);
      break;
  }

  // Top up to the requested budget with small greenery and clutter; spacing
  // eventually binds and names the constraint.
  const char* filler_assets[3] = {"tree_shrub_small", "prop_barrel", "furn_trash_bin"};
  int filler = 0;
  while (static_cast<int>(plan.actors.size()) < request.target_actors) {
    const char* asset = filler_assets[filler % 3];
    double x = rng.uniform(-(p.district - 200.0), p.district - 200.0);
    double y = rng.uniform(-(p.district - 200.0), p.district - 200.0);
    p.anchor(two_digit("fill", filler), asset, x, y, 0.0, 400.0, 160);
    ++filler;
  }

  for (const PlannedActor& a : plan.actors) plan.expected_counts[a.category] += 1;
  return plan;
}

// ---------------------------------------------------------------------------
// SceneBuilder

SceneBuilder::SceneBuilder(Session& session, Judge& judge, SkillIndex* skills,
                           FailureStore* failures)
    : session_(session), judge_(judge), skills_(skills), failures_(failures) {}

std::vector<SkillDoc> SceneBuilder::acquire_context(Archetype archetype) const {
  if (!skills_) return {};
  std::vector<std::string> tags = {"layout", "placement", "spacing"};
  if (archetype == Archetype::DowntownIntersection || archetype == Archetype::CommercialAvenue) {
    tags.push_back("furniture");
  }
  if (archetype == Archetype::Residential || archetype == Archetype::MixedUse) {
    tags.push_back("buildings");
  }
  return skills_->retrieve(tags, 3);
}

BuildReport SceneBuilder::generate_scene(const SceneRequest& request, Rng& rng) {
  ++generation_index_;
  BuildReport report;
  for (const SkillDoc& doc : acquire_context(request.archetype)) {
    report.skills_used.push_back(doc.name);
  }
  report.plan = plan_layout(request, session_.catalog(), rng);
  construct(report.plan, report);
  verify_semantic(request, report, rng);
  enforce_invariants(report);

  ordered_json shot = session_.call(
      "take_screenshot", ordered_json{{"views", ordered_json::array({0, 1, 2, 3, 4, 5})}});
  for (const auto& f : shot["files"]) report.screenshots.push_back(f.get<std::string>());

  MetricSpec spec;
  spec.expected_counts = report.plan.expected_counts;
  report.metrics = compute_rule_metrics(session_.scene(), session_.catalog(), spec);
  process_failures(report);
  return report;
}

void SceneBuilder::construct(const LayoutPlan& plan, BuildReport& report) {
  session_.call("setup_environment",
                ordered_json{{"ground_size", plan.ground_half_extent},
                             {"time_of_day", plan.time_of_day},
                             {"allow_reinit", true}});
  ordered_json commands = ordered_json::array();
  for (const PlannedActor& a : plan.actors) {
    commands.push_back(ordered_json{
        {"tool", "spawn_actor"},
        {"args",
         ordered_json{{"name", a.name},
                      {"asset_id", a.asset_id},
                      {"location",
                       ordered_json{{"x", a.transform.location.x},
                                    {"y", a.transform.location.y},
                                    {"z", a.transform.location.z}}},
                      {"rotation", ordered_json{{"yaw", a.transform.rotation.yaw}}}}}});
  }
  session_.call("batch_commands", ordered_json{{"commands", commands}});
  std::map<std::string, int> nudges;
  resolve_collisions(report, nudges);
}

void SceneBuilder::resolve_collisions(BuildReport& report, std::map<std::string, int>& nudges) {
  int guard = static_cast<int>(session_.scene().actor_count()) * (kMaxPlacementRevisions + 1) + 20;
  while (guard-- > 0) {
    ordered_json result = session_.call("check_collisions", ordered_json::object());
    const auto& pairs = result["pairs"];
    if (pairs.empty()) break;
    std::string anchor = pairs[0]["a"].get<std::string>();
    std::string mover = pairs[0]["b"].get<std::string>();
    int& count = nudges[mover];
    ++count;
    if (count > kMaxPlacementRevisions) {
      session_.call("delete_actor", ordered_json{{"name", mover}});
      report.revisions.push_back(
          {mover, count - 1, true, "unresolved overlap with " + anchor});
      continue;
    }
    const ActorRecord& ra = session_.scene().get(anchor);
    const ActorRecord& rb = session_.scene().get(mover);
    Aabb box_a = world_aabb(ra, session_.catalog());
    Aabb box_b = world_aabb(rb, session_.catalog());
    double ox = std::min(box_a.max.x, box_b.max.x) - std::max(box_a.min.x, box_b.min.x);
    double oy = std::min(box_a.max.y, box_b.max.y) - std::max(box_a.min.y, box_b.min.y);
    double margin = kRevisionMarginCm * count;
    Vec3 loc = rb.transform.location;
    if (ox <= oy) {
      loc.x += (box_b.center().x >= box_a.center().x ? 1.0 : -1.0) * (ox + margin);
    } else {
      loc.y += (box_b.center().y >= box_a.center().y ? 1.0 : -1.0) * (oy + margin);
    }
    Vec3 half = box_b.half_extent();
    double bound = session_.scene().ground_half_extent;
    loc.x = std::clamp(loc.x, -(bound - half.x), bound - half.x);
    loc.y = std::clamp(loc.y, -(bound - half.y), bound - half.y);
    session_.call("set_actor_transform",
                  ordered_json{{"name", mover},
                               {"location", ordered_json{{"x", loc.x}, {"y", loc.y}, {"z", loc.z}}}});
    report.revisions.push_back(
        {mover, count, false, "nudged off " + anchor + " along the thinner overlap"});
  }
}

void SceneBuilder::verify_semantic(const SceneRequest& request, BuildReport& report, Rng& rng) {
  std::string text = "a " + to_string(request.archetype) + " block with around " +
                     std::to_string(report.plan.actors.size()) + " actors";
  MetricSpec spec;
  spec.expected_counts = report.plan.expected_counts;
  for (int round = 1; round <= kMaxJudgeRounds; ++round) {
    SceneSummary summary = summarize_scene(session_.scene(), session_.catalog(), spec);
    Verdict verdict = judge_scene(judge_, text, summary);
    report.verdicts.push_back(verdict);
    report.judge_rounds = round;
    if (verdict.status == VerdictStatus::Pass) {
      report.accepted = true;
      return;
    }
    if (round < kMaxJudgeRounds) apply_corrections(verdict, report, rng);
  }
  report.accepted = false;
}

void SceneBuilder::apply_corrections(const Verdict& verdict, BuildReport& report, Rng& rng) {
  const SceneGraph& scene = session_.scene();
  const AssetCatalog& catalog = session_.catalog();
  for (const std::string& issue : verdict.issues) {
    std::string kind = issue.substr(0, issue.find(':'));
    if (kind == "collision") {
      std::map<std::string, int> nudges;
      resolve_collisions(report, nudges);
    } else if (kind == "gravity") {
      std::vector<const ActorRecord*> snapshot = scene.actors_in_level();
      for (const ActorRecord* rec : snapshot) {
        if (rec->category == Category::Road) continue;
        Aabb box = world_aabb(*rec, catalog);
        if (std::abs(box.min.z - scene.ground_z) > kGravityToleranceCm) {
          double hz = box.half_extent().z;
          session_.call("set_actor_transform",
                        ordered_json{{"name", rec->name},
                                     {"location",
                                      ordered_json{{"x", rec->transform.location.x},
                                                   {"y", rec->transform.location.y},
                                                   {"z", scene.ground_z + hz}}}});
        }
      }
    } else if (kind == "count") {
      std::map<Category, int> current;
      for (const ActorRecord* rec : scene.actors_in_level()) current[rec->category] += 1;
      double district = std::min(scene.ground_half_extent - 1000.0, 5500.0);
      int fix_index = 0;
      for (const auto& [category, expected] : report.plan.expected_counts) {
        for (int need = expected - current[category]; need > 0; --need) {
          // smallest footprint of the category fits the leftover pockets best
          const AssetDescriptor* pick = nullptr;
          for (const AssetDescriptor& d : catalog.list(category)) {
            if (!pick ||
                d.base_extent.x * d.base_extent.y < pick->base_extent.x * pick->base_extent.y) {
              pick = &d;
            }
          }
          if (!pick) break;
          bool placed = false;
          for (int attempt = 0; attempt < 120 && !placed; ++attempt) {
            double x = rng.uniform(-district, district);
            double y = rng.uniform(-district, district);
            Transform t;
            t.location = {x, y, pick->base_extent.z};
            Aabb box = world_aabb(t, pick->base_extent);
            if (box.min.x < -district || box.max.x > district || box.min.y < -district ||
                box.max.y > district) {
              continue;
            }
            bool ok = true;
            for (const ActorRecord* rec : scene.actors_in_level()) {
              Aabb other = world_aabb(*rec, catalog);
              if (rec->category == Category::Road) {
                if (aabb_xy_overlap_area(box, other) > 0.0) {
                  ok = false;
                  break;
                }
                continue;
              }
              double required = std::min(category_spacing_cm(category),
                                         category_spacing_cm(rec->category));
              if (footprint_gap(box, other) < required) {
                ok = false;
                break;
              }
            }
            if (!ok) continue;
            session_.call("spawn_actor",
                          ordered_json{{"name", two_digit("fix_" + to_string(category), fix_index++)},
                                       {"asset_id", pick->asset_id},
                                       {"location", ordered_json{{"x", x}, {"y", y}, {"z", pick->base_extent.z}}}});
            placed = true;
          }
          if (!placed) break;  // saturated; the judge will say so again
        }
      }
    } else if (kind == "bounds") {
      std::vector<const ActorRecord*> snapshot = scene.actors_in_level();
      double bound = scene.ground_half_extent;
      for (const ActorRecord* rec : snapshot) {
        Aabb box = world_aabb(*rec, catalog);
        Vec3 center = box.center();
        Vec3 half = box.half_extent();
        double cx = std::clamp(center.x, -(bound - half.x), bound - half.x);
        double cy = std::clamp(center.y, -(bound - half.y), bound - half.y);
        if (cx != center.x || cy != center.y) {
          session_.call(
              "set_actor_transform",
              ordered_json{{"name", rec->name},
                           {"location", ordered_json{{"x", rec->transform.location.x + (cx - center.x)},
                                                     {"y", rec->transform.location.y + (cy - center.y)},
                                                     {"z", rec->transform.location.z}}}});
        }
      }
    }
  }
}

void SceneBuilder::enforce_invariants(BuildReport& report) {
  // Collisions: anything still overlapping after the nudge budget goes.
  int guard = static_cast<int>(session_.scene().actor_count()) + 10;
  while (guard-- > 0) {
    ordered_json result = session_.call("check_collisions", ordered_json::object());
    const auto& pairs = result["pairs"];
    if (pairs.empty()) break;
    std::string mover = pairs[0]["b"].get<std::string>();
    session_.call("delete_actor", ordered_json{{"name", mover}});
    report.revisions.push_back({mover, kMaxPlacementRevisions, true, "invariant sweep"});
  }
  // Gravity and bounds close with direct snaps.
  const SceneGraph& scene = session_.scene();
  const AssetCatalog& catalog = session_.catalog();
  std::vector<const ActorRecord*> snapshot = scene.actors_in_level();
  for (const ActorRecord* rec : snapshot) {
    Aabb box = world_aabb(*rec, catalog);
    Vec3 loc = rec->transform.location;
    bool dirty = false;
    if (rec->category != Category::Road &&
        std::abs(box.min.z - scene.ground_z) > kGravityToleranceCm) {
      loc.z = scene.ground_z + box.half_extent().z;
      dirty = true;
    }
    Vec3 center = box.center();
    double bound = scene.ground_half_extent;
    if (std::abs(center.x) > bound || std::abs(center.y) > bound) {
      loc.x += std::clamp(center.x, -bound, bound) - center.x;
      loc.y += std::clamp(center.y, -bound, bound) - center.y;
      dirty = true;
    }
    if (dirty) {
      session_.call("set_actor_transform",
                    ordered_json{{"name", rec->name},
                                 {"location", ordered_json{{"x", loc.x}, {"y", loc.y}, {"z", loc.z}}}});
    }
  }
}

void SceneBuilder::process_failures(BuildReport& report) {
  std::set<std::string> seen;
  auto add = [&](const FailureSignature& sig) {
    if (seen.insert(sig.key()).second) report.failures.push_back(sig);
  };
  for (const RevisionEvent& e : report.revisions) {
    if (!e.deleted) continue;
    std::string context = "unknown";
    for (const PlannedActor& a : report.plan.actors) {
      if (a.name == e.actor) {
        context = to_string(a.category);
        break;
      }
    }
    add({"placement-overlap", context});
  }
  for (const Verdict& v : report.verdicts) {
    for (const std::string& issue : v.issues) {
      add({"judge-" + issue.substr(0, issue.find(':')), to_string(report.plan.archetype)});
    }
  }
  if (!failures_) return;
  for (const FailureSignature& sig : report.failures) {
    failures_->record(sig, generation_index_);
    if (failures_->should_promote(sig, generation_index_)) {
      SkillDoc doc = author_skill_for(sig);
      if (skills_ && !skills_->contains(doc.name)) {
        skills_->register_doc(doc, PromotionRecord{sig.key(), doc.name, generation_index_});
      }
      failures_->mark_promoted(sig, doc.name, generation_index_);
      report.promoted_skills.push_back(doc.name);
    }
  }
}

// ---------------------------------------------------------------------------
// Build traces

void write_build_trace(const Session& session, const SceneRequest& request,
                       const std::filesystem::path& file) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw_schema("io-error", "cannot open " + file.string());
  out << ordered_json{{"kind", "meta"},
                      {"archetype", to_string(request.archetype)},
                      {"ground_half_extent", request.ground_half_extent},
                      {"events", session.events().size()}}
             .dump()
      << "\n";
  for (const ordered_json& event : session.events()) {
    out << ordered_json{{"kind", "call"}, {"tool", event["tool"]}, {"args", event["args"]}}.dump()
        << "\n";
  }
}

SceneGraph replay_build_trace(const std::filesystem::path& file, const AssetCatalog* catalog) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw_schema("io-error", "cannot open " + file.string());
  std::vector<ordered_json> events;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    ordered_json j = ordered_json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object() || !j.contains("kind")) {
      throw_schema("bad-trace", file.string() + ":" + std::to_string(line_no) + ": bad line");
    }
    if (j["kind"] == "call") {
      events.push_back(ordered_json{{"tool", j.at("tool")}, {"args", j.value("args", ordered_json::object())}});
    }
  }
  SessionOptions options;
  options.catalog = catalog;
  Session session = Session::replay(events, options);
  return session.scene();
}

}  // namespace navforge
