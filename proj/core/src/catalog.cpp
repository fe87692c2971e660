#include "navforge/catalog.hpp"

#include <fstream>

#include "json.hpp"
#include "navforge/error.hpp"

namespace navforge {

namespace {

using nlohmann::ordered_json;

const std::vector<std::pair<Category, std::string>> kCategoryTags = {
    {Category::Building, "building"},
    {Category::Tree, "tree"},
    {Category::Vehicle, "vehicle"},
    {Category::StreetFurniture, "street_furniture"},
    {Category::Road, "road"},
    {Category::Prop, "prop"},
    {Category::Container, "container"},
};

std::vector<AssetDescriptor> builtin_assets() {
  auto a = [](const char* id, Category c, double hx, double hy, double hz) {
    return AssetDescriptor{id, c, {hx, hy, hz}};
  };
  return {
      // buildings (12)
      a("bldg_house_small", Category::Building, 450, 400, 350),
      a("bldg_house_gable", Category::Building, 500, 420, 380),
      a("bldg_rowhouse", Category::Building, 600, 450, 500),
      a("bldg_shop_small", Category::Building, 500, 500, 400),
      a("bldg_shop_wide", Category::Building, 900, 550, 420),
      a("bldg_office_low", Category::Building, 800, 700, 900),
      a("bldg_office_mid", Category::Building, 900, 800, 1500),
      a("bldg_tower_glass", Category::Building, 1200, 900, 2500),
      a("bldg_tower_brick", Category::Building, 1100, 950, 2200),
      a("bldg_warehouse", Category::Building, 1800, 1200, 600),
      a("bldg_factory_hall", Category::Building, 2000, 1400, 800),
      a("bldg_civic_hall", Category::Building, 1400, 1000, 1100),
      // trees (8)
      a("tree_oak", Category::Tree, 220, 220, 450),
      a("tree_maple", Category::Tree, 200, 200, 400),
      a("tree_pine", Category::Tree, 150, 150, 550),
      a("tree_palm", Category::Tree, 130, 130, 500),
      a("tree_birch", Category::Tree, 160, 160, 420),
      a("tree_cypress", Category::Tree, 110, 110, 480),
      a("tree_shrub_large", Category::Tree, 120, 120, 130),
      a("tree_shrub_small", Category::Tree, 70, 70, 80),
      // vehicles (8)
      a("veh_sedan", Category::Vehicle, 230, 95, 75),
      a("veh_suv", Category::Vehicle, 245, 100, 90),
      a("veh_van", Category::Vehicle, 260, 105, 120),
      a("veh_bus", Category::Vehicle, 600, 130, 160),
      a("veh_truck_box", Category::Vehicle, 450, 125, 180),
      a("veh_pickup", Category::Vehicle, 270, 100, 95),
      a("veh_scooter", Category::Vehicle, 90, 40, 60),
      a("veh_cargo_cart", Category::Vehicle, 120, 70, 65),
      // street furniture (10)
      a("furn_bench", Category::StreetFurniture, 90, 35, 45),
      a("furn_lamp_post", Category::StreetFurniture, 25, 25, 350),
      a("furn_hydrant", Category::StreetFurniture, 20, 20, 45),
      a("furn_mailbox", Category::StreetFurniture, 30, 25, 60),
      a("furn_bus_stop", Category::StreetFurniture, 200, 80, 130),
      a("furn_fountain", Category::StreetFurniture, 300, 300, 120),
      a("furn_cafe_table", Category::StreetFurniture, 50, 50, 55),
      a("furn_street_couch", Category::StreetFurniture, 110, 50, 50),
      a("furn_trash_bin", Category::StreetFurniture, 30, 30, 55),
      a("furn_sign_post", Category::StreetFurniture, 15, 15, 150),
      // roads (6)
      a("road_straight_long", Category::Road, 1000, 400, 2),
      a("road_straight_short", Category::Road, 500, 400, 2),
      a("road_cross_section", Category::Road, 400, 400, 2),
      a("road_curb_strip", Category::Road, 500, 50, 4),
      a("road_sidewalk", Category::Road, 500, 150, 3),
      a("road_plaza_tile", Category::Road, 600, 600, 2),
      // props (10)
      a("prop_road_cone", Category::Prop, 12, 12, 35),
      a("prop_road_blocker", Category::Prop, 37, 37, 50),
      a("prop_barrel", Category::Prop, 30, 30, 45),
      a("prop_crate_small", Category::Prop, 12, 12, 40),
      a("prop_pallet", Category::Prop, 60, 60, 8),
      a("prop_planter", Category::Prop, 45, 45, 40),
      a("prop_bollard", Category::Prop, 12, 12, 50),
      a("prop_dumpster", Category::Prop, 90, 60, 70),
      a("prop_kiosk", Category::Prop, 110, 110, 130),
      a("prop_bike_rack", Category::Prop, 100, 30, 45),
      // containers (6)
      a("container_12m", Category::Container, 600, 120, 130),
      a("container_6m", Category::Container, 300, 120, 130),
      a("container_stack_2", Category::Container, 600, 120, 260),
      a("container_open_top", Category::Container, 300, 120, 110),
      a("container_tank", Category::Container, 300, 110, 140),
      a("container_silo", Category::Container, 150, 150, 400),
  };
}

}  // namespace

const std::vector<Category>& all_categories() {
  static const std::vector<Category> cats = [] {
    std::vector<Category> v;
    for (const auto& [c, tag] : kCategoryTags) v.push_back(c);
    return v;
  }();
  return cats;
}

std::string to_string(Category c) {
  for (const auto& [cat, tag] : kCategoryTags) {
    if (cat == c) return tag;
  }
  return "prop";
}

std::optional<Category> category_from_string(const std::string& tag) {
  for (const auto& [cat, t] : kCategoryTags) {
    if (t == tag) return cat;
  }
  return std::nullopt;
}

AssetCatalog::AssetCatalog(std::vector<AssetDescriptor> assets) {
  for (auto& d : assets) {
    if (d.asset_id.empty()) throw_schema("bad-asset", "asset_id must be non-empty");
    if (d.base_extent.x <= 0 || d.base_extent.y <= 0 || d.base_extent.z <= 0) {
      throw_schema("bad-asset", "base_extent must be positive for '" + d.asset_id + "'");
    }
    if (!assets_.emplace(d.asset_id, d).second) {
      throw_schema("bad-asset", "duplicate asset_id '" + d.asset_id + "'");
    }
  }
}

const AssetDescriptor* AssetCatalog::find(const std::string& asset_id) const {
  auto it = assets_.find(asset_id);
  return it == assets_.end() ? nullptr : &it->second;
}

const AssetDescriptor& AssetCatalog::get(const std::string& asset_id) const {
  const AssetDescriptor* d = find(asset_id);
  if (!d) throw_domain("unknown-asset", "no asset '" + asset_id + "' in catalog");
  return *d;
}

std::vector<AssetDescriptor> AssetCatalog::list(std::optional<Category> category) const {
  std::vector<AssetDescriptor> out;
  for (const auto& [id, d] : assets_) {
    if (!category || d.category == *category) out.push_back(d);
  }
  std::sort(out.begin(), out.end(), [](const AssetDescriptor& a, const AssetDescriptor& b) {
    auto ka = std::pair(to_string(a.category), a.asset_id);
    auto kb = std::pair(to_string(b.category), b.asset_id);
    return ka < kb;
  });
  return out;
}

const AssetCatalog& default_catalog() {
  static const AssetCatalog catalog(builtin_assets());
  return catalog;
}

AssetCatalog load_catalog(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw_schema("io-error", "cannot open catalog file " + file.string());
  ordered_json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw_schema("bad-json", std::string("catalog parse failure: ") + e.what());
  }
  if (!j.is_array()) throw_schema("bad-json", "catalog file must hold an array");
  std::vector<AssetDescriptor> assets;
  for (const auto& item : j) {
    AssetDescriptor d;
    try {
      d.asset_id = item.at("asset_id").get<std::string>();
      auto cat = category_from_string(item.at("category").get<std::string>());
      if (!cat) throw_schema("unknown-category", "unknown category tag in catalog");
      d.category = *cat;
      const auto& e = item.at("base_extent");
      d.base_extent = {e.at(0).get<double>(), e.at(1).get<double>(), e.at(2).get<double>()};
    } catch (const Error&) {
      throw;
    } catch (const std::exception& e) {
      throw_schema("bad-json", std::string("catalog entry malformed: ") + e.what());
    }
    assets.push_back(d);
  }
  return AssetCatalog(std::move(assets));
}

void save_catalog(const AssetCatalog& catalog, const std::filesystem::path& file) {
  ordered_json j = ordered_json::array();
  for (const auto& d : catalog.list()) {
    ordered_json item;
    item["asset_id"] = d.asset_id;
    item["category"] = to_string(d.category);
    item["base_extent"] = {d.base_extent.x, d.base_extent.y, d.base_extent.z};
    j.push_back(item);
  }
  std::ofstream out(file);
  if (!out) throw_schema("io-error", "cannot write catalog file " + file.string());
  out << j.dump(2) << "\n";
}

}  // namespace navforge
