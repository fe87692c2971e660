#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "navforge/geometry.hpp"

namespace navforge {

enum class Category {
  Building,
  Tree,
  Vehicle,
  StreetFurniture,
  Road,
  Prop,
  Container,
};

const std::vector<Category>& all_categories();
std::string to_string(Category c);
std::optional<Category> category_from_string(const std::string& tag);

struct AssetDescriptor {
  std::string asset_id;
  Category category = Category::Prop;
  Vec3 base_extent;  // half extents, cm, all positive

  bool operator==(const AssetDescriptor& o) const = default;
};

class AssetCatalog {
 public:
  AssetCatalog() = default;
  explicit AssetCatalog(std::vector<AssetDescriptor> assets);

  const AssetDescriptor* find(const std::string& asset_id) const;
  const AssetDescriptor& get(const std::string& asset_id) const;  // throws unknown-asset

  // Lexicographic by (category tag, asset_id).
  std::vector<AssetDescriptor> list(std::optional<Category> category = std::nullopt) const;

  std::size_t size() const { return assets_.size(); }
  bool empty() const { return assets_.empty(); }

 private:
  std::map<std::string, AssetDescriptor> assets_;
};

// The built-in catalog: 60 synthetic descriptors spanning every category.
const AssetCatalog& default_catalog();

AssetCatalog load_catalog(const std::filesystem::path& file);
void save_catalog(const AssetCatalog& catalog, const std::filesystem::path& file);

}  // namespace navforge
