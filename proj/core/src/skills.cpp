#include "navforge/skills.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "navforge/error.hpp"

namespace navforge {

namespace {

using nlohmann::ordered_json;

constexpr const char* kFrontMatterDelimiter = "---";

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> parse_list(const std::string& value) {
  std::string inner = trim(value);
  if (inner.size() < 2 || inner.front() != '[' || inner.back() != ']') {
    throw_schema("bad-skill", "expected a [a, b] list, got '" + value + "'");
  }
  inner = inner.substr(1, inner.size() - 2);
  std::vector<std::string> out;
  std::stringstream ss(inner);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::string t = trim(item);
    if (!t.empty()) out.push_back(t);
  }
  return out;
}

std::string render_list(const std::vector<std::string>& items) {
  std::string out = "[";
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += ", ";
    out += items[i];
  }
  return out + "]";
}

}  // namespace

SkillDoc parse_skill(const std::string& text) {
  std::stringstream in(text);
  std::string line;
  if (!std::getline(in, line) || trim(line) != kFrontMatterDelimiter) {
    throw_schema("bad-skill", "document must open with a front-matter delimiter");
  }
  SkillDoc doc;
  bool closed = false;
  bool saw_name = false;
  bool saw_version = false;
  while (std::getline(in, line)) {
    if (trim(line) == kFrontMatterDelimiter) {
      closed = true;
      break;
    }
    std::size_t colon = line.find(':');
    if (colon == std::string::npos) {
      throw_schema("bad-skill", "front-matter line lacks a key: '" + line + "'");
    }
    std::string key = trim(line.substr(0, colon));
    std::string value = trim(line.substr(colon + 1));
    if (key == "name") {
      doc.name = value;
      saw_name = true;
    } else if (key == "version") {
      doc.version = value;
      saw_version = true;
    } else if (key == "tags") {
      doc.tags = parse_list(value);
    } else if (key == "dependencies") {
      doc.dependencies = parse_list(value);
    } else if (key == "python_util") {
      doc.util_ref = value;
    } else {
      doc.extra_frontmatter.emplace_back(key, value);
    }
  }
  if (!closed) throw_schema("bad-skill", "front-matter never closes");
  if (!saw_name || doc.name.empty()) throw_schema("bad-skill", "front-matter lacks a name");
  if (!saw_version || doc.version.empty()) {
    throw_schema("bad-skill", "front-matter lacks a version");
  }
  std::string body;
  while (std::getline(in, line)) body += line + "\n";
  // Drop exactly one leading blank separator line if present.
  if (body.rfind("\n", 0) == 0) body = body.substr(1);
  doc.body = body;
  return doc;
}

std::string render_skill(const SkillDoc& doc) {
  std::string out = std::string(kFrontMatterDelimiter) + "\n";
  out += "name: " + doc.name + "\n";
  out += "version: " + doc.version + "\n";
  out += "tags: " + render_list(doc.tags) + "\n";
  out += "dependencies: " + render_list(doc.dependencies) + "\n";
  if (!doc.util_ref.empty()) out += "python_util: " + doc.util_ref + "\n";
  for (const auto& [key, value] : doc.extra_frontmatter) {
    out += key + ": " + value + "\n";
  }
  out += std::string(kFrontMatterDelimiter) + "\n\n";
  out += doc.body;
  if (!doc.body.empty() && doc.body.back() != '\n') out += "\n";
  return out;
}

int compare_versions(const std::string& a, const std::string& b) {
  auto parse = [](const std::string& v) {
    std::vector<long> parts;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, '.')) {
      try {
        parts.push_back(std::stol(trim(item)));
      } catch (const std::exception&) {
        throw_schema("bad-skill", "version component '" + item + "' is not numeric");
      }
    }
    if (parts.empty()) throw_schema("bad-skill", "empty version string");
    return parts;
  };
  std::vector<long> pa = parse(a);
  std::vector<long> pb = parse(b);
  std::size_t n = std::max(pa.size(), pb.size());
  for (std::size_t i = 0; i < n; ++i) {
    long va = i < pa.size() ? pa[i] : 0;
    long vb = i < pb.size() ? pb[i] : 0;
    if (va != vb) return va < vb ? -1 : 1;
  }
  return 0;
}

std::vector<SkillDoc> builtin_skills() {
  std::vector<SkillDoc> docs;

  SkillDoc placement;
  placement.name = "building-placement";
  placement.version = "1.2";
  placement.tags = {"placement", "spacing", "buildings"};
  placement.dependencies = {"city-layout"};
  placement.util_ref = "building_placement_utils.py";
  placement.body =
      "## Summary\n"
      "Rules of thumb for placing building rows so facades stay flush with the\n"
      "street edge and neighbors never interpenetrate.\n"
      "\n"
      "## Usage\n"
      "Keep footprint gaps at or above the per-category spacing floor before any\n"
      "jitter is applied: buildings 300 cm, containers 250 cm, vehicles 200 cm,\n"
      "trees 150 cm, street furniture 100 cm, props 80 cm. Face each row toward\n"
      "its street axis and run the collision check after every placement batch.\n";
  docs.push_back(placement);

  SkillDoc layout;
  layout.name = "city-layout";
  layout.version = "1.0";
  layout.tags = {"layout", "zones", "streets"};
  layout.body =
      "## Summary\n"
      "Sketches a road skeleton first, then assigns category zones relative to\n"
      "the road axes before any actor is spawned.\n"
      "\n"
      "## Usage\n"
      "Lay principal roads through the origin, reserve a sidewalk strip beside\n"
      "each carriageway, then allocate building frontage, greenery and parking\n"
      "zones per quadrant. Keep every zone inside the ground bounds with margin\n"
      "for the largest footprint it must hold.\n";
  docs.push_back(layout);

  SkillDoc furniture;
  furniture.name = "street-furniture";
  furniture.version = "1.0";
  furniture.tags = {"furniture", "dressing", "props"};
  furniture.dependencies = {"city-layout"};
  furniture.body =
      "## Summary\n"
      "Dresses sidewalks with benches, lamps and bins at believable intervals.\n"
      "\n"
      "## Usage\n"
      "Alternate lamp posts and benches along the sidewalk strip, one pair per\n"
      "15 m of frontage, and keep clearance from building facades so doors stay\n"
      "usable. Bins sit beside benches, never in the carriageway.\n";
  docs.push_back(furniture);

  SkillDoc weather;
  weather.name = "weather-and-mood";
  weather.version = "1.0";
  weather.tags = {"lighting", "time-of-day", "mood"};
  weather.body =
      "## Summary\n"
      "Maps mood words in a request onto environment settings.\n"
      "\n"
      "## Usage\n"
      "Calm or sunny requests map to noon with a clear sky; moody or dramatic\n"
      "requests map to dusk; quiet and empty map to dawn. Set the environment\n"
      "once, before spawning, because reinitialization clears the level.\n";
  docs.push_back(weather);

  SkillDoc tour;
  tour.name = "screenshot-tour";
  tour.version = "1.0";
  tour.tags = {"screenshot", "views", "verification"};
  tour.body =
      "## Summary\n"
      "Captures the six-view tour a reviewer needs: one top-down plus five\n"
      "oblique angles stepped 60 degrees apart.\n"
      "\n"
      "## Usage\n"
      "Call take_screenshot with views set to 6 after the final placement batch\n"
      "and attach all six files to the review request. Re-run the tour after\n"
      "any correction pass so the reviewer never grades a stale render.\n";
  docs.push_back(tour);

  return docs;
}

void FailureStore::record(const FailureSignature& sig, int episode_index) {
  occurrences_[sig.key()].push_back(episode_index);
}

bool FailureStore::should_promote(const FailureSignature& sig, int current_episode) const {
  if (promoted_.count(sig.key())) return false;
  auto it = occurrences_.find(sig.key());
  if (it == occurrences_.end()) return false;
  int window_start = current_episode - kPromotionWindow + 1;
  int recent = 0;
  for (int ep : it->second) {
    if (ep >= window_start && ep <= current_episode) ++recent;
  }
  return recent >= kPromotionThreshold;
}

void FailureStore::mark_promoted(const FailureSignature& sig, const std::string& skill_name,
                                 int episode_index) {
  promoted_.insert(sig.key());
  promotions_.push_back({sig.key(), skill_name, episode_index});
}

const std::vector<int>* FailureStore::occurrences(const FailureSignature& sig) const {
  auto it = occurrences_.find(sig.key());
  return it == occurrences_.end() ? nullptr : &it->second;
}

void FailureStore::save(const std::filesystem::path& file) const {
  ordered_json j;
  ordered_json occ;
  for (const auto& [key, eps] : occurrences_) occ[key] = eps;
  j["occurrences"] = std::move(occ);
  ordered_json promos = ordered_json::array();
  for (const auto& p : promotions_) {
    promos.push_back({{"signature", p.signature_key},
                      {"skill", p.skill_name},
                      {"episode", p.episode_index}});
  }
  j["promotions"] = std::move(promos);
  std::ofstream out(file);
  if (!out) throw_schema("io-error", "cannot write failure store " + file.string());
  out << j.dump(2) << "\n";
}

FailureStore FailureStore::load(const std::filesystem::path& file) {
  FailureStore store;
  std::ifstream in(file);
  if (!in) return store;  // absent store is empty
  ordered_json j;
  try {
    in >> j;
    for (const auto& [key, eps] : j.at("occurrences").items()) {
      for (const auto& ep : eps) store.occurrences_[key].push_back(ep.get<int>());
    }
    for (const auto& p : j.at("promotions")) {
      PromotionRecord rec{p.at("signature").get<std::string>(),
                          p.at("skill").get<std::string>(), p.at("episode").get<int>()};
      store.promoted_.insert(rec.signature_key);
      store.promotions_.push_back(rec);
    }
  } catch (const std::exception& e) {
    throw_schema("bad-json", std::string("failure store malformed: ") + e.what());
  }
  return store;
}

namespace {

std::string skill_file_name(const std::string& name) { return name + ".md"; }

}  // namespace

SkillIndex SkillIndex::load_registry(const std::filesystem::path& dir) {
  SkillIndex index;
  index.dir_ = dir;
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw_schema("io-error", "cannot create registry directory " + dir.string());

  for (const SkillDoc& doc : builtin_skills()) {
    std::filesystem::path file = dir / skill_file_name(doc.name);
    if (!std::filesystem::exists(file)) {
      std::ofstream out(file);
      if (!out) throw_schema("io-error", "cannot seed built-in skill " + file.string());
      out << render_skill(doc);
    }
  }

  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".md") {
      files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end());
  for (const auto& file : files) {
    std::ifstream in(file);
    std::stringstream buf;
    buf << in.rdbuf();
    try {
      SkillDoc doc = parse_skill(buf.str());
      index.docs_[doc.name] = std::move(doc);
    } catch (const Error& e) {
      index.diagnostics_.push_back({file.filename().string(), e.what()});
    }
  }

  std::filesystem::path promo_file = dir / "promotions.json";
  if (std::filesystem::exists(promo_file)) {
    std::ifstream in(promo_file);
    ordered_json j;
    try {
      in >> j;
      for (const auto& p : j) {
        index.promotions_.push_back({p.at("signature").get<std::string>(),
                                     p.at("skill").get<std::string>(),
                                     p.at("episode").get<int>()});
      }
    } catch (const std::exception& e) {
      index.diagnostics_.push_back({"promotions.json", e.what()});
    }
  }
  return index;
}

std::vector<SkillDoc> SkillIndex::retrieve(const std::vector<std::string>& tags,
                                           std::size_t k) const {
  if (tags.empty() || k == 0) return {};
  std::set<std::string> wanted(tags.begin(), tags.end());
  std::vector<std::pair<std::size_t, const SkillDoc*>> scored;
  for (const auto& [name, doc] : docs_) {
    std::size_t overlap = 0;
    for (const auto& tag : doc.tags) {
      if (wanted.count(tag)) ++overlap;
    }
    if (overlap > 0) scored.emplace_back(overlap, &doc);
  }
  std::sort(scored.begin(), scored.end(),
            [](const auto& a, const auto& b) {
              if (a.first != b.first) return a.first > b.first;
              return a.second->name < b.second->name;
            });
  std::vector<SkillDoc> out;
  for (std::size_t i = 0; i < scored.size() && i < k; ++i) out.push_back(*scored[i].second);
  return out;
}

void SkillIndex::register_doc(const SkillDoc& doc,
                              const std::optional<PromotionRecord>& promotion) {
  if (doc.name.empty()) throw_schema("bad-skill", "skill name must be non-empty");
  auto existing = docs_.find(doc.name);
  if (existing != docs_.end() &&
      compare_versions(doc.version, existing->second.version) <= 0) {
    throw_domain("version-conflict", "skill '" + doc.name + "' version " + doc.version +
                                         " does not exceed " + existing->second.version);
  }
  for (const std::string& dep : doc.dependencies) {
    if (dep == doc.name) continue;
    if (!docs_.count(dep)) {
      throw_domain("unresolved-dependency",
                   "skill '" + doc.name + "' depends on unknown '" + dep + "'");
    }
  }
  std::filesystem::path file = dir_ / skill_file_name(doc.name);
  std::ofstream out(file);
  if (!out) throw_schema("io-error", "cannot write skill file " + file.string());
  out << render_skill(doc);
  out.close();
  docs_[doc.name] = doc;
  if (promotion) {
    promotions_.push_back(*promotion);
    ordered_json j = ordered_json::array();
    for (const auto& p : promotions_) {
      j.push_back({{"signature", p.signature_key},
                   {"skill", p.skill_name},
                   {"episode", p.episode_index}});
    }
    std::ofstream promo(dir_ / "promotions.json");
    if (!promo) throw_schema("io-error", "cannot write promotions file");
    promo << j.dump(2) << "\n";
  }
}

const SkillDoc* SkillIndex::find(const std::string& name) const {
  auto it = docs_.find(name);
  return it == docs_.end() ? nullptr : &it->second;
}

std::vector<SkillDoc> SkillIndex::all() const {
  std::vector<SkillDoc> out;
  for (const auto& [name, doc] : docs_) out.push_back(doc);
  return out;
}

SkillDoc author_skill_for(const FailureSignature& sig) {
  SkillDoc doc;
  doc.name = "clear-" + sig.category + "-" + sig.context_key;
  std::replace(doc.name.begin(), doc.name.end(), '_', '-');
  std::replace(doc.name.begin(), doc.name.end(), '/', '-');
  std::replace(doc.name.begin(), doc.name.end(), ':', '-');
  doc.version = "1.0";
  doc.tags = {sig.category, "evolved", "correction"};
  doc.body =
      "## Summary\n"
      "Recovery recipe promoted after repeated '" + sig.category +
      "' failures in the " + sig.context_key + " context.\n"
      "\n"
      "## Usage\n"
      "Run the corrective batch below after the failing placement pass, then\n"
      "re-run the matching checker before requesting review.\n"
      "\n"
      "```json\n"
      "{\"tool\": \"batch_commands\", \"args\": {\"requests\": [\n"
      "  {\"tool\": \"check_collisions\", \"args\": {}},\n"
      "  {\"tool\": \"check_vertical_support\", \"args\": {}}\n"
      "]}}\n"
      "```\n";
  return doc;
}

}  // namespace navforge
