#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace navforge {

// A skill document is Markdown with a YAML-style front-matter block. Known
// keys: name, version, tags, dependencies, python_util. Unknown keys survive
// a parse/render round trip verbatim.
struct SkillDoc {
  std::string name;
  std::string version = "1.0";
  std::vector<std::string> tags;
  std::vector<std::string> dependencies;
  std::string util_ref;  // front-matter key python_util
  std::vector<std::pair<std::string, std::string>> extra_frontmatter;
  std::string body;  // Markdown after the closing delimiter
};

SkillDoc parse_skill(const std::string& text);
std::string render_skill(const SkillDoc& doc);

// -1, 0, 1 over dotted numeric versions ("1.10" > "1.2").
int compare_versions(const std::string& a, const std::string& b);

std::vector<SkillDoc> builtin_skills();

struct RegistryDiagnostic {
  std::string file;
  std::string message;
};

struct PromotionRecord {
  std::string signature_key;
  std::string skill_name;
  int episode_index = 0;
};

struct FailureSignature {
  std::string category;
  std::string context_key;

  std::string key() const { return category + "/" + context_key; }
};

inline constexpr int kPromotionWindow = 10;  // generation episodes
inline constexpr int kPromotionThreshold = 2;

// Tracks recurring generation failures and which ones already earned a skill.
class FailureStore {
 public:
  void record(const FailureSignature& sig, int episode_index);
  // True when the signature recurred enough inside the window and has not
  // been promoted yet.
  bool should_promote(const FailureSignature& sig, int current_episode) const;
  void mark_promoted(const FailureSignature& sig, const std::string& skill_name,
                     int episode_index);

  const std::vector<int>* occurrences(const FailureSignature& sig) const;
  const std::vector<PromotionRecord>& promotions() const { return promotions_; }

  void save(const std::filesystem::path& file) const;
  static FailureStore load(const std::filesystem::path& file);

 private:
  std::map<std::string, std::vector<int>> occurrences_;
  std::set<std::string> promoted_;
  std::vector<PromotionRecord> promotions_;
};

// Directory-backed registry: one Markdown file per skill, monotone (files are
// added or rewritten with higher versions, never deleted).
class SkillIndex {
 public:
  // Creates the directory if missing, writes absent built-ins, indexes every
  // well-formed document and collects diagnostics for the rest.
  static SkillIndex load_registry(const std::filesystem::path& dir);

  // Ranked by tag overlap (descending), ties lexicographic by name. Empty
  // tags retrieve nothing.
  std::vector<SkillDoc> retrieve(const std::vector<std::string>& tags, std::size_t k) const;

  // Name must be unused, or the version must strictly increase. Dependencies
  // must resolve against the index (or the doc itself). Persists immediately.
  void register_doc(const SkillDoc& doc,
                    const std::optional<PromotionRecord>& promotion = std::nullopt);

  bool contains(const std::string& name) const { return docs_.count(name) > 0; }
  const SkillDoc* find(const std::string& name) const;
  std::size_t size() const { return docs_.size(); }
  const std::filesystem::path& dir() const { return dir_; }
  const std::vector<RegistryDiagnostic>& diagnostics() const { return diagnostics_; }
  const std::vector<PromotionRecord>& promotions() const { return promotions_; }
  std::vector<SkillDoc> all() const;  // lexicographic by name

 private:
  std::filesystem::path dir_;
  std::map<std::string, SkillDoc> docs_;
  std::vector<RegistryDiagnostic> diagnostics_;
  std::vector<PromotionRecord> promotions_;
};

// Built-in skill author used on promotion: a templated document naming the
// failure class with a corrective tool-call batch in its usage section.
SkillDoc author_skill_for(const FailureSignature& sig);

}  // namespace navforge
