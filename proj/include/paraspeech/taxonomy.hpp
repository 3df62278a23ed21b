// Copyright 2026 The paraspeech Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef PARASPEECH_TAXONOMY_HPP
#define PARASPEECH_TAXONOMY_HPP

#include <cstddef>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "paraspeech/error.hpp"

namespace paraspeech {

enum class CategoryKind { Physiological, DiscourseMarker, Interjection };

inline std::string_view to_string(CategoryKind k) noexcept {
  switch (k) {
    case CategoryKind::Physiological: return "physiological";
    case CategoryKind::DiscourseMarker: return "discourse-marker";
    case CategoryKind::Interjection: return "interjection";
  }
  return "interjection";
}

/// One paralinguistic vocalization category and its bracketed surface forms.
struct ParaCategory {
  std::string id;
  std::string surface;
  CategoryKind kind = CategoryKind::Physiological;
  std::vector<std::string> aliases;
  // Slot kept only to reach the published category count; not a confirmed label.
  bool provisional = false;

  bool operator==(const ParaCategory&) const = default;
};

/// Immutable, closed set of categories. Category identity is its position.
class Taxonomy {
 public:
  Taxonomy(std::vector<ParaCategory> categories, std::string version,
           std::string none_surface = "[None]")
      : categories_(std::move(categories)),
        version_(std::move(version)),
        none_surface_(std::move(none_surface)) {
    if (categories_.empty()) throw Error(ErrorKind::EmptyTaxonomy, "taxonomy has no categories");
    check_surface(none_surface_, "none_surface");
    std::unordered_map<std::string, std::size_t> ids;
    for (std::size_t i = 0; i < categories_.size(); ++i) {
      const auto& c = categories_[i];
      if (c.id.empty()) throw Error(ErrorKind::MalformedConfig, "category #" + std::to_string(i) + " has an empty id");
      if (!ids.emplace(c.id, i).second) throw Error(ErrorKind::DuplicateId, "duplicate category id \"" + c.id + "\"");
      add_surface(c.surface, i, c.id);
      for (const auto& a : c.aliases) add_surface(a, i, c.id);
    }
    if (lookup_.count(none_surface_))
      throw Error(ErrorKind::DuplicateSurface, "none_surface \"" + none_surface_ + "\" collides with a category surface");
    id_index_ = std::move(ids);
  }

  const std::vector<ParaCategory>& categories() const noexcept { return categories_; }
  std::size_t size() const noexcept { return categories_.size(); }
  const ParaCategory& operator[](std::size_t i) const { return categories_.at(i); }
  const std::string& version() const noexcept { return version_; }
  const std::string& none_surface() const noexcept { return none_surface_; }

  /// Exact, case-sensitive lookup over surfaces and aliases. nullptr means unknown.
  const ParaCategory* resolve_surface(std::string_view s) const {
    auto it = lookup_.find(std::string(s));
    return it == lookup_.end() ? nullptr : &categories_[it->second];
  }

  /// Position of the category with this id, or size() if absent.
  std::size_t index_of_id(std::string_view id) const {
    auto it = id_index_.find(std::string(id));
    return it == id_index_.end() ? categories_.size() : it->second;
  }

  std::size_t index_of(const ParaCategory& c) const { return index_of_id(c.id); }

  bool operator==(const Taxonomy& o) const {
    return categories_ == o.categories_ && version_ == o.version_ && none_surface_ == o.none_surface_;
  }

 private:
  static void check_surface(const std::string& s, const std::string& owner) {
    bool ok = s.size() >= 3 && s.front() == '[' && s.back() == ']';
    if (ok) {
      std::string_view inner(s.data() + 1, s.size() - 2);
      ok = inner.find_first_of("[]") == std::string_view::npos &&
           inner.find_first_not_of(" \t\r\n") != std::string_view::npos;
    }
    if (!ok) throw Error(ErrorKind::MalformedSurface, "surface \"" + s + "\" of " + owner + " is not a bracketed label");
  }

  void add_surface(const std::string& s, std::size_t idx, const std::string& owner) {
    check_surface(s, "category \"" + owner + "\"");
    if (!lookup_.emplace(s, idx).second)
      throw Error(ErrorKind::DuplicateSurface, "surface \"" + s + "\" of category \"" + owner + "\" is already taken");
  }

  std::vector<ParaCategory> categories_;
  std::string version_;
  std::string none_surface_;
  std::unordered_map<std::string, std::size_t> lookup_;
  std::unordered_map<std::string, std::size_t> id_index_;
};

namespace detail {

inline CategoryKind parse_kind(const std::string& s, const std::string& id) {
  if (s == "physiological") return CategoryKind::Physiological;
  if (s == "discourse-marker") return CategoryKind::DiscourseMarker;
  if (s == "interjection") return CategoryKind::Interjection;
  throw Error(ErrorKind::MalformedConfig, "category \"" + id + "\" has unknown kind \"" + s + "\"");
}

}  // namespace detail

inline Taxonomy load_taxonomy(std::string_view config_text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(config_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorKind::MalformedConfig, e.what());
  }
  try {
    if (!doc.is_object()) throw Error(ErrorKind::MalformedConfig, "taxonomy config must be an object");
    std::vector<ParaCategory> cats;
    const auto& arr = doc.at("categories");
    if (!arr.is_array()) throw Error(ErrorKind::MalformedConfig, "\"categories\" must be an array");
    for (const auto& item : arr) {
      ParaCategory c;
      c.id = item.at("id").get<std::string>();
      c.surface = item.at("surface").get<std::string>();
      c.kind = detail::parse_kind(item.value("kind", std::string("physiological")), c.id);
      c.aliases = item.value("aliases", std::vector<std::string>{});
      c.provisional = item.value("provisional", false);
      cats.push_back(std::move(c));
    }
    return Taxonomy(std::move(cats), doc.value("version", std::string()),
                    doc.value("none_surface", std::string("[None]")));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::MalformedConfig, e.what());
  }
}

inline nlohmann::json to_config(const Taxonomy& t) {
  nlohmann::json cats = nlohmann::json::array();
  for (const auto& c : t.categories()) {
    nlohmann::json j{{"id", c.id}, {"surface", c.surface}, {"kind", to_string(c.kind)}, {"aliases", c.aliases}};
    if (c.provisional) j["provisional"] = true;
    cats.push_back(std::move(j));
  }
  return {{"version", t.version()}, {"none_surface", t.none_surface()}, {"categories", std::move(cats)}};
}

inline std::string serialize_config(const Taxonomy& t) { return to_config(t).dump(2) + "\n"; }

/// The shipped label set. Keep in sync with data/taxonomy/default.json.
inline constexpr std::string_view kDefaultTaxonomyConfig = R"json({
  "version": "nvspeech-18-v1",
  "none_surface": "[None]",
  "categories": [
    {"id": "breathing", "surface": "[Breathing]", "kind": "physiological", "aliases": []},
    {"id": "crying", "surface": "[Crying]", "kind": "physiological", "aliases": []},
    {"id": "laughter", "surface": "[Laughter]", "kind": "physiological", "aliases": []},
    {"id": "cough", "surface": "[Cough]", "kind": "physiological", "aliases": []},
    {"id": "uhm", "surface": "[Uhm]", "kind": "discourse-marker", "aliases": []},
    {"id": "confirmation-en", "surface": "[Confirmation-en]", "kind": "interjection", "aliases": []},
    {"id": "question-ah", "surface": "[Question-ah]", "kind": "interjection", "aliases": []},
    {"id": "question-en", "surface": "[Question-en]", "kind": "interjection", "aliases": []},
    {"id": "surprise-oh", "surface": "[Surprise-oh]", "kind": "interjection", "aliases": []},
    {"id": "surprise-yo", "surface": "[Surprise-yo]", "kind": "interjection", "aliases": []},
    {"id": "shh", "surface": "[Shh]", "kind": "interjection", "aliases": []},
    {"id": "provisional-12", "surface": "[Provisional-12]", "kind": "interjection", "aliases": [], "provisional": true},
    {"id": "provisional-13", "surface": "[Provisional-13]", "kind": "interjection", "aliases": [], "provisional": true},
    {"id": "provisional-14", "surface": "[Provisional-14]", "kind": "interjection", "aliases": [], "provisional": true},
    {"id": "provisional-15", "surface": "[Provisional-15]", "kind": "interjection", "aliases": [], "provisional": true},
    {"id": "provisional-16", "surface": "[Provisional-16]", "kind": "interjection", "aliases": [], "provisional": true},
    {"id": "provisional-17", "surface": "[Provisional-17]", "kind": "interjection", "aliases": [], "provisional": true},
    {"id": "provisional-18", "surface": "[Provisional-18]", "kind": "interjection", "aliases": [], "provisional": true}
  ]
}
)json";

inline Taxonomy default_taxonomy() { return load_taxonomy(kDefaultTaxonomyConfig); }

/// Resolves a --taxonomy argument: empty or "default" falls back to
/// $PARASPEECH_TAXONOMY, then to the built-in set; anything else is a path.
inline Taxonomy load_taxonomy_from(std::string_view spec) {
  std::string path(spec);
  if (path.empty() || path == "default") {
    const char* env = std::getenv("PARASPEECH_TAXONOMY");
    if (env == nullptr || *env == '\0') return default_taxonomy();
    path = env;
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open taxonomy config " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return load_taxonomy(ss.str());
}

}  // namespace paraspeech

#endif  // PARASPEECH_TAXONOMY_HPP
