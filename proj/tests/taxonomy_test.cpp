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

#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "paraspeech/taxonomy.hpp"

using namespace paraspeech;

namespace {

ErrorKind kind_of(const std::string& config) {
  try {
    load_taxonomy(config);
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "config was accepted";
  return ErrorKind::Io;
}

}  // namespace

TEST(Taxonomy, DefaultHasEighteenCategories) {
  auto t = default_taxonomy();
  ASSERT_EQ(t.size(), 18u);
  for (const char* id : {"laughter", "cough", "breathing", "crying", "uhm", "confirmation-en", "question-ah",
                         "question-en", "surprise-oh", "surprise-yo", "shh"})
    EXPECT_LT(t.index_of_id(id), t.size()) << id;
  EXPECT_EQ(t.none_surface(), "[None]");
  std::size_t provisional = 0;
  for (const auto& c : t.categories()) provisional += c.provisional;
  EXPECT_EQ(provisional, 7u);
}

TEST(Taxonomy, ShippedFileMatchesBuiltIn) {
  std::ifstream in(std::string(PARASPEECH_SOURCE_DIR) + "/data/taxonomy/default.json");
  ASSERT_TRUE(in);
  std::stringstream ss;
  ss << in.rdbuf();
  EXPECT_EQ(load_taxonomy(ss.str()), default_taxonomy());
}

TEST(Taxonomy, SingleCategory) {
  auto t = load_taxonomy(R"({"version":"x","categories":[{"id":"laughter","surface":"[Laughter]"}]})");
  EXPECT_EQ(t.size(), 1u);
  EXPECT_EQ(t[0].id, "laughter");
}

TEST(Taxonomy, DuplicateSurfaceRejected) {
  EXPECT_EQ(kind_of(R"({"categories":[{"id":"a","surface":"[Laughter]"},{"id":"b","surface":"[Laughter]"}]})"),
            ErrorKind::DuplicateSurface);
  // An alias may not shadow another category's surface either.
  EXPECT_EQ(kind_of(R"({"categories":[{"id":"a","surface":"[A]"},{"id":"b","surface":"[B]","aliases":["[A]"]}]})"),
            ErrorKind::DuplicateSurface);
}

TEST(Taxonomy, MalformedAndEmpty) {
  EXPECT_EQ(kind_of(R"({"categories":[{"id":"a","surface":"Laughter"}]})"), ErrorKind::MalformedSurface);
  EXPECT_EQ(kind_of(R"({"categories":[{"id":"a","surface":"[La[ugh]"}]})"), ErrorKind::MalformedSurface);
  EXPECT_EQ(kind_of(R"({"categories":[{"id":"a","surface":"[  ]"}]})"), ErrorKind::MalformedSurface);
  EXPECT_EQ(kind_of(R"({"categories":[]})"), ErrorKind::EmptyTaxonomy);
  EXPECT_EQ(kind_of(R"({"categories":[{"id":"a","surface":"[A]"},{"id":"a","surface":"[B]"}]})"), ErrorKind::DuplicateId);
  EXPECT_EQ(kind_of(R"({"categories":[{"id":"a","surface":"[None]"}]})"), ErrorKind::DuplicateSurface);
  EXPECT_EQ(kind_of("{not json"), ErrorKind::MalformedConfig);
  EXPECT_EQ(kind_of(R"({"categories":[{"id":"a","surface":"[A]","kind":"vocal"}]})"), ErrorKind::MalformedConfig);
}

TEST(Taxonomy, ErrorNamesOffendingEntry) {
  try {
    load_taxonomy(R"({"categories":[{"id":"a","surface":"[X]"},{"id":"b","surface":"[X]"}]})");
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("\"b\""), std::string::npos) << e.what();
  }
}

TEST(Taxonomy, ResolveIsExactAndCaseSensitive) {
  auto t = default_taxonomy();
  ASSERT_NE(t.resolve_surface("[Laughter]"), nullptr);
  EXPECT_EQ(t.resolve_surface("[Laughter]")->id, "laughter");
  EXPECT_EQ(t.resolve_surface("[laughter]"), nullptr);
  EXPECT_EQ(t.resolve_surface("[Sneeze]"), nullptr);
  EXPECT_EQ(t.resolve_surface("[None]"), nullptr);
  for (const auto& c : t.categories()) EXPECT_EQ(t.resolve_surface(c.surface), &t[t.index_of(c)]);
}

TEST(Taxonomy, AliasesResolveToOwner) {
  auto t = load_taxonomy(
      R"({"version":"v","categories":[{"id":"laughter","surface":"[Laughter]","aliases":["[Laugh]","[笑]"]},{"id":"cough","surface":"[Cough]"}]})");
  EXPECT_EQ(t.resolve_surface("[Laugh]")->id, "laughter");
  EXPECT_EQ(t.resolve_surface("[笑]")->id, "laughter");
}

TEST(Taxonomy, ConfigRoundTrip) {
  auto t = default_taxonomy();
  EXPECT_EQ(load_taxonomy(serialize_config(t)), t);
  auto u = load_taxonomy(
      R"({"version":"v2","none_surface":"[Nothing]","categories":[{"id":"a","surface":"[A]","kind":"interjection","aliases":["[AA]"]},{"id":"b","surface":"[B]","kind":"discourse-marker"}]})");
  EXPECT_EQ(load_taxonomy(serialize_config(u)), u);
}

TEST(Taxonomy, EnvironmentOverridesDefault) {
  const std::string path = ::testing::TempDir() + "/tax_env.json";
  std::ofstream(path) << R"({"version":"env","categories":[{"id":"x","surface":"[X]"}]})";
  ::setenv("PARASPEECH_TAXONOMY", path.c_str(), 1);
  EXPECT_EQ(load_taxonomy_from("default").version(), "env");
  EXPECT_EQ(load_taxonomy_from(path).version(), "env");
  ::unsetenv("PARASPEECH_TAXONOMY");
  EXPECT_EQ(load_taxonomy_from("default").size(), 18u);
  EXPECT_THROW(load_taxonomy_from("/nonexistent/tax.json"), Error);
}
