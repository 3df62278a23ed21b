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

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "paraspeech/cli.hpp"

using namespace paraspeech;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const fs::path kFixtures = PARASPEECH_FIXTURES;

struct Outcome {
  int code;
  std::string out, err;
  json doc() const { return json::parse(out); }
};

Outcome invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "paraspeech");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  fs::path d = fs::path(::testing::TempDir()) / "cli_test" / name;
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

std::vector<json> jsonl(const fs::path& p) {
  std::vector<json> out;
  std::ifstream in(p);
  std::string line;
  while (std::getline(in, line))
    if (!line.empty()) out.push_back(json::parse(line));
  return out;
}

}  // namespace

TEST(Cli, ScoreGoldenCorpus) {
  auto r = invoke({"score", "--ref", (kFixtures / "golden/ref.jsonl").string(), "--hyp",
                (kFixtures / "golden/hyp.jsonl").string(), "--taxonomy", "default"});
  ASSERT_EQ(r.code, 0) << r.err;
  auto d = r.doc();
  EXPECT_NEAR(d["cer_full"].get<double>(), 1.0 / 4, 1e-12);
  EXPECT_NEAR(d["cer_wo_para"].get<double>(), 3.0 / 35, 1e-12);
  EXPECT_NEAR(d["para_detection_rate"].get<double>(), 5.0 / 8, 1e-12);
  EXPECT_NEAR(d["event_precision"].get<double>(), 5.0 / 8, 1e-12);
  EXPECT_NEAR(d["event_recall"].get<double>(), 5.0 / 9, 1e-12);
  EXPECT_NEAR(d["event_f1"].get<double>(), 10.0 / 17, 1e-12);

  auto expected = json::parse(slurp(kFixtures / "golden/expected.json"));
  for (const char* k : {"errors_full", "reference_characters", "errors_wo_para", "reference_characters_wo_para",
                        "tagged_references", "detected", "event_tp", "event_fp", "event_fn"})
    EXPECT_EQ(d["counts"][k], expected[k]) << k;
  EXPECT_EQ(d["counts"]["missing_hypotheses"], 0);

  std::vector<std::string> keys;
  for (auto& [k, v] : d.items()) keys.push_back(k);
  std::sort(keys.begin(), keys.end());
  EXPECT_EQ(keys, (std::vector<std::string>{"cer_full", "cer_wo_para", "counts", "event_f1", "event_precision",
                                            "event_recall", "mode", "para_detection_rate", "per_category",
                                            "taxonomy_version", "toolkit_version"}));
  EXPECT_EQ(d["taxonomy_version"], "nvspeech-18-v1");
  EXPECT_EQ(d["mode"]["detection"], "category");
  for (auto& [id, row] : d["per_category"].items())
    for (const char* k : {"tp", "fp", "fn", "precision", "recall", "f1"}) EXPECT_TRUE(row.contains(k)) << id << k;
}

TEST(Cli, ScoreAnyDetectionIsAtLeastCategory) {
  auto ref = (kFixtures / "golden/ref.jsonl").string(), hyp = (kFixtures / "golden/hyp.jsonl").string();
  auto cat = invoke({"score", "--ref", ref, "--hyp", hyp}).doc();
  auto any = invoke({"score", "--ref", ref, "--hyp", hyp, "--detection", "any"}).doc();
  EXPECT_GE(any["para_detection_rate"].get<double>(), cat["para_detection_rate"].get<double>());
  EXPECT_EQ(any["mode"]["detection"], "any");
}

TEST(Cli, ScoreWritesReportFile) {
  auto dir = scratch("score_out");
  auto r = invoke({"score", "--ref", (kFixtures / "golden/ref.jsonl").string(), "--hyp",
                (kFixtures / "golden/hyp.jsonl").string(), "--out", (dir / "report.json").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NEAR(json::parse(slurp(dir / "report.json"))["cer_full"].get<double>(), 0.25, 1e-12);
}

TEST(Cli, StatsMatchesHandTally) {
  auto r = invoke({"stats", (kFixtures / "corpus/fixture.jsonl").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  auto d = r.doc();
  auto expected = json::parse(slurp(kFixtures / "corpus/expected_stats.json"));
  EXPECT_EQ(d["utterance_count"], expected["utterance_count"]);
  EXPECT_EQ(d["speaker_count"], expected["speaker_count"]);
  EXPECT_EQ(d["tag_events"], expected["tag_events"]);
  EXPECT_EQ(d["tagged_utterances"], expected["tagged_utterances"]);
  EXPECT_NEAR(d["total_hours"].get<double>(), expected["total_seconds"].get<double>() / 3600, 1e-12);
  EXPECT_EQ(d["per_source_counts"], expected["per_source"]);
  const auto tax = default_taxonomy();
  for (auto& [surface, n] : expected["per_category"].items())
    EXPECT_EQ(d["per_category_counts"][tax.resolve_surface(surface)->id], n) << surface;
}

TEST(Cli, StatsOnEmptyManifest) {
  auto dir = scratch("empty");
  std::ofstream(dir / "empty.jsonl").close();
  auto r = invoke({"stats", (dir / "empty.jsonl").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  auto d = r.doc();
  EXPECT_EQ(d["utterance_count"], 0);
  EXPECT_EQ(d["total_hours"], 0.0);
  EXPECT_EQ(d["tagged_fraction"], 0.0);
  for (auto& [k, v] : d["per_category_counts"].items()) EXPECT_EQ(v, 0) << k;
}

TEST(Cli, UsageErrorsExitTwo) {
  EXPECT_EQ(invoke({}).code, 2);
  EXPECT_EQ(invoke({"frobnicate"}).code, 2);
  EXPECT_EQ(invoke({"score", "--ref", "x"}).code, 2);
  EXPECT_EQ(invoke({"score", "--ref", "a", "--hyp", "b", "--detection", "fuzzy"}).code, 2);
  EXPECT_EQ(invoke({"kappa"}).code, 2);
}

TEST(Cli, VersionFlag) {
  auto r = invoke({"--version"});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find(kToolkitVersion), std::string::npos);
}

TEST(Cli, ValidateReportsErrorsAndExitsOne) {
  auto dir = scratch("validate");
  std::ofstream(dir / "bad.jsonl")
      << R"({"id":"x1","audio_path":"a.wav","duration_s":1.0,"speaker":"s","source":"game","transcript":"你好[Sneeze]","provenance":"human"})"
      << "\n"
      << R"({"id":"x2","audio_path":"b.wav","duration_s":1.0,"speaker":"s","source":"game","transcript":"好[Laughter]","provenance":"human"})"
      << "\nnot json\n";
  auto r = invoke({"validate", (dir / "bad.jsonl").string()});
  EXPECT_EQ(r.code, 1);
  auto d = r.doc();
  ASSERT_EQ(d["errors"].size(), 2u);
  EXPECT_EQ(d["errors"][0]["line"], 1);
  EXPECT_EQ(d["errors"][0]["kind"], "UnknownTag");
  EXPECT_EQ(d["errors"][1]["line"], 3);

  auto ok = invoke({"validate", (kFixtures / "corpus/fixture.jsonl").string()});
  EXPECT_EQ(ok.code, 0) << ok.out;
}

TEST(Cli, MissingFileIsFailureNotCrash) {
  auto r = invoke({"stats", "/nonexistent/manifest.jsonl"});
  EXPECT_EQ(r.code, 1);
  EXPECT_FALSE(r.err.empty());
}

TEST(Cli, MixDrawsExactProportion) {
  auto dir = scratch("mix");
  {
    std::ofstream pool(dir / "pool.jsonl");
    for (int i = 0; i < 150; ++i) {
      json j{{"id", "m" + std::to_string(1000 + i)}, {"audio_path", "a.wav"}, {"duration_s", 1.0}, {"speaker", "s"},
             {"source", "game"}, {"transcript", i % 2 ? "好[Laughter]" : "好"}, {"provenance", "human"}};
      pool << j.dump() << "\n";
    }
  }
  auto run = [&](const std::string& out, const std::string& seed) {
    return invoke({"--seed", seed, "mix", (dir / "pool.jsonl").string(), "--fraction", "0.65", "--size", "100", "--out",
                (dir / out).string()});
  };
  auto r = run("a.jsonl", "3");
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.doc()["tagged"], 65);
  EXPECT_EQ(r.doc()["untagged"], 35);
  auto recs = jsonl(dir / "a.jsonl");
  ASSERT_EQ(recs.size(), 100u);
  int tagged = 0;
  for (const auto& j : recs) tagged += j["transcript"].get<std::string>().find('[') != std::string::npos;
  EXPECT_EQ(tagged, 65);
  EXPECT_TRUE(fs::exists(dir / "a.jsonl.meta.json"));

  ASSERT_EQ(run("b.jsonl", "3").code, 0);
  EXPECT_EQ(slurp(dir / "a.jsonl"), slurp(dir / "b.jsonl"));
  ASSERT_EQ(run("c.jsonl", "4").code, 0);
  EXPECT_NE(slurp(dir / "a.jsonl"), slurp(dir / "c.jsonl"));

  auto starved = invoke({"mix", (dir / "pool.jsonl").string(), "--fraction", "0.9", "--size", "100", "--out",
                      (dir / "d.jsonl").string()});
  EXPECT_EQ(starved.code, 1);
  EXPECT_NE(starved.err.find("PoolExhausted"), std::string::npos) << starved.err;
}

TEST(Cli, SplitMatchesFrozenPartition) {
  auto dir = scratch("split");
  auto r = invoke({"--seed", "7", "split", (kFixtures / "split/ten.jsonl").string(), "--ratios", "train=0.8,test=0.2",
                "--out-dir", dir.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  auto frozen = json::parse(slurp(kFixtures / "split/seed7_train80_test20.json"));
  for (const char* part : {"train", "test"}) {
    std::vector<std::string> ids;
    for (const auto& j : jsonl(dir / (std::string(part) + ".jsonl"))) ids.push_back(j["id"]);
    EXPECT_EQ(json(ids), frozen[part]) << part;
  }
}

TEST(Cli, SpeakerDisjointSplitKeepsSpeakersApart) {
  auto dir = scratch("split_spk");
  auto r = invoke({"--seed", "1", "split", (kFixtures / "corpus/fixture.jsonl").string(), "--ratios",
                "train=0.6,dev=0.2,test=0.2", "--speaker-disjoint", "--out-dir", dir.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  std::map<std::string, std::string> owner;
  std::size_t total = 0;
  for (const char* part : {"train", "dev", "test"})
    for (const auto& j : jsonl(dir / (std::string(part) + ".jsonl"))) {
      ++total;
      auto [it, fresh] = owner.emplace(j["speaker"].get<std::string>(), part);
      EXPECT_EQ(it->second, part) << j["speaker"];
    }
  EXPECT_EQ(total, 20u);
}

TEST(Cli, CtcCheckAgreesWithEnumeration) {
  const auto m = (kFixtures / "ctc/uniform3x3.txt").string();
  auto r = invoke({"ctc-check", m, "--labels", "1,2"});
  ASSERT_EQ(r.code, 0) << r.out << r.err;
  auto d = r.doc();
  EXPECT_TRUE(d["agree"].get<bool>());
  // Five of the 27 equally likely paths collapse to (1, 2).
  EXPECT_NEAR(d["loss"].get<double>(), -std::log(5.0 / 27.0), 1e-9);

  auto inf = invoke({"ctc-check", m, "--labels", "1,1,1"});
  EXPECT_EQ(inf.code, 0);
  EXPECT_FALSE(inf.doc()["feasible"].get<bool>());
  EXPECT_TRUE(inf.doc()["loss"].is_null());
}

TEST(Cli, TagScore) {
  auto dir = scratch("tags");
  std::ofstream(dir / "ref.jsonl") << R"({"id":"1","tags":{"laughter":1,"cough":0}})" "\n"
                                   << R"({"id":"2","transcript":"好[Cough]"})" "\n";
  std::ofstream(dir / "hyp.jsonl") << R"({"id":"1","tags":{"laughter":0.7,"cough":0.6}})" "\n"
                                   << R"({"id":"2","tags":{"cough":0.4}})" "\n";
  auto r = invoke({"tag-score", "--ref", (dir / "ref.jsonl").string(), "--hyp", (dir / "hyp.jsonl").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  auto d = r.doc();
  // tp laughter@1; fp cough@1; fn cough@2.
  EXPECT_NEAR(d["precision"].get<double>(), 0.5, 1e-12);
  EXPECT_NEAR(d["recall"].get<double>(), 0.5, 1e-12);
  EXPECT_NEAR(d["f1"].get<double>(), 0.5, 1e-12);
}

TEST(Cli, KappaOnTwoManifests) {
  auto dir = scratch("kappa");
  auto write = [&](const std::string& name, std::vector<std::string> texts) {
    std::ofstream out(dir / name);
    for (std::size_t i = 0; i < texts.size(); ++i)
      out << json{{"id", "k" + std::to_string(i)}, {"audio_path", "a.wav"}, {"duration_s", 1.0}, {"speaker", "s"},
                  {"source", "game"}, {"transcript", texts[i]}, {"provenance", "human"}}
                 .dump()
          << "\n";
  };
  write("a.jsonl", {"你好[Laughter]", "好的", "[Laughter]哈哈", "[Cough]嗯", "走吧"});
  write("b.jsonl", {"你好[Laughter]", "好的", "[Laughter]哈哈", "[Cough]嗯", "走吧[Cough]"});
  auto r = invoke({"kappa", (dir / "a.jsonl").string(), (dir / "b.jsonl").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  auto d = r.doc();
  EXPECT_NEAR(d["per_category"]["cough"]["kappa"].get<double>(), 6.0 / 11, 1e-12);
  EXPECT_EQ(d["per_category"]["cough"]["second_only"], 1);
  EXPECT_NEAR(d["macro_kappa"].get<double>(), 17.0 / 22, 1e-12);
}

TEST(Cli, MergeAutoQuarantinesAndExitsOne) {
  auto dir = scratch("merge");
  std::ofstream(dir / "hyps.tsv") << "a1\t你好[Laughter]\na2\t好的[Sneeze]\n";
  auto r = invoke({"merge-auto", (kFixtures / "annotation/five.jsonl").string(), "--hyps", (dir / "hyps.tsv").string(),
                "--out", (dir / "merged.jsonl").string()});
  EXPECT_EQ(r.code, 1);
  auto merged = jsonl(dir / "merged.jsonl");
  ASSERT_EQ(merged.size(), 5u);
  EXPECT_EQ(merged[0]["transcript"], "你好[Laughter]");
  EXPECT_EQ(merged[0]["provenance"], "auto");
  EXPECT_EQ(merged[1]["transcript"], "好的");
  auto q = jsonl(dir / "merged.jsonl.quarantine.jsonl");
  ASSERT_EQ(q.size(), 1u);
  EXPECT_EQ(q[0]["id"], "a2");
  EXPECT_EQ(q[0]["kind"], "UnknownTag");

  std::ofstream(dir / "orphan.tsv") << "zz\t你好\n";
  EXPECT_EQ(invoke({"merge-auto", (kFixtures / "annotation/five.jsonl").string(), "--hyps",
                 (dir / "orphan.tsv").string(), "--out", (dir / "o.jsonl").string()})
                .code,
            1);
}

TEST(Cli, AssignCrossAndExport) {
  auto dir = scratch("assign");
  const auto five = (kFixtures / "annotation/five.jsonl").string();
  auto r = invoke({"--seed", "5", "assign-cross", five, "--fraction", "0.4", "--annotators", "bo,al,cy", "--out",
                (dir / "cross.json").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  auto cross = assignment_from_json(json::parse(slurp(dir / "cross.json")));
  EXPECT_EQ(cross.size(), 2u);
  for (auto& [id, pair] : cross) EXPECT_NE(pair.first, pair.second);
  EXPECT_EQ(invoke({"assign-cross", five, "--annotators", "solo"}).code, 1);

  std::ofstream log(dir / "log.jsonl");
  log << R"({"record_id":"a1","annotator":"al","transcript":"你好","submitted_at":"t1","client_version":"c"})" "\n"
      << R"({"record_id":"a1","annotator":"al","transcript":"你好[Cough]","submitted_at":"t2","client_version":"c"})" "\n"
      << R"({"record_id":"a3","annotator":"bo","transcript":"哈哈","submitted_at":"t3","client_version":"c"})" "\n";
  log.close();
  auto e = invoke({"export", five, "--log", (dir / "log.jsonl").string(), "--annotator", "al", "--out",
                (dir / "al.jsonl").string()});
  ASSERT_EQ(e.code, 0) << e.err;
  auto recs = jsonl(dir / "al.jsonl");
  ASSERT_EQ(recs.size(), 1u);
  EXPECT_EQ(recs[0]["transcript"], "你好[Cough]");
  EXPECT_EQ(recs[0]["annotator"], "al");
}
