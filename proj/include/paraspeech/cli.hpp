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

#ifndef PARASPEECH_CLI_HPP
#define PARASPEECH_CLI_HPP

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "paraspeech/annotation.hpp"
#include "paraspeech/corpus.hpp"
#include "paraspeech/manifest.hpp"
#include "paraspeech/metrics.hpp"
#include "paraspeech/report.hpp"
#include "paraspeech/seqmath.hpp"
#include "paraspeech/server.hpp"
#include "paraspeech/taxonomy.hpp"
#include "paraspeech/version.hpp"

namespace paraspeech::cli {

enum ExitCode : int { kOk = 0, kFailure = 1, kUsage = 2 };

namespace detail {

namespace fs = std::filesystem;

inline std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Writes `doc` to `out_path`, or to `out` when the path is empty or "-".
inline void emit(const nlohmann::ordered_json& doc, const std::string& out_path, std::ostream& out) {
  const std::string text = doc.dump(2) + "\n";
  if (out_path.empty() || out_path == "-")
    out << text;
  else
    write_text_file(out_path, text);
}

/// Hypothesis transcripts keyed by id: a manifest, JSON lines with id and
/// transcript, or id<TAB>transcript lines.
inline std::map<std::string, std::string> read_transcripts(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + p.string());
  return read_hypotheses(in);
}

inline std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

inline std::vector<std::pair<std::string, double>> parse_ratios(const std::string& s) {
  std::vector<std::pair<std::string, double>> out;
  for (const auto& item : split_list(s)) {
    auto eq = item.find('=');
    if (eq == std::string::npos) throw CLI::ValidationError("--ratios", "expected name=ratio, got \"" + item + "\"");
    try {
      out.emplace_back(item.substr(0, eq), std::stod(item.substr(eq + 1)));
    } catch (const std::exception&) {
      throw CLI::ValidationError("--ratios", "bad ratio in \"" + item + "\"");
    }
  }
  return out;
}

/// Tag vectors keyed by id. Lines carry either {"id", "tags": {category: weight}}
/// or {"id", "transcript"} (presence of each tag).
inline std::map<std::string, TagVector> read_tag_vectors(const fs::path& p, const Taxonomy& t) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + p.string());
  std::map<std::string, TagVector> out;
  std::string line;
  std::size_t no = 0;
  while (std::getline(in, line)) {
    ++no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      auto j = nlohmann::json::parse(line);
      std::string id = j.at("id").get<std::string>();
      TagVector v{std::vector<double>(t.size(), 0.0)};
      if (j.contains("tags")) {
        for (const auto& [cat, w] : j.at("tags").items()) {
          std::size_t idx = t.index_of_id(cat);
          if (idx == t.size()) throw Error(ErrorKind::UnknownTag, "unknown category \"" + cat + "\"");
          v.values[idx] = w.get<double>();
        }
      } else {
        v = presence_vector(parse_transcript(j.at("transcript").get<std::string>(), t), t.size());
      }
      if (!out.emplace(id, std::move(v)).second) throw Error(ErrorKind::DuplicateId, "duplicate id \"" + id + "\"");
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorKind::MalformedRecord, p.string() + ":" + std::to_string(no) + ": " + e.what());
    }
  }
  return out;
}

inline std::atomic<httplib::Server*> g_server{nullptr};

}  // namespace detail

/// Runs one CLI invocation. Reports go to `out`, diagnostics to `err`.
inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  namespace fs = std::filesystem;
  CLI::App app{"paraspeech: inline paralinguistic tag toolkit"};
  app.set_version_flag("--version", kToolkitVersion);
  app.require_subcommand(1);
  app.fallthrough();

  std::string taxonomy_arg = "default";
  unsigned threads = 1;
  std::uint64_t seed = 0;
  std::string out_path;
  app.add_option("--taxonomy", taxonomy_arg, "taxonomy config path, or \"default\" ($PARASPEECH_TAXONOMY, else built-in)");
  app.add_option("--threads", threads, "worker threads for parallel stages")->check(CLI::Range(1u, 256u));
  app.add_option("--seed", seed, "seed for splits and samplers");

  // validate
  std::string manifest;
  auto* validate = app.add_subcommand("validate", "check a manifest against the schema and taxonomy");
  validate->add_option("manifest", manifest, "manifest file")->required();
  validate->add_option("--out", out_path, "report path (default stdout)");

  // stats
  auto* stats = app.add_subcommand("stats", "corpus statistics of a manifest");
  stats->add_option("manifest", manifest, "manifest file")->required();
  stats->add_option("--out", out_path, "report path (default stdout)");

  // split
  std::string ratios = "train=0.8,test=0.2";
  std::string out_dir;
  bool speaker_disjoint = false;
  auto* split_cmd = app.add_subcommand("split", "seeded train/test partition");
  split_cmd->add_option("manifest", manifest, "manifest file")->required();
  split_cmd->add_option("--ratios", ratios, "comma list of name=ratio");
  split_cmd->add_flag("--speaker-disjoint", speaker_disjoint, "keep each speaker inside one split");
  split_cmd->add_option("--out-dir", out_dir, "directory for <name>.jsonl outputs")->required();

  // score
  std::string ref_path, hyp_path, detection = "category";
  bool drop_punct = false;
  auto* score = app.add_subcommand("score", "ASR scoring of hypotheses against a reference manifest");
  score->add_option("--ref", ref_path, "reference manifest")->required();
  score->add_option("--hyp", hyp_path, "hypotheses: manifest, id/transcript JSON lines, or TSV")->required();
  score->add_option("--detection", detection, "detection rule")->check(CLI::IsMember({"category", "any"}));
  score->add_flag("--drop-punct", drop_punct, "ignore punctuation in CER");
  score->add_option("--out", out_path, "report path (default stdout)");

  // tag-score
  double threshold = 0.5;
  auto* tag_score = app.add_subcommand("tag-score", "multi-label tagging P/R/F1");
  tag_score->add_option("--ref", ref_path, "reference tag vectors")->required();
  tag_score->add_option("--hyp", hyp_path, "hypothesis tag vectors")->required();
  tag_score->add_option("--threshold", threshold, "decision threshold")->check(CLI::Range(0.0, 1.0));
  tag_score->add_option("--out", out_path, "report path (default stdout)");

  // kappa
  std::vector<std::string> kappa_inputs;
  std::string log_path, annotators_arg;
  auto* kappa = app.add_subcommand("kappa", "Cohen's kappa between two annotators");
  kappa->add_option("manifests", kappa_inputs, "two annotation manifests")->expected(0, 2);
  kappa->add_option("--log", log_path, "submission log (instead of two manifests)");
  kappa->add_option("--annotators", annotators_arg, "the two annotators to compare from --log, a,b");
  kappa->add_option("--out", out_path, "report path (default stdout)");

  // mix
  double fraction = 0.65;
  std::size_t size = 0;
  auto* mix = app.add_subcommand("mix", "sample a tagged/untagged training mix");
  mix->add_option("manifest", manifest, "manifest file")->required();
  mix->add_option("--fraction", fraction, "share of tag-bearing records")->check(CLI::Range(0.0, 1.0));
  mix->add_option("--size", size, "records to draw")->required();
  mix->add_option("--out", out_path, "output manifest")->required();

  // merge-auto
  std::string hyps_path, quarantine_path;
  auto* merge = app.add_subcommand("merge-auto", "merge automatic tagged transcripts into a manifest");
  merge->add_option("manifest", manifest, "base manifest")->required();
  merge->add_option("--hyps", hyps_path, "tagged hypotheses")->required();
  merge->add_option("--out", out_path, "output manifest")->required();
  merge->add_option("--quarantine", quarantine_path, "rejected hypotheses (default <out>.quarantine.jsonl)");

  // assign-cross
  double cross_fraction = 0.05;
  auto* assign = app.add_subcommand("assign-cross", "choose records for double annotation");
  assign->add_option("manifest", manifest, "manifest file")->required();
  assign->add_option("--fraction", cross_fraction, "share of records to cross-annotate")->check(CLI::Range(0.0, 1.0));
  assign->add_option("--annotators", annotators_arg, "comma list of annotators")->required();
  assign->add_option("--out", out_path, "assignment JSON (default stdout)");

  // ctc-check
  std::string matrix_path, labels_arg;
  auto* ctc = app.add_subcommand("ctc-check", "CTC loss on a matrix fixture versus path enumeration");
  ctc->add_option("matrix", matrix_path, "probability matrix file")->required();
  ctc->add_option("--labels", labels_arg, "comma list of target symbol indices");
  ctc->add_option("--out", out_path, "report path (default stdout)");

  // export
  std::string annotator;
  auto* export_cmd = app.add_subcommand("export", "one annotator's latest submissions as a manifest");
  export_cmd->add_option("manifest", manifest, "base manifest")->required();
  export_cmd->add_option("--log", log_path, "submission log")->required();
  export_cmd->add_option("--annotator", annotator, "annotator id")->required();
  export_cmd->add_option("--out", out_path, "output manifest")->required();

  // serve
  std::string host = "127.0.0.1", cross_path, guidelines_path;
  int port = 8080;
  auto* serve = app.add_subcommand("serve", "host the annotation service");
  serve->add_option("manifest", manifest, "manifest to annotate")->required();
  serve->add_option("--port", port, "listen port")->check(CLI::Range(0, 65535));
  serve->add_option("--host", host, "bind address");
  serve->add_option("--out", out_path, "submission log path")->required();
  serve->add_option("--cross", cross_path, "cross-annotation assignment JSON");
  serve->add_option("--guidelines", guidelines_path, "HTML page served at /guidelines");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    const Taxonomy tax = load_taxonomy_from(taxonomy_arg);

    if (*validate) {
      auto rep = validate_manifest(read_manifest_lines(fs::path(manifest)), tax, threads);
      auto doc = to_json(rep, tax);
      if (auto v = sidecar_taxonomy_version(manifest); v && *v != tax.version())
        doc["warnings"].push_back("manifest header names taxonomy \"" + *v + "\", validating with \"" + tax.version() + "\"");
      detail::emit(doc, out_path, out);
      return rep.ok() ? kOk : kFailure;
    }
    if (*stats) {
      detail::emit(to_json(corpus_stats(load_manifest(manifest, tax), tax), tax), out_path, out);
      return kOk;
    }
    if (*split_cmd) {
      SplitSpec spec{detail::parse_ratios(ratios), seed, speaker_disjoint};
      auto parts = split(load_manifest(manifest, tax), spec);
      fs::create_directories(out_dir);
      nlohmann::ordered_json summary{{"seed", seed}, {"speaker_disjoint", speaker_disjoint}, {"splits", nlohmann::ordered_json::object()}};
      for (const auto& p : parts) {
        write_manifest(fs::path(out_dir) / (p.name + ".jsonl"), p.records, tax);
        summary["splits"][p.name] = p.records.size();
      }
      detail::emit(summary, "", out);
      return kOk;
    }
    if (*score) {
      auto refs = load_manifest(ref_path, tax);
      auto hyps = detail::read_transcripts(hyp_path);
      std::vector<UtterancePair> pairs;
      std::uint64_t missing = 0;
      for (auto& r : refs) {
        auto it = hyps.find(r.id);
        TaggedTranscript hyp;
        if (it == hyps.end()) ++missing;
        else hyp = parse_transcript(it->second, tax);
        pairs.push_back({r.id, std::move(r.transcript), std::move(hyp)});
      }
      ScoreOptions opt{detection == "any" ? DetectionMode::Any : DetectionMode::Category, drop_punct, threads};
      auto doc = to_json(score_corpus(pairs, tax, opt), tax);
      doc["counts"]["missing_hypotheses"] = missing;
      detail::emit(doc, out_path, out);
      return kOk;
    }
    if (*tag_score) {
      auto refs = detail::read_tag_vectors(ref_path, tax);
      auto hyps = detail::read_tag_vectors(hyp_path, tax);
      std::vector<TagVector> rv, hv;
      for (const auto& [id, v] : refs) {
        auto it = hyps.find(id);
        if (it == hyps.end()) throw Error(ErrorKind::DimensionMismatch, "no hypothesis for \"" + id + "\"");
        rv.push_back(v);
        hv.push_back(it->second);
      }
      if (hyps.size() != refs.size()) throw Error(ErrorKind::DimensionMismatch, "hypotheses name ids absent from the reference");
      auto prf = multilabel_prf(rv, hv, threshold);
      nlohmann::ordered_json doc{{"toolkit_version", kToolkitVersion}, {"taxonomy_version", tax.version()},
                                 {"threshold", threshold}, {"utterances", rv.size()},
                                 {"precision", prf.precision}, {"recall", prf.recall}, {"f1", prf.f1},
                                 {"tp", prf.counts.tp}, {"fp", prf.counts.fp}, {"fn", prf.counts.fn}};
      detail::emit(doc, out_path, out);
      return kOk;
    }
    if (*kappa) {
      std::vector<ManifestRecord> a, b;
      if (!log_path.empty()) {
        auto names = detail::split_list(annotators_arg);
        if (names.size() != 2 || !kappa_inputs.empty()) {
          err << "kappa --log needs --annotators a,b and no manifest arguments\n" << kappa->help();
          return kUsage;
        }
        // Exported views over whatever records appear in the log.
        std::vector<ManifestRecord> stubs;
        std::set<std::string> seen;
        for (const auto& s : read_submission_log(log_path))
          if (seen.insert(s.record_id).second) {
            ManifestRecord r;
            r.id = s.record_id;
            stubs.push_back(std::move(r));
          }
        auto log = read_submission_log(log_path);
        a = export_annotations(stubs, log, names[0], tax);
        b = export_annotations(stubs, log, names[1], tax);
      } else if (kappa_inputs.size() == 2) {
        a = load_manifest(kappa_inputs[0], tax);
        b = load_manifest(kappa_inputs[1], tax);
      } else {
        err << "kappa needs two manifests or --log with --annotators\n" << kappa->help();
        return kUsage;
      }
      auto [va, vb] = paired_presence(a, b, tax);
      detail::emit(to_json(cohen_kappa(va, vb), tax), out_path, out);
      return kOk;
    }
    if (*mix) {
      auto sample = mix_sampler(load_manifest(manifest, tax), fraction, size, seed);
      write_manifest(out_path, sample, tax);
      std::size_t tagged = std::count_if(sample.begin(), sample.end(), [](const auto& r) { return r.tagged(); });
      detail::emit({{"seed", seed}, {"fraction", fraction}, {"size", sample.size()}, {"tagged", tagged},
                    {"untagged", sample.size() - tagged}, {"tagged_definition", "at least one tag event"}},
                   "", out);
      return kOk;
    }
    if (*merge) {
      auto hyps = detail::read_transcripts(hyps_path);
      auto res = merge_auto_labels(load_manifest(manifest, tax), hyps, tax);
      write_manifest(out_path, res.records, tax);
      if (quarantine_path.empty()) quarantine_path = out_path + ".quarantine.jsonl";
      std::string q;
      for (const auto& e : res.quarantine) q += to_json(e).dump() + "\n";
      write_text_file(quarantine_path, q);
      detail::emit({{"records", res.records.size()}, {"merged", hyps.size() - res.quarantine.size()},
                    {"quarantined", res.quarantine.size()}, {"quarantine_path", quarantine_path}},
                   "", out);
      return res.quarantine.empty() ? kOk : kFailure;
    }
    if (*assign) {
      auto res = assign_cross_annotation(load_manifest(manifest, tax), cross_fraction, detail::split_list(annotators_arg), seed);
      detail::emit(to_json(res), out_path, out);
      return kOk;
    }
    if (*ctc) {
      std::ifstream in(matrix_path);
      if (!in) throw Error(ErrorKind::Io, "cannot open " + matrix_path);
      auto p = read_prob_matrix(in);
      std::vector<Symbol> labels;
      for (const auto& s : detail::split_list(labels_arg)) labels.push_back(std::stoul(s));
      auto fwd = ctc_loss(p, labels);
      auto oracle = ctc_loss_enumerate(p, labels);
      double diff = (fwd.infinite && oracle.infinite) ? 0.0 : std::abs(fwd.value - oracle.value);
      bool agree = fwd.infinite == oracle.infinite && diff <= 1e-9;
      nlohmann::ordered_json doc{{"frames", p.frames()}, {"symbols", p.symbols()}, {"blank", p.blank()},
                                 {"labels", labels}, {"feasible", !fwd.infinite},
                                 {"loss", fwd.infinite ? nlohmann::ordered_json(nullptr) : nlohmann::ordered_json(fwd.value)},
                                 {"oracle", oracle.infinite ? nlohmann::ordered_json(nullptr) : nlohmann::ordered_json(oracle.value)},
                                 {"abs_diff", diff}, {"tolerance", 1e-9}, {"agree", agree}};
      detail::emit(doc, out_path, out);
      return agree ? kOk : kFailure;
    }
    if (*export_cmd) {
      auto recs = export_annotations(load_manifest(manifest, tax), read_submission_log(log_path), annotator, tax);
      write_manifest(out_path, recs, tax);
      detail::emit({{"annotator", annotator}, {"records", recs.size()}}, "", out);
      return kOk;
    }
    if (*serve) {
      std::map<std::string, AnnotatorPair> cross;
      if (!cross_path.empty()) cross = assignment_from_json(nlohmann::json::parse(detail::read_file(cross_path)));
      AnnotationStore store(load_manifest(manifest, tax), tax, std::move(cross), out_path, fs::path(manifest).parent_path());
      httplib::Server server;
      mount_annotation_routes(server, store, guidelines_path.empty() ? std::string() : detail::read_file(guidelines_path));
      if (port == 0) port = server.bind_to_any_port(host);
      else if (!server.bind_to_port(host, port)) throw Error(ErrorKind::Io, "cannot bind " + host + ":" + std::to_string(port));
      err << "serving " << store.records().size() << " records on http://" << host << ":" << port << std::endl;
      detail::g_server = &server;
      server.listen_after_bind();
      detail::g_server = nullptr;
      return kOk;
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kFailure;
  } catch (const nlohmann::json::exception& e) {
    err << "error: " << e.what() << "\n";
    return kFailure;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return kFailure;
  }
  return kUsage;
}

/// Stops a server started by `run(... serve ...)`, e.g. from a signal handler.
inline void stop_serving() {
  if (auto* s = detail::g_server.load()) s->stop();
}

}  // namespace paraspeech::cli

#endif  // PARASPEECH_CLI_HPP
