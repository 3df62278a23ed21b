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

#ifndef PARASPEECH_CORPUS_HPP
#define PARASPEECH_CORPUS_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "paraspeech/error.hpp"
#include "paraspeech/manifest.hpp"
#include "paraspeech/random.hpp"
#include "paraspeech/taxonomy.hpp"
#include "paraspeech/transcript.hpp"

namespace paraspeech {

struct CorpusStats {
  std::uint64_t utterance_count = 0;
  double total_hours = 0.0;
  std::uint64_t speaker_count = 0;
  std::uint64_t tag_events = 0;
  std::uint64_t tagged_utterances = 0;
  double tagged_fraction = 0.0;
  std::vector<std::pair<std::string, std::uint64_t>> per_category_counts;  // taxonomy order
  std::vector<std::pair<std::string, std::uint64_t>> per_source_counts;    // fixed source order
};

inline CorpusStats corpus_stats(const std::vector<ManifestRecord>& records, const Taxonomy& t) {
  CorpusStats s;
  std::vector<std::uint64_t> per_cat(t.size(), 0);
  std::map<Source, std::uint64_t> per_src{
      {Source::Game, 0}, {Source::InTheWild, 0}, {Source::NonspeechAugment, 0}, {Source::Synthetic, 0}};
  std::unordered_set<std::string> speakers;
  double seconds = 0.0;
  for (const auto& r : records) {
    ++s.utterance_count;
    seconds += r.duration_s;
    speakers.insert(r.speaker);
    ++per_src[r.source];
    auto events = tag_events(r.transcript);
    s.tag_events += events.size();
    s.tagged_utterances += !events.empty();
    for (const auto& ev : events) ++per_cat.at(ev.category);
  }
  s.total_hours = seconds / 3600.0;
  s.speaker_count = speakers.size();
  s.tagged_fraction = s.utterance_count == 0 ? 0.0 : double(s.tagged_utterances) / double(s.utterance_count);
  for (std::size_t c = 0; c < t.size(); ++c) s.per_category_counts.emplace_back(t[c].id, per_cat[c]);
  for (const auto& [src, n] : per_src) s.per_source_counts.emplace_back(std::string(to_string(src)), n);
  return s;
}

inline ordered_json to_json(const CorpusStats& s, const Taxonomy& t) {
  ordered_json cats = ordered_json::object(), srcs = ordered_json::object();
  for (const auto& [id, n] : s.per_category_counts) cats[id] = n;
  for (const auto& [src, n] : s.per_source_counts) srcs[src] = n;
  return {{"toolkit_version", kToolkitVersion},
          {"taxonomy_version", t.version()},
          {"utterance_count", s.utterance_count},
          {"total_hours", s.total_hours},
          {"speaker_count", s.speaker_count},
          {"tag_events", s.tag_events},
          {"tagged_utterances", s.tagged_utterances},
          {"tagged_fraction", s.tagged_fraction},
          {"tagged_definition", "at least one tag event"},
          {"per_category_counts", std::move(cats)},
          {"per_source_counts", std::move(srcs)}};
}

// ---------------------------------------------------------------------------
// Splitting.

struct SplitSpec {
  std::vector<std::pair<std::string, double>> ratios;
  std::uint64_t seed = 0;
  bool speaker_disjoint = false;
};

struct SplitPart {
  std::string name;
  std::vector<ManifestRecord> records;  // sorted by id
};

namespace detail {

inline void check_split_spec(const SplitSpec& spec) {
  if (spec.ratios.empty()) throw Error(ErrorKind::InvalidArgument, "split needs at least one ratio");
  std::set<std::string> names;
  double sum = 0.0;
  for (const auto& [name, r] : spec.ratios) {
    if (!names.insert(name).second) throw Error(ErrorKind::InvalidArgument, "duplicate split name \"" + name + "\"");
    if (!(r > 0.0 && r <= 1.0)) throw Error(ErrorKind::InvalidArgument, "ratio for \"" + name + "\" must lie in (0,1]");
    sum += r;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw Error(ErrorKind::InvalidArgument, "split ratios sum to " + std::to_string(sum));
}

/// Largest-remainder apportionment of n items; ties go to the earlier split.
inline std::vector<std::size_t> apportion(std::size_t n, const SplitSpec& spec) {
  std::vector<std::size_t> counts;
  std::vector<std::pair<double, std::size_t>> rema;
  std::size_t assigned = 0;
  for (std::size_t i = 0; i < spec.ratios.size(); ++i) {
    double exact = spec.ratios[i].second * double(n);
    auto base = static_cast<std::size_t>(std::floor(exact + 1e-9));
    counts.push_back(base);
    assigned += base;
    rema.emplace_back(exact - double(base), i);
  }
  std::stable_sort(rema.begin(), rema.end(), [](auto& a, auto& b) { return a.first > b.first; });
  for (std::size_t k = 0; assigned < n; ++k, ++assigned) ++counts[rema[k % rema.size()].second];
  return counts;
}

inline std::vector<ManifestRecord> sorted_by_id(std::vector<ManifestRecord> records) {
  std::sort(records.begin(), records.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
  return records;
}

}  // namespace detail

/// Seeded partition of `records`. Plain mode shuffles the id-sorted records
/// and cuts them at largest-remainder counts. Speaker-disjoint mode shuffles
/// speakers, orders the groups by descending size, and gives each group to
/// the split furthest below its target; the last groups go to splits that
/// are still empty.
inline std::vector<SplitPart> split(const std::vector<ManifestRecord>& records, const SplitSpec& spec) {
  detail::check_split_spec(spec);
  auto sorted = detail::sorted_by_id(records);
  SeededRng rng(spec.seed);
  const std::size_t k = spec.ratios.size();
  std::vector<SplitPart> parts;
  for (const auto& [name, r] : spec.ratios) parts.push_back({name, {}});

  if (!spec.speaker_disjoint) {
    std::vector<std::size_t> order(sorted.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    rng.shuffle(std::span<std::size_t>(order));
    auto counts = detail::apportion(sorted.size(), spec);
    std::size_t pos = 0;
    for (std::size_t s = 0; s < k; ++s)
      for (std::size_t c = 0; c < counts[s]; ++c) parts[s].records.push_back(sorted[order[pos++]]);
  } else {
    std::map<std::string, std::vector<std::size_t>> by_speaker;
    for (std::size_t i = 0; i < sorted.size(); ++i) by_speaker[sorted[i].speaker].push_back(i);
    if (by_speaker.size() < k)
      throw Error(ErrorKind::InsufficientSpeakers, std::to_string(by_speaker.size()) + " speakers for " + std::to_string(k) + " splits");
    std::vector<const std::vector<std::size_t>*> groups;
    for (const auto& [spk, idx] : by_speaker) groups.push_back(&idx);
    rng.shuffle(std::span(groups));
    std::stable_sort(groups.begin(), groups.end(), [](auto* a, auto* b) { return a->size() > b->size(); });

    std::vector<double> target(k);
    for (std::size_t s = 0; s < k; ++s) target[s] = spec.ratios[s].second * double(sorted.size());
    std::vector<std::size_t> filled(k, 0);
    std::size_t empty = k;
    for (std::size_t g = 0; g < groups.size(); ++g) {
      const std::size_t remaining = groups.size() - g;
      std::size_t best = k;
      for (std::size_t s = 0; s < k; ++s) {
        if (remaining <= empty && filled[s] > 0) continue;
        if (best == k || target[s] - double(filled[s]) > target[best] - double(filled[best])) best = s;
      }
      if (filled[best] == 0) --empty;
      filled[best] += groups[g]->size();
      for (std::size_t i : *groups[g]) parts[best].records.push_back(sorted[i]);
    }
  }
  for (auto& p : parts) p.records = detail::sorted_by_id(std::move(p.records));
  return parts;
}

// ---------------------------------------------------------------------------
// Auto-label merging.

struct QuarantineEntry {
  ManifestRecord record;
  std::string hypothesis;
  ErrorKind kind;
  std::string reason;
};

struct MergeResult {
  std::vector<ManifestRecord> records;
  std::vector<QuarantineEntry> quarantine;
};

/// Replaces transcripts with tagged hypotheses and marks them auto. A
/// hypothesis that does not parse leaves its record untouched and is
/// reported in `quarantine`.
inline MergeResult merge_auto_labels(const std::vector<ManifestRecord>& base,
                                     const std::map<std::string, std::string>& hyps, const Taxonomy& t) {
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < base.size(); ++i) index.emplace(base[i].id, i);
  for (const auto& [id, text] : hyps)
    if (!index.count(id)) throw Error(ErrorKind::OrphanHypothesis, "hypothesis for unknown record \"" + id + "\"");

  MergeResult out;
  out.records.reserve(base.size());
  for (const auto& rec : base) {
    auto h = hyps.find(rec.id);
    if (h == hyps.end()) {
      out.records.push_back(rec);
      continue;
    }
    try {
      ManifestRecord merged = rec;
      merged.transcript = parse_transcript(h->second, t);
      merged.provenance = Provenance::Auto;
      out.records.push_back(std::move(merged));
    } catch (const Error& e) {
      out.quarantine.push_back({rec, h->second, e.kind(), e.what()});
      out.records.push_back(rec);
    }
  }
  return out;
}

inline ordered_json to_json(const QuarantineEntry& q) {
  ordered_json j = to_json(q.record);
  j["transcript"] = q.hypothesis;
  j["reason"] = q.reason;
  j["kind"] = to_string(q.kind);
  return j;
}

/// Reads "id<TAB>transcript" or JSON lines {"id":..,"transcript":..}.
inline std::map<std::string, std::string> read_hypotheses(std::istream& in) {
  std::map<std::string, std::string> hyps;
  std::string line;
  std::size_t no = 0;
  while (std::getline(in, line)) {
    ++no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    std::string id, text;
    if (line.front() == '{') {
      try {
        auto j = nlohmann::json::parse(line);
        id = j.at("id").get<std::string>();
        text = j.at("transcript").get<std::string>();
      } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::MalformedRecord, "hypothesis line " + std::to_string(no) + ": " + e.what());
      }
    } else {
      auto tab = line.find('\t');
      if (tab == std::string::npos) throw Error(ErrorKind::MalformedRecord, "hypothesis line " + std::to_string(no) + " lacks a tab");
      id = line.substr(0, tab);
      text = line.substr(tab + 1);
    }
    if (!hyps.emplace(id, text).second) throw Error(ErrorKind::DuplicateId, "duplicate hypothesis for \"" + id + "\"");
  }
  return hyps;
}

// ---------------------------------------------------------------------------
// Training mix.

/// Rounds `x` up, ignoring binary representation noise below 1e-9.
inline std::size_t ceil_count(double x) { return static_cast<std::size_t>(std::ceil(x - 1e-9)); }

/// Samples ceil(size * fraction) tag-bearing records and the rest tag-free,
/// without replacement. Output is sorted by id.
inline std::vector<ManifestRecord> mix_sampler(const std::vector<ManifestRecord>& records, double para_rich_fraction,
                                               std::size_t target_size, std::uint64_t seed) {
  if (!(para_rich_fraction >= 0.0 && para_rich_fraction <= 1.0))
    throw Error(ErrorKind::InvalidArgument, "fraction must lie in [0,1]");
  auto sorted = detail::sorted_by_id(records);
  std::vector<const ManifestRecord*> rich, plain;
  for (const auto& r : sorted) (r.tagged() ? rich : plain).push_back(&r);

  const std::size_t need_rich = std::min(target_size, ceil_count(double(target_size) * para_rich_fraction));
  const std::size_t need_plain = target_size - need_rich;
  if (need_rich > rich.size()) throw PoolExhaustedError("tagged", need_rich, rich.size());
  if (need_plain > plain.size()) throw PoolExhaustedError("untagged", need_plain, plain.size());

  SeededRng rng(seed);
  std::vector<ManifestRecord> out;
  auto draw = [&](std::vector<const ManifestRecord*>& pool, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t j = i + static_cast<std::size_t>(rng.below(pool.size() - i));
      std::swap(pool[i], pool[j]);
      out.push_back(*pool[i]);
    }
  };
  draw(rich, need_rich);
  draw(plain, need_plain);
  return detail::sorted_by_id(std::move(out));
}

// ---------------------------------------------------------------------------
// Cross-annotation assignment.

using AnnotatorPair = std::pair<std::string, std::string>;

/// Picks ceil(fraction * n) records and hands each to an unordered annotator
/// pair; pairs are dealt round-robin so their loads differ by at most one.
inline std::map<std::string, AnnotatorPair> assign_cross_annotation(const std::vector<ManifestRecord>& records,
                                                                    double fraction,
                                                                    std::vector<std::string> annotators,
                                                                    std::uint64_t seed) {
  std::sort(annotators.begin(), annotators.end());
  annotators.erase(std::unique(annotators.begin(), annotators.end()), annotators.end());
  if (annotators.size() < 2) throw Error(ErrorKind::TooFewAnnotators, "need at least two distinct annotators");
  if (!(fraction > 0.0 && fraction <= 1.0)) throw Error(ErrorKind::InvalidArgument, "fraction must lie in (0,1]");

  std::vector<std::string> ids;
  for (const auto& r : records) ids.push_back(r.id);
  std::sort(ids.begin(), ids.end());
  SeededRng rng(seed);
  rng.shuffle(std::span(ids));
  ids.resize(std::min(ids.size(), ceil_count(fraction * double(ids.size()))));

  std::vector<AnnotatorPair> pairs;
  for (std::size_t i = 0; i < annotators.size(); ++i)
    for (std::size_t j = i + 1; j < annotators.size(); ++j) pairs.emplace_back(annotators[i], annotators[j]);
  rng.shuffle(std::span(pairs));

  std::map<std::string, AnnotatorPair> out;
  for (std::size_t i = 0; i < ids.size(); ++i) out.emplace(ids[i], pairs[i % pairs.size()]);
  return out;
}

inline ordered_json to_json(const std::map<std::string, AnnotatorPair>& assignment) {
  ordered_json j = ordered_json::object();
  for (const auto& [id, p] : assignment) j[id] = {p.first, p.second};
  return j;
}

inline std::map<std::string, AnnotatorPair> assignment_from_json(const nlohmann::json& j) {
  std::map<std::string, AnnotatorPair> out;
  try {
    for (const auto& [id, v] : j.items()) {
      if (!v.is_array() || v.size() != 2) throw Error(ErrorKind::MalformedRecord, "assignment for \"" + id + "\" is not a pair");
      out.emplace(id, AnnotatorPair{v[0].get<std::string>(), v[1].get<std::string>()});
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::MalformedRecord, e.what());
  }
  return out;
}

}  // namespace paraspeech

#endif  // PARASPEECH_CORPUS_HPP
