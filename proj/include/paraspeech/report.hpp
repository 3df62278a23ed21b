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

#ifndef PARASPEECH_REPORT_HPP
#define PARASPEECH_REPORT_HPP

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "paraspeech/metrics.hpp"
#include "paraspeech/taxonomy.hpp"
#include "paraspeech/version.hpp"

namespace paraspeech {

inline std::string_view to_string(DetectionMode m) noexcept { return m == DetectionMode::Any ? "any" : "category"; }

inline nlohmann::ordered_json to_json(const PrfCounts& c) {
  return {{"tp", c.tp}, {"fp", c.fp}, {"fn", c.fn}, {"precision", c.precision()}, {"recall", c.recall()}, {"f1", c.f1()}};
}

/// Machine-readable score report. Top-level keys are a stable schema.
inline nlohmann::ordered_json to_json(const ScoreReport& r, const Taxonomy& t) {
  nlohmann::ordered_json per = nlohmann::ordered_json::object();
  for (const auto& c : r.per_category) per[c.id] = to_json(c.counts);
  return {
      {"toolkit_version", kToolkitVersion},
      {"taxonomy_version", t.version()},
      {"mode",
       {{"detection", to_string(r.options.detection)},
        {"drop_punct", r.options.drop_punct},
        {"event_matching", "per-utterance category multiset"},
        {"cer_pooling", "sum of edit distances over sum of reference lengths"}}},
      {"cer_full", r.cer_full},
      {"cer_wo_para", r.cer_wo_para},
      {"para_detection_rate", r.para_detection_rate},
      {"event_precision", r.event_precision},
      {"event_recall", r.event_recall},
      {"event_f1", r.event_f1},
      {"per_category", std::move(per)},
      {"counts",
       {{"utterances", r.utterances},
        {"reference_characters", r.reference_characters},
        {"reference_characters_wo_para", r.reference_characters_wo_para},
        {"reference_events", r.reference_events},
        {"errors_full", r.errors_full},
        {"errors_wo_para", r.errors_wo_para},
        {"tagged_references", r.tagged_references},
        {"detected", r.detected},
        {"event_tp", r.event_counts.tp},
        {"event_fp", r.event_counts.fp},
        {"event_fn", r.event_counts.fn}}},
  };
}

inline nlohmann::ordered_json to_json(const KappaReport& k, const Taxonomy& t) {
  nlohmann::ordered_json per = nlohmann::ordered_json::object();
  for (std::size_t c = 0; c < k.tables.size(); ++c) {
    const auto& tb = k.tables[c];
    const std::string id = c < t.size() ? t[c].id : std::to_string(c);
    per[id] = {{"kappa", k.per_category[c]}, {"both", tb.a}, {"first_only", tb.b}, {"second_only", tb.c}, {"neither", tb.d}};
  }
  nlohmann::ordered_json active = nlohmann::ordered_json::array();
  for (auto c : k.active) active.push_back(c < t.size() ? t[c].id : std::to_string(c));
  return {{"toolkit_version", kToolkitVersion},
          {"taxonomy_version", t.version()},
          {"utterances", k.tables.empty() ? 0 : k.tables.front().n()},
          {"macro_kappa", k.macro},
          {"macro_categories", std::move(active)},
          {"per_category", std::move(per)}};
}

}  // namespace paraspeech

#endif  // PARASPEECH_REPORT_HPP
