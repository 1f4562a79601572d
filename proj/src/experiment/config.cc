// Copyright 2026 The PPRSF Authors.
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

#include "pprsf/experiment/config.h"

#include <cmath>
#include <fstream>
#include <set>

#include "pprsf/common/error.h"

namespace pprsf {

namespace {

using nlohmann::json;

// Reads optional fields out of one JSON object, recording type errors and
// unknown keys as violations under a dotted path.
class Section {
 public:
  Section(const json* obj, std::string path, std::vector<std::string>& out)
      : obj_(obj), path_(std::move(path)), out_(out) {
    if (obj_ != nullptr && !obj_->is_object()) {
      out_.push_back(path_ + ": expected an object");
      obj_ = nullptr;
    }
  }

  std::string field(const std::string& key) const {
    return path_.empty() ? key : path_ + "." + key;
  }

  void violation(const std::string& key, const std::string& what) {
    out_.push_back(field(key) + ": " + what);
  }

  const json* child(const std::string& key) {
    seen_.insert(key);
    if (obj_ == nullptr || !obj_->contains(key)) return nullptr;
    return &(*obj_)[key];
  }

  template <typename T>
  void read(const std::string& key, T& target) {
    const json* v = child(key);
    if (v == nullptr) return;
    try {
      if constexpr (std::is_unsigned_v<T>) {
        if (!v->is_number_integer() || v->get<long long>() < 0) {
          violation(key, "expected a non-negative integer");
          return;
        }
      } else if constexpr (std::is_integral_v<T>) {
        if (!v->is_number_integer()) {
          violation(key, "expected an integer");
          return;
        }
      } else if constexpr (std::is_floating_point_v<T>) {
        if (!v->is_number()) {
          violation(key, "expected a number");
          return;
        }
      }
      target = v->get<T>();
    } catch (const json::exception&) {
      violation(key, "has the wrong type");
    }
  }

  void finish() {
    if (obj_ == nullptr) return;
    for (const auto& [key, value] : obj_->items()) {
      if (seen_.count(key) == 0) violation(key, "unknown field");
    }
  }

 private:
  const json* obj_;
  std::string path_;
  std::vector<std::string>& out_;
  std::set<std::string> seen_;
};

void check(bool ok, Section& s, const std::string& key,
           const std::string& rule) {
  if (!ok) s.violation(key, rule);
}

}  // namespace

ConfigValidation parse_config(const json& doc,
                              const std::filesystem::path& base_dir) {
  ConfigValidation result;
  auto& v = result.violations;
  ExperimentConfig cfg;
  Section root(&doc, "", v);
  if (!doc.is_object()) {
    return result;
  }
  root.read("seed", cfg.seed);
  {
    std::string out_dir;
    root.read("output_dir", out_dir);
    if (!out_dir.empty()) cfg.output_dir = out_dir;
  }

  // Dataset source.
  {
    Section ds(root.child("dataset"), "dataset", v);
    const json* synth = ds.child("synthetic");
    const json* csv = ds.child("csv");
    if ((synth == nullptr) == (csv == nullptr)) {
      v.push_back("dataset: exactly one of synthetic or csv is required");
    }
    if (synth != nullptr) {
      SynthConfig sc;
      Section s(synth, "dataset.synthetic", v);
      s.read("N", sc.num_users);
      s.read("M", sc.num_items);
      s.read("d_item", sc.d_item);
      s.read("d_pub", sc.d_pub);
      s.read("d_pri", sc.d_pri);
      s.read("interactions_per_user", sc.interactions_per_user);
      s.read("preference_noise", sc.preference_noise);
      s.read("public_weight", sc.public_weight);
      s.read("private_weight", sc.private_weight);
      s.read("item_weight", sc.item_weight);
      s.read("click_threshold", sc.click_threshold);
      s.read("max_created_at", sc.max_created_at);
      s.read("exposure_temperature", sc.exposure_temperature);
      s.finish();
      check(sc.num_users >= 2, s, "N", "must be >= 2");
      check(sc.num_items >= 2, s, "M", "must be >= 2");
      check(sc.d_item >= 1, s, "d_item", "must be >= 1");
      check(sc.d_pub >= 1, s, "d_pub", "must be >= 1");
      check(sc.d_pri >= 1, s, "d_pri", "must be >= 1");
      check(sc.interactions_per_user >= 1 &&
                sc.interactions_per_user <= sc.num_items,
            s, "interactions_per_user", "must lie in [1, M]");
      check(sc.preference_noise >= 0.0, s, "preference_noise", "must be >= 0");
      check(sc.max_created_at >= 1, s, "max_created_at", "must be >= 1");
      check(sc.exposure_temperature >= 0.0, s, "exposure_temperature",
            "must be >= 0");
      cfg.synthetic = sc;
    }
    if (csv != nullptr) {
      Section s(csv, "dataset.csv", v);
      std::string catalog, pub, inter, pri;
      s.read("catalog", catalog);
      s.read("public", pub);
      s.read("interactions", inter);
      s.read("private", pri);
      s.finish();
      DatasetPaths paths;
      auto resolve = [&](const std::string& key, const std::string& value,
                         std::filesystem::path& target) {
        if (value.empty()) {
          s.violation(key, "path required");
          return;
        }
        target = std::filesystem::path(value).is_absolute()
                     ? std::filesystem::path(value)
                     : base_dir / value;
        if (!std::filesystem::exists(target)) {
          s.violation(key, "file does not exist: " + target.string());
        }
      };
      resolve("catalog", catalog, paths.catalog);
      resolve("public", pub, paths.public_users);
      resolve("interactions", inter, paths.interactions);
      resolve("private", pri, paths.private_users);
      cfg.csv = paths;
    }
    ds.finish();
  }

  {
    Section s(root.child("recall"), "recall", v);
    s.read("rank", cfg.recall.rank);
    s.read("learning_rate", cfg.recall.learning_rate);
    s.read("l2_reg", cfg.recall.l2_reg);
    s.read("epochs", cfg.recall.epochs);
    s.read("negative_samples_per_positive",
           cfg.recall.negative_samples_per_positive);
    s.finish();
    check(cfg.recall.rank >= 1, s, "rank", "must be >= 1");
    check(cfg.recall.learning_rate > 0.0, s, "learning_rate", "must be > 0");
    check(cfg.recall.l2_reg >= 0.0, s, "l2_reg", "must be >= 0");
    check(cfg.recall.epochs >= 1, s, "epochs", "must be >= 1");
  }

  {
    Section s(root.child("ranking"), "ranking", v);
    std::string map_name = to_string(cfg.feature_map);
    s.read("feature_map", map_name);
    try {
      cfg.feature_map = feature_map_from_string(map_name);
    } catch (const ConfigError& e) {
      s.violation("feature_map", e.what());
    }
    RankHyper& rank = cfg.federation.rank;
    s.read("local_epochs", rank.local_epochs);
    s.read("batch_size", rank.batch_size);
    s.read("learning_rate", rank.learning_rate);
    s.read("l2_reg", rank.l2_reg);
    s.finish();
    check(rank.local_epochs >= 1, s, "local_epochs", "must be >= 1");
    check(rank.batch_size >= 1, s, "batch_size", "must be >= 1");
    check(rank.learning_rate >= 0.0, s, "learning_rate", "must be >= 0");
    check(rank.l2_reg >= 0.0, s, "l2_reg", "must be >= 0");
  }

  {
    Section s(root.child("federation"), "federation", v);
    FedConfig& fed = cfg.federation;
    s.read("rounds", fed.rounds);
    s.read("fraction", fed.fraction);
    s.read("dropout_prob", fed.dropout_prob);
    std::string rule = to_string(fed.aggregation);
    s.read("aggregation", rule);
    try {
      fed.aggregation = aggregation_rule_from_string(rule);
    } catch (const ConfigError& e) {
      s.violation("aggregation", e.what());
    }
    s.read("early_stop_tolerance", fed.early_stop_tolerance);
    s.read("threads", fed.threads);
    s.finish();
    check(fed.rounds >= 1, s, "rounds", "must be >= 1");
    check(fed.fraction > 0.0 && fed.fraction <= 1.0, s, "fraction",
          "must lie in (0, 1]");
    check(fed.dropout_prob >= 0.0 && fed.dropout_prob < 1.0, s,
          "dropout_prob", "must lie in [0, 1)");
    check(fed.early_stop_tolerance >= 0.0, s, "early_stop_tolerance",
          "must be >= 0");
    check(fed.threads >= 1, s, "threads", "must be >= 1");
  }

  {
    Section s(root.child("serving"), "serving", v);
    s.read("K", cfg.k);
    s.read("T", cfg.t);
    s.finish();
    check(cfg.k >= 1, s, "K", "must be >= 1");
    if (cfg.synthetic && cfg.k >= cfg.synthetic->num_items) {
      s.violation("K", "must be below the catalog size M=" +
                           std::to_string(cfg.synthetic->num_items));
    }
    check(cfg.t > 1 && cfg.t < cfg.k, s, "T", "must satisfy 1 < T < K");
  }

  {
    Section s(root.child("rerank"), "rerank", v);
    RerankPolicy& p = cfg.rerank;
    s.read("diversity_lambda", p.diversity_lambda);
    s.read("freshness_weight", p.freshness_weight);
    s.read("popularity_weight", p.popularity_weight);
    s.read("output_size", p.output_size);
    s.finish();
    check(p.diversity_lambda >= 0.0 && p.diversity_lambda <= 1.0, s,
          "diversity_lambda", "must lie in [0, 1]");
    check(p.freshness_weight >= 0.0 && std::isfinite(p.freshness_weight), s,
          "freshness_weight", "must be finite and >= 0");
    check(p.popularity_weight >= 0.0 && std::isfinite(p.popularity_weight), s,
          "popularity_weight", "must be finite and >= 0");
    check(p.output_size >= 1 && p.output_size <= cfg.t, s, "output_size",
          "must lie in [1, T]");
  }

  {
    Section s(root.child("evaluation"), "evaluation", v);
    EvalConfig& e = cfg.eval;
    s.read("holdout_per_user", e.holdout_per_user);
    s.read("negatives_per_positive", e.negatives_per_positive);
    s.read("k_values", e.k_values);
    s.read("primary_k", e.primary_k);
    s.read("delta_threshold", e.delta_threshold);
    s.finish();
    check(e.holdout_per_user >= 1, s, "holdout_per_user", "must be >= 1");
    check(e.negatives_per_positive >= 1, s, "negatives_per_positive",
          "must be >= 1");
    bool ks_ok = !e.k_values.empty();
    for (std::size_t k : e.k_values) ks_ok = ks_ok && k >= 1;
    check(ks_ok, s, "k_values", "must be a non-empty list of integers >= 1");
    check(e.primary_k >= 1, s, "primary_k", "must be >= 1");
    check(e.delta_threshold >= 0.0, s, "delta_threshold", "must be >= 0");
  }

  root.finish();
  if (v.empty()) result.config = std::move(cfg);
  return result;
}

ConfigValidation validate_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read config file " + path.string());
  json doc = json::parse(in, nullptr, false);
  if (doc.is_discarded()) {
    ConfigValidation result;
    result.violations.push_back(path.string() + ": not valid JSON");
    return result;
  }
  return parse_config(doc, path.parent_path());
}

json to_json(const ExperimentConfig& c) {
  json j;
  j["seed"] = c.seed;
  j["output_dir"] = c.output_dir.string();
  if (c.synthetic) {
    const SynthConfig& s = *c.synthetic;
    j["dataset"]["synthetic"] = {{"N", s.num_users},
                                 {"M", s.num_items},
                                 {"d_item", s.d_item},
                                 {"d_pub", s.d_pub},
                                 {"d_pri", s.d_pri},
                                 {"interactions_per_user",
                                  s.interactions_per_user},
                                 {"preference_noise", s.preference_noise},
                                 {"public_weight", s.public_weight},
                                 {"private_weight", s.private_weight},
                                 {"item_weight", s.item_weight},
                                 {"click_threshold", s.click_threshold},
                                 {"max_created_at", s.max_created_at},
                                 {"exposure_temperature",
                                  s.exposure_temperature}};
  }
  if (c.csv) {
    j["dataset"]["csv"] = {{"catalog", c.csv->catalog.string()},
                           {"public", c.csv->public_users.string()},
                           {"interactions", c.csv->interactions.string()},
                           {"private", c.csv->private_users.string()}};
  }
  j["recall"] = {{"rank", c.recall.rank},
                 {"learning_rate", c.recall.learning_rate},
                 {"l2_reg", c.recall.l2_reg},
                 {"epochs", c.recall.epochs},
                 {"negative_samples_per_positive",
                  c.recall.negative_samples_per_positive}};
  j["ranking"] = {{"feature_map", to_string(c.feature_map)},
                  {"local_epochs", c.federation.rank.local_epochs},
                  {"batch_size", c.federation.rank.batch_size},
                  {"learning_rate", c.federation.rank.learning_rate},
                  {"l2_reg", c.federation.rank.l2_reg}};
  j["federation"] = {{"rounds", c.federation.rounds},
                     {"fraction", c.federation.fraction},
                     {"dropout_prob", c.federation.dropout_prob},
                     {"aggregation", to_string(c.federation.aggregation)},
                     {"early_stop_tolerance",
                      c.federation.early_stop_tolerance},
                     {"threads", c.federation.threads}};
  j["serving"] = {{"K", c.k}, {"T", c.t}};
  j["rerank"] = {{"diversity_lambda", c.rerank.diversity_lambda},
                 {"freshness_weight", c.rerank.freshness_weight},
                 {"popularity_weight", c.rerank.popularity_weight},
                 {"output_size", c.rerank.output_size}};
  j["evaluation"] = {{"holdout_per_user", c.eval.holdout_per_user},
                     {"negatives_per_positive", c.eval.negatives_per_positive},
                     {"k_values", c.eval.k_values},
                     {"primary_k", c.eval.primary_k},
                     {"delta_threshold", c.eval.delta_threshold}};
  return j;
}

}  // namespace pprsf
