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

#include "pprsf/experiment/runner.h"

#include <algorithm>
#include <fstream>
#include <unordered_map>
#include <unordered_set>

#include <spdlog/spdlog.h>

#include "pprsf/common/error.h"
#include "pprsf/common/numeric.h"
#include "pprsf/common/rng.h"
#include "pprsf/core/csv_io.h"
#include "pprsf/core/synthetic.h"
#include "pprsf/ranker/client_ranker.h"
#include "pprsf/rerank/rerank.h"

namespace pprsf {

namespace {

using nlohmann::json;

// Purpose tags for derive_seed.
constexpr std::uint64_t kTagData = 1;
constexpr std::uint64_t kTagSplit = 2;
constexpr std::uint64_t kTagRecall = 3;
constexpr std::uint64_t kTagInit = 4;
constexpr std::uint64_t kTagSum = 5;
constexpr std::uint64_t kTagPublicOnly = 6;
constexpr std::uint64_t kTagFederation = 7;

class ArtifactWriter {
 public:
  ArtifactWriter(std::filesystem::path dir, bool enabled,
                 std::vector<std::filesystem::path>* written)
      : dir_(std::move(dir)), enabled_(enabled), written_(written) {
    if (enabled_) std::filesystem::create_directories(dir_);
  }

  void write(const std::string& name, const json& doc) {
    if (!enabled_) return;
    const std::filesystem::path path = dir_ / name;
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path.string());
    out << doc.dump(2) << '\n';
    written_->push_back(path);
  }

  const std::filesystem::path& dir() const { return dir_; }
  bool enabled() const { return enabled_; }

 private:
  std::filesystem::path dir_;
  bool enabled_;
  std::vector<std::filesystem::path>* written_;
};

// Runs one stage, prefixing errors with the stage name and keeping the
// exception category.
template <typename Fn>
auto stage(const char* name, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const PrivacyViolationError& e) {
    throw PrivacyViolationError(std::string(name) + ": " + e.what());
  } catch (const ConfigError& e) {
    throw ConfigError(std::string(name) + ": " + e.what());
  } catch (const Error& e) {
    throw Error(std::string(name) + ": " + e.what());
  }
}

void summarize(AuditSummary& s, const std::vector<ArchivedMessage>& messages) {
  for (const ArchivedMessage& m : messages) {
    ++s.messages;
    if (m.verdict.pass) {
      ++s.passed;
    } else {
      ++s.failed;
    }
    ++s.by_kind[std::string(to_string(m.message.kind))];
    if (is_server_bound(m.message.kind)) {
      s.bytes_up += m.message.byte_size;
    } else {
      s.bytes_down += m.message.byte_size;
    }
  }
}

json recommendations_to_json(const std::vector<UserRecommendation>& recs) {
  json arr = json::array();
  for (const UserRecommendation& r : recs) {
    arr.push_back({{"user_id", r.user_id},
                   {"cold_start", r.cold_start},
                   {"requested", r.requested},
                   {"final", r.final_ids}});
  }
  return arr;
}

Timestep serving_timestep(const Dataset& dataset) {
  Timestep now = 0;
  for (const ItemRecord& item : dataset.catalog()) {
    now = std::max(now, item.created_at);
  }
  for (const PublicUserRecord& user : dataset.public_store()) {
    for (const Interaction& e : user.interaction_log) {
      now = std::max(now, e.timestep);
    }
  }
  return now + 1;
}

void check_split_hygiene(const EvalSplit& split,
                         const std::vector<ClientState>& clients) {
  std::unordered_map<UserId, const ClientState*> by_id;
  for (const ClientState& c : clients) by_id[c.user_id] = &c;
  for (const EvalUser& u : split.users) {
    const ClientState* c = by_id.at(u.user_id);
    std::unordered_set<ItemId> held(u.positives.begin(), u.positives.end());
    for (const Interaction& e : c->own_interactions) {
      if (held.count(e.item_id) != 0) {
        throw Error("held-out item " + std::to_string(e.item_id) +
                    " of user " + std::to_string(u.user_id) +
                    " leaked into training");
      }
    }
    for (const Interaction& e : split.train.user(u.user_id).interaction_log) {
      if (held.count(e.item_id) != 0) {
        throw Error("held-out item " + std::to_string(e.item_id) +
                    " of user " + std::to_string(u.user_id) +
                    " is in the training dataset");
      }
    }
  }
}

}  // namespace

ExitCode exit_code_for(const std::exception& e) {
  if (dynamic_cast<const PrivacyViolationError*>(&e) != nullptr) {
    return ExitCode::kAudit;
  }
  if (dynamic_cast<const ConfigError*>(&e) != nullptr) {
    return ExitCode::kConfig;
  }
  return ExitCode::kRuntime;
}

std::size_t full_catalog_push_bytes(const RecallModel& model, UserId user_id,
                                    const PublicData& data) {
  CandidateSet all =
      recall_top_k(model, user_id, data, data.catalog().size(), false);
  return make_message(std::string(kServerEntity), client_entity(user_id),
                      CandidatePushPayload{std::move(all.items)})
      .byte_size;
}

json rounds_to_json(const std::vector<RoundLog>& rounds) {
  json arr = json::array();
  for (const RoundLog& r : rounds) {
    json messages = json::array();
    for (const ArchivedMessage& m : r.messages) {
      messages.push_back({{"kind", to_string(m.message.kind)},
                          {"sender", m.message.sender},
                          {"receiver", m.message.receiver},
                          {"byte_size", m.message.byte_size},
                          {"audit_pass", m.verdict.pass}});
    }
    arr.push_back({{"round", r.round_index},
                   {"sampled_clients", r.sampled_clients},
                   {"participating_clients", r.participating_clients},
                   {"bytes_up", r.bytes_up},
                   {"bytes_down", r.bytes_down},
                   {"void", r.void_round},
                   {"global_norm", l2_norm(r.global_params_after.weights)},
                   {"messages", std::move(messages)}});
  }
  return arr;
}

json to_json(const AuditSummary& s) {
  return {{"messages", s.messages}, {"passed", s.passed},
          {"failed", s.failed},     {"by_kind", s.by_kind},
          {"bytes_up", s.bytes_up}, {"bytes_down", s.bytes_down}};
}

ExperimentResult run_experiment(const ExperimentConfig& input,
                                const RunOptions& options) {
  ExperimentResult result;
  ExperimentConfig& cfg = result.config;
  cfg = input;
  if (options.seed) cfg.seed = *options.seed;
  if (options.threads) cfg.federation.threads = *options.threads;
  if (options.output_dir) cfg.output_dir = *options.output_dir;

  ArtifactWriter out(cfg.output_dir, options.write_artifacts,
                     &result.artifacts);
  const char* current = "config";
  try {
    const ConfigValidation checked = parse_config(to_json(cfg));
    if (!checked.ok()) {
      std::string message = "invalid config:";
      for (const std::string& v : checked.violations) message += " " + v + ";";
      throw ConfigError(message);
    }
    out.write("config.json", to_json(cfg));

    current = "data";
    result.dataset = stage(current, [&] {
      if (cfg.csv) return load_dataset(*cfg.csv);
      if (!cfg.synthetic) throw ConfigError("no dataset source configured");
      return generate_synthetic(*cfg.synthetic,
                                derive_seed(cfg.seed, {kTagData}));
    });
    const std::size_t num_items = result.dataset.catalog().size();
    if (cfg.k >= num_items) {
      throw ConfigError("serving.K=" + std::to_string(cfg.k) +
                        " must be below the catalog size " +
                        std::to_string(num_items));
    }

    current = "split";
    result.split = stage(current, [&] {
      return make_split(result.dataset, cfg.eval.holdout_per_user,
                        cfg.eval.negatives_per_positive,
                        derive_seed(cfg.seed, {kTagSplit}));
    });
    const Dataset& train = result.split.train;
    const PublicData& server_view = train.server_view();

    current = "recall";
    result.recall = stage(current, [&] {
      return train_recall(server_view, cfg.recall,
                          derive_seed(cfg.seed, {kTagRecall}));
    });
    if (out.enabled()) {
      save_recall_model(result.recall, out.dir() / "recall_model.json");
      result.artifacts.push_back(out.dir() / "recall_model.json");
    }

    current = "federation";
    const PrivateValueIndex index(result.dataset);
    stage(current, [&] {
      std::vector<CandidateSet> candidates;
      for (const PublicUserRecord& user : train.public_store()) {
        candidates.push_back(
            recall_top_k(result.recall, user.user_id, server_view, cfg.k, false));
        result.clients.push_back(ClientState::from_dataset(
            train, user.user_id, cfg.feature_map,
            client_seed(cfg.seed, user.user_id)));
      }
      const std::size_t d = result.clients.front().param_dimension();
      result.initial_params = init_global(d, derive_seed(cfg.seed, {kTagInit}));
      ServerState server{result.initial_params, 0, false};
      FedConfig fed = cfg.federation;
      fed.seed = derive_seed(cfg.seed, {kTagFederation});
      result.rounds =
          run_federation(server, result.clients, candidates, fed, index);
      result.global_params = server.global;
      return 0;
    });
    out.write("rounds.json", rounds_to_json(result.rounds));
    check_split_hygiene(result.split, result.clients);

    current = "serving";
    stage(current, [&] {
      MessageArchive archive(index);
      const Timestep now = serving_timestep(train);
      const std::string server = std::string(kServerEntity);
      double candidate_bytes = 0.0;
      double full_bytes = 0.0;
      std::size_t pushes = 0;
      for (const ClientState& trained : result.clients) {
        UserRecommendation rec;
        rec.user_id = trained.user_id;
        const std::string client = client_entity(trained.user_id);
        CandidateSet serving = recall_top_k(result.recall, trained.user_id,
                                            server_view, cfg.k, true);
        if (trained.own_interactions.empty() || serving.size() < 2) {
          rec.cold_start = true;
          FinalListPushPayload list =
              cold_start_list(trained.user_id, server_view, cfg.rerank, now);
          rec.final_ids = list.item_ids();
          archive.post(make_message(server, client, std::move(list)));
          result.recommendations.push_back(std::move(rec));
          continue;
        }
        ClientState state = trained;
        state.candidates = serving;
        const Message& push = archive.post(make_message(
            server, client, CandidatePushPayload{serving.items}));
        candidate_bytes += static_cast<double>(push.byte_size);
        full_bytes += static_cast<double>(
            full_catalog_push_bytes(result.recall, trained.user_id, server_view));
        ++pushes;
        archive.post(make_message(
            server, client,
            GlobalParamsPushPayload{result.rounds.size() + 1,
                                    result.global_params}));
        const RankedList ranked = local_rank(result.global_params, state);
        TopTRequestPayload request = select_top_t(ranked, cfg.t);
        rec.requested = request.item_ids;
        archive.post(make_message(client, server, request));
        FinalListPushPayload list =
            apply_policy(request, server_view, cfg.rerank, now);
        rec.final_ids = list.item_ids();
        archive.post(make_message(server, client, std::move(list)));
        result.recommendations.push_back(std::move(rec));
      }
      if (pushes > 0) {
        result.communication.mean_candidate_push_bytes =
            candidate_bytes / static_cast<double>(pushes);
        result.communication.mean_full_catalog_push_bytes =
            full_bytes / static_cast<double>(pushes);
        result.communication.ratio = candidate_bytes / full_bytes;
      }
      result.serving_messages = archive.take();
      return 0;
    });
    for (const RoundLog& r : result.rounds) summarize(result.audit, r.messages);
    summarize(result.audit, result.serving_messages);
    json audit_doc = to_json(result.audit);
    audit_doc["communication"] = {
        {"mean_candidate_push_bytes",
         result.communication.mean_candidate_push_bytes},
        {"mean_full_catalog_push_bytes",
         result.communication.mean_full_catalog_push_bytes},
        {"ratio", result.communication.ratio},
        {"k_over_m", static_cast<double>(cfg.k) /
                         static_cast<double>(num_items)}};
    out.write("audit_summary.json", audit_doc);
    out.write("recommendations.json",
              recommendations_to_json(result.recommendations));

    current = "evaluation";
    stage(current, [&] {
      const std::size_t rounds_done = result.rounds.size();
      const RankHyper& hyper = cfg.federation.rank;
      const std::size_t epochs = rounds_done * hyper.local_epochs;
      const RankingParams sum = train_centralized_sum(
          result.clients, hyper, epochs, result.initial_params,
          derive_seed(cfg.seed, {kTagSum}));
      const RankingParams public_only = train_centralized(
          result.clients, hyper, epochs, result.initial_params,
          derive_seed(cfg.seed, {kTagPublicOnly}), false);
      std::unordered_map<UserId, RankingParams> locals;
      for (const ClientState& c : result.clients) {
        locals.emplace(c.user_id, train_local_only(c, hyper, rounds_done,
                                                   result.initial_params));
      }
      const auto& ks = cfg.eval.k_values;
      const std::size_t pk = cfg.eval.primary_k;
      result.fl = evaluate_system(
          "FL",
          make_model_system(result.global_params, train, cfg.feature_map, true),
          result.split, ks, pk);
      result.sum = evaluate_system(
          "Sum", make_model_system(sum, train, cfg.feature_map, true),
          result.split, ks, pk);
      result.public_only = evaluate_system(
          "PublicOnly",
          make_model_system(public_only, train, cfg.feature_map, false),
          result.split, ks, pk);
      result.local = evaluate_system(
          "Local",
          make_per_user_system(std::move(locals), train, cfg.feature_map),
          result.split, ks, pk);
      result.verdict = delta_precision_report(
          result.sum, result.fl, std::span<const MetricsReport>(&result.local, 1),
          cfg.eval.delta_threshold, &result.public_only);
      return 0;
    });
    out.write("metrics_fl.json", to_json(result.fl));
    out.write("metrics_sum.json", to_json(result.sum));
    out.write("metrics_public_only.json", to_json(result.public_only));
    out.write("metrics_local.json", to_json(result.local));
    out.write("verdict.json", to_json(result.verdict));

    if (options.enforce_delta && !result.verdict.delta_pass) {
      result.exit_code = ExitCode::kDelta;
    }
    json summary = {
        {"seed", cfg.seed},
        {"split_fingerprint", result.split.fingerprint},
        {"rounds_completed", result.rounds.size()},
        {"primary_metric", result.verdict.primary_metric},
        {"p_sum", result.verdict.p_sum},
        {"p_fl", result.verdict.p_fl},
        {"p_public_only", result.public_only.primary()},
        {"mean_local", result.verdict.mean_local},
        {"delta_threshold", result.verdict.delta_threshold},
        {"delta_pass", result.verdict.delta_pass},
        {"audit_failures", result.audit.failed},
        {"exit_code", static_cast<int>(result.exit_code)}};
    json files = json::array();
    for (const auto& path : result.artifacts) files.push_back(path.filename().string());
    files.push_back("summary.json");
    summary["artifacts"] = files;
    out.write("summary.json", summary);
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    try {
      out.write("error.json",
                {{"stage", current},
                 {"message", e.what()},
                 {"exit_code", static_cast<int>(exit_code_for(e))}});
    } catch (const std::exception&) {
    }
    throw;
  }
  return result;
}

}  // namespace pprsf
