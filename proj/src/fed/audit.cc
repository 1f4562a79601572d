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

#include "pprsf/fed/audit.h"

#include <map>
#include <set>

#include <json.hpp>

#include "pprsf/common/numeric.h"

namespace pprsf {

namespace {

using nlohmann::json;

enum class FieldType { kInteger, kFloat, kFloatArray, kIntegerArray, kObjectArray };

struct FieldSpec {
  FieldType type;
  // Element schema when type == kObjectArray.
  std::map<std::string, FieldType> element = {};
};

using Schema = std::map<std::string, FieldSpec>;

const Schema& schema_for(MessageKind kind) {
  static const std::map<MessageKind, Schema> kSchemas = {
      {MessageKind::kCandidatePush,
       {{"candidates",
         {FieldType::kObjectArray,
          {{"item_id", FieldType::kInteger},
           {"recall_score", FieldType::kFloat},
           {"features", FieldType::kFloatArray}}}}}},
      {MessageKind::kGlobalParamsPush,
       {{"round", {FieldType::kInteger}},
        {"weights", {FieldType::kFloatArray}}}},
      {MessageKind::kLocalUpdateUpload,
       {{"weights", {FieldType::kFloatArray}},
        {"sample_count", {FieldType::kInteger}}}},
      {MessageKind::kTopTRequest, {{"item_ids", {FieldType::kIntegerArray}}}},
      {MessageKind::kFinalListPush,
       {{"items",
         {FieldType::kObjectArray,
          {{"item_id", FieldType::kInteger},
           {"features", FieldType::kFloatArray},
           {"created_at", FieldType::kInteger},
           {"popularity", FieldType::kInteger}}}}}},
  };
  return kSchemas.at(kind);
}

bool is_integer(const json& v) {
  return v.is_number_integer() || v.is_number_unsigned();
}

// Numbers that happen to print without a fraction still count as floats.
bool is_number(const json& v) { return v.is_number(); }

bool matches(const json& v, FieldType type,
             const std::map<std::string, FieldType>& element,
             const std::string& path, std::vector<std::string>& findings);

bool matches_object(const json& obj,
                    const std::map<std::string, FieldType>& schema,
                    const std::string& path,
                    std::vector<std::string>& findings) {
  if (!obj.is_object()) {
    findings.push_back(path + ": expected an object");
    return false;
  }
  bool ok = true;
  for (const auto& [key, value] : obj.items()) {
    auto it = schema.find(key);
    if (it == schema.end()) {
      findings.push_back(path + "." + key + ": field not admitted by schema");
      ok = false;
      continue;
    }
    ok &= matches(value, it->second, {}, path + "." + key, findings);
  }
  for (const auto& [key, type] : schema) {
    if (!obj.contains(key)) {
      findings.push_back(path + "." + key + ": required field missing");
      ok = false;
    }
  }
  return ok;
}

bool matches(const json& v, FieldType type,
             const std::map<std::string, FieldType>& element,
             const std::string& path, std::vector<std::string>& findings) {
  auto bad = [&](const char* what) {
    findings.push_back(path + ": " + what);
    return false;
  };
  switch (type) {
    case FieldType::kInteger:
      return is_integer(v) ? true : bad("expected an integer");
    case FieldType::kFloat:
      return is_number(v) ? true : bad("expected a number");
    case FieldType::kFloatArray:
      if (!v.is_array()) return bad("expected an array of numbers");
      for (const auto& e : v) {
        if (!is_number(e)) return bad("expected an array of numbers");
      }
      return true;
    case FieldType::kIntegerArray:
      if (!v.is_array()) return bad("expected an array of integers");
      for (const auto& e : v) {
        if (!is_integer(e)) return bad("expected an array of integers");
      }
      return true;
    case FieldType::kObjectArray: {
      if (!v.is_array()) return bad("expected an array of objects");
      bool ok = true;
      for (std::size_t k = 0; k < v.size(); ++k) {
        ok &= matches_object(v[k], element,
                             path + "[" + std::to_string(k) + "]", findings);
      }
      return ok;
    }
  }
  return false;
}

bool matches(const json& v, const FieldSpec& spec, const std::string& path,
             std::vector<std::string>& findings) {
  return matches(v, spec.type, spec.element, path, findings);
}

void scan_numbers(const json& v, const PrivateValueIndex& index,
                  const std::string& path,
                  std::vector<std::string>& findings) {
  if (v.is_object()) {
    for (const auto& [key, child] : v.items()) {
      scan_numbers(child, index, path + "." + key, findings);
    }
  } else if (v.is_array()) {
    for (std::size_t k = 0; k < v.size(); ++k) {
      scan_numbers(v[k], index, path + "[" + std::to_string(k) + "]",
                   findings);
    }
  } else if (v.is_number_float()) {
    if (index.contains(v.get<double>())) {
      findings.push_back(path + ": value " + format_sig9(v.get<double>()) +
                         " equals a private feature value");
    }
  }
}

}  // namespace

PrivateValueIndex::PrivateValueIndex(const Dataset& dataset) {
  for (const PrivateShard& shard : dataset.private_shards()) {
    for (double v : shard.private_features) {
      if (v != 0.0) values_.insert(format_sig9(v));
    }
  }
}

bool PrivateValueIndex::contains(double value) const {
  if (value == 0.0) return false;
  return values_.count(format_sig9(value)) != 0;
}

AuditVerdict audit_canonical(std::string_view bytes,
                             const PrivateValueIndex& index) {
  AuditVerdict verdict;
  auto& findings = verdict.findings;
  if (bytes.find(PrivateMarker::kPrefix) != std::string_view::npos) {
    findings.push_back("private-scope marker present in message bytes");
  }

  json doc = json::parse(bytes.begin(), bytes.end(), nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) {
    findings.push_back("message bytes are not a canonical JSON object");
    verdict.pass = false;
    return verdict;
  }
  static const std::set<std::string> kEnvelope = {"kind", "sender",
                                                  "receiver", "payload"};
  for (const auto& [key, value] : doc.items()) {
    if (kEnvelope.count(key) == 0) {
      findings.push_back("envelope field '" + key + "' not admitted");
    }
  }
  MessageKind kind{};
  if (!doc.contains("kind") || !doc["kind"].is_string() ||
      !message_kind_from_string(doc["kind"].get<std::string>(), &kind)) {
    findings.push_back("unknown or missing message kind");
  } else if (!doc.contains("payload") || !doc["payload"].is_object()) {
    findings.push_back("missing payload object");
  } else {
    const Schema& schema = schema_for(kind);
    const json& payload = doc["payload"];
    for (const auto& [key, value] : payload.items()) {
      auto it = schema.find(key);
      if (it == schema.end()) {
        findings.push_back("payload." + key + ": field not admitted by " +
                           std::string(to_string(kind)) + " schema");
        continue;
      }
      matches(value, it->second, "payload." + key, findings);
    }
    for (const auto& [key, spec] : schema) {
      if (!payload.contains(key)) {
        findings.push_back("payload." + key + ": required field missing");
      }
    }
  }
  for (const char* key : {"sender", "receiver"}) {
    if (!doc.contains(key) || !doc[key].is_string()) {
      findings.push_back(std::string(key) + ": missing entity id");
    }
  }
  scan_numbers(doc, index, "", findings);
  verdict.pass = findings.empty();
  return verdict;
}

AuditVerdict audit_message(const Message& message,
                           const PrivateValueIndex& index) {
  return audit_canonical(canonical_bytes(message), index);
}

AuditVerdict audit_message(const Message& message, const Dataset& dataset) {
  return audit_message(message, PrivateValueIndex(dataset));
}

}  // namespace pprsf
