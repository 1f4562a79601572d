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

#pragma once

#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "pprsf/core/dataset.h"
#include "pprsf/fed/message.h"

namespace pprsf {

// Every private feature value of every user, keyed by its 9-significant-digit
// decimal form. Zero is left out: it is also the value of untouched
// parameters and of the public-only zero block, so a match on it carries no
// information.
class PrivateValueIndex {
 public:
  PrivateValueIndex() = default;
  explicit PrivateValueIndex(const Dataset& dataset);

  bool contains(double value) const;
  std::size_t size() const { return values_.size(); }

 private:
  std::unordered_set<std::string> values_;
};

struct AuditVerdict {
  bool pass = true;
  std::vector<std::string> findings;  // empty on pass
};

// Pass iff the message parses, its payload matches the kind's schema exactly
// (no extra fields, item-id lists hold integers only), no private-scope
// marker appears anywhere in the bytes, and no floating-point number in the
// message equals a private feature value at 9 significant digits.
AuditVerdict audit_canonical(std::string_view bytes,
                             const PrivateValueIndex& index);
AuditVerdict audit_message(const Message& message,
                           const PrivateValueIndex& index);
AuditVerdict audit_message(const Message& message, const Dataset& dataset);

}  // namespace pprsf
