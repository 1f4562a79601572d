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

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace pprsf {

// Shortest decimal with 17 significant digits; parses back to the same bits.
std::string format_exact(double value);

// 9 significant digits: the resolution at which the privacy audit compares
// serialized numbers against private feature values.
std::string format_sig9(double value);

double dot(std::span<const double> a, std::span<const double> b);

double logistic(double z);

bool all_finite(std::span<const double> values);

double max_abs_diff(std::span<const double> a, std::span<const double> b);

double l2_norm(std::span<const double> values);

// 64-bit FNV-1a, used for fingerprints and tamper-evident tags.
std::uint64_t fnv1a64(std::string_view bytes,
                      std::uint64_t seed = 0xcbf29ce484222325ULL);

std::string to_hex(std::uint64_t value);

}  // namespace pprsf
