// Copyright 2026 The qcharge Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace qcharge {

/// Derives an independent stream seed from a master seed and a fixed label, so
/// that adding a consumer never perturbs the numbers another consumer sees.
std::uint64_t stream_seed(std::uint64_t master, std::string_view label);

inline std::mt19937_64 make_stream(std::uint64_t master, std::string_view label) {
  return std::mt19937_64(stream_seed(master, label));
}

}  // namespace qcharge
