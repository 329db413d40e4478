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

#include <iosfwd>
#include <string>
#include <vector>

namespace qcharge::cli {

/// Wall-clock times go here, next to the reports, so that the reports
/// themselves stay byte-identical between runs.
inline constexpr const char* kTimingFile = "timing.txt";

/// Entry point of the qcharge tool; args[0] is the program name. Returns the
/// process exit status: 0 on success, 1 on a failed run, 2 on bad usage or
/// configuration.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace qcharge::cli
