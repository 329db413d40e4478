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
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "qcharge/circuit.hpp"
#include "qcharge/io.hpp"

namespace qcharge::cli {

using Timings = std::vector<std::pair<std::string, double>>;

struct Context {
  std::string command;
  io::RunConfig config;
  std::filesystem::path out_dir;
  /// Relative input paths in the config resolve against this (empty = cwd).
  std::filesystem::path base_dir;
  std::uint64_t seed = 0;
  unsigned threads = 0;
  io::Report report;
  Timings* timings = nullptr;

  void put(const std::string& key, double v);
  void put(const std::string& key, const std::string& v);
  void put(const std::string& key, const char* v) { put(key, std::string(v)); }
  void put(const std::string& key, bool v) { put(key, std::string(v ? "true" : "false")); }
  void put(const std::string& key, int v) { put(key, std::to_string(v)); }
  void put(const std::string& key, const std::vector<double>& v);
  void warn(const std::string& w) { report.warnings.push_back(w); }
  std::filesystem::path path(const std::string& name) const { return out_dir / name; }
  /// Path held by a required *_csv key.
  std::filesystem::path input(const std::string& key) const;
};

using CommandFn = void (*)(Context&);

struct CommandInfo {
  const char* name;
  const char* help;
  CommandFn fn;
};

const std::vector<CommandInfo>& commands();

/// Runs one command in ctx.out_dir and writes <command>.report there.
void execute(Context& ctx, CommandFn fn);

// Shared by the commands.
CircuitParams circuit_params(const io::RunConfig& cfg);
SolverConfig solver_config(const io::RunConfig& cfg);

void cmd_spectrum(Context&);
void cmd_dispersion(Context&);
void cmd_fit_harmonics(Context&);
void cmd_el_sweep(Context&);
void cmd_bound(Context&);
void cmd_series_l(Context&);
void cmd_ramsey_sim(Context&);
void cmd_ramsey_analyze(Context&);
void cmd_parity_sim(Context&);
void cmd_parity_fit(Context&);
void cmd_vdc_fit(Context&);
void cmd_track(Context&);
void cmd_psd(Context&);
void cmd_repro(Context&);

}  // namespace qcharge::cli
