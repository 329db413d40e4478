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

#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "qcharge/circuit.hpp"
#include "qcharge/model_fit.hpp"
#include "qcharge/noise_psd.hpp"
#include "qcharge/offset_tracker.hpp"
#include "qcharge/ramsey.hpp"
#include "qcharge/telegraph.hpp"

namespace qcharge::io {

inline constexpr const char* kSchema = "qcharge/1";

/// Shortest decimal that parses back to the same double.
std::string format_double(double v);
/// Strict: the whole token must be a number.
double parse_double(const std::string& s);

// ---------------------------------------------------------------- config

enum class ValueKind { number, number_list, integer, text };

struct KeySpec {
  std::string name;
  ValueKind kind = ValueKind::number;
  std::string help;
};

/// Every documented configuration key. Physical quantities carry their unit
/// as a suffix (_ghz, _hz, _s, _v, _henry); dimensionless keys have none.
const std::vector<KeySpec>& known_keys();

/// Flat key = value configuration. Unknown keys, duplicate keys and keys whose
/// unit suffix differs from the documented one are rejected.
class RunConfig {
 public:
  static RunConfig parse(const std::string& text, const std::string& origin = "<config>");
  static RunConfig load(const std::filesystem::path& path);

  void set(const std::string& key, const std::string& value);
  bool has(const std::string& key) const { return values_.count(key) != 0; }
  double number(const std::string& key) const;
  double number(const std::string& key, double fallback) const;
  long long integer(const std::string& key, long long fallback) const;
  std::vector<double> list(const std::string& key) const;
  std::string text(const std::string& key, const std::string& fallback) const;
  const std::map<std::string, std::string>& values() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
};

// ---------------------------------------------------------------- CSV

RamseyTrace load_ramsey_csv(const std::filesystem::path& path);
void write_ramsey_csv(const RamseyTrace& trace, const std::filesystem::path& path);

TelegraphTrace load_telegraph_csv(const std::filesystem::path& path);
void write_telegraph_csv(const TelegraphTrace& trace, const std::filesystem::path& path);

/// Header: t_s[,vdc_v],f_hz=<f0>,f_hz=<f1>,...  Optional leading comment lines
/// "# run=<label>" and "# drive_hz=<value>".
Spectrogram load_spectrogram_csv(const std::filesystem::path& path);
void write_spectrogram_csv(const Spectrogram& spec, const std::filesystem::path& path);

/// Header: t_s,ng,ng_err[,jump]. NaN n_g marks a gap row.
ChargeTrack load_charge_track_csv(const std::filesystem::path& path);
void write_charge_track_csv(const ChargeTrack& track, const std::filesystem::path& path);

/// Header: lower,upper,freq_ghz,parity,n_g; optional "# provenance=measured".
TransitionSet load_transitions_csv(const std::filesystem::path& path);
void write_transitions_csv(const TransitionSet& set, const std::filesystem::path& path);

/// Header: lower,upper,min_ghz,max_ghz.
FrequencyBand load_band_csv(const std::filesystem::path& path);
void write_band_csv(const FrequencyBand& band, const std::filesystem::path& path);

// ---------------------------------------------------------------- reports

using KeyValues = std::vector<std::pair<std::string, std::string>>;

struct Report {
  std::string schema = kSchema;
  std::string command;
  KeyValues inputs;
  KeyValues results;
  std::vector<std::string> warnings;

  bool operator==(const Report&) const = default;
};

std::string render_report(const Report& report);
Report parse_report(const std::string& text);
void write_report(const Report& report, const std::filesystem::path& path);
Report read_report(const std::filesystem::path& path);

/// Flattened FitReport under a key prefix, and its inverse.
void append_fit_report(KeyValues& kv, const std::string& prefix, const FitReport& fit);
FitReport extract_fit_report(const KeyValues& kv, const std::string& prefix);

/// Plain CSV with a header row and equal-length columns.
void emit_plot_data(const std::filesystem::path& path, const std::vector<std::string>& header,
                    const std::vector<std::vector<double>>& columns);

// ---------------------------------------------------------------- files

/// Writes text atomically enough for our purposes: to path, truncating.
void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

/// --out value, else $QCHARGE_OUT_DIR, else "qcharge_out".
std::filesystem::path resolve_output_dir(const std::string& cli_value);

/// Exclusive ownership of an output directory for the lifetime of the object.
class OutputLock {
 public:
  explicit OutputLock(const std::filesystem::path& dir);
  ~OutputLock();
  OutputLock(const OutputLock&) = delete;
  OutputLock& operator=(const OutputLock&) = delete;

 private:
  std::filesystem::path path_;
};

}  // namespace qcharge::io
