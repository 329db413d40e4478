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

#include "qcharge/io.hpp"

#include <cerrno>
#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "qcharge/error.hpp"

namespace qcharge::io {

namespace fs = std::filesystem;

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  if (res.ec != std::errc()) throw IoError("cannot format number");
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& s) {
  double v = 0.0;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  if (first != last && *first == '+') ++first;
  const auto res = std::from_chars(first, last, v);
  if (res.ec != std::errc() || res.ptr != last || first == last)
    throw IoError("not a number: '" + s + "'");
  return v;
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(s);
  while (std::getline(is, cur, sep)) out.push_back(trim(cur));
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

std::string join_numbers(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ',';
    out += format_double(v[i]);
  }
  return out;
}

std::vector<double> parse_numbers(const std::string& s) {
  std::vector<double> out;
  if (trim(s).empty()) return out;
  for (const auto& tok : split(s, ',')) out.push_back(parse_double(tok));
  return out;
}

const std::vector<std::string>& unit_suffixes() {
  static const std::vector<std::string> s = {"_e2_per_hz", "_henry", "_ghz", "_mhz", "_khz", "_hz",
                                             "_uh",        "_nh",    "_ph",  "_us",  "_ms",  "_ns",
                                             "_s",         "_v",     "_mv"};
  return s;
}

std::string stem(const std::string& key) {
  for (const auto& suf : unit_suffixes())
    if (key.size() > suf.size() && key.compare(key.size() - suf.size(), suf.size(), suf) == 0)
      return key.substr(0, key.size() - suf.size());
  return key;
}

const KeySpec* find_key(const std::string& name) {
  for (const auto& k : known_keys())
    if (k.name == name) return &k;
  return nullptr;
}

// ---- CSV reading

struct CsvTable {
  std::map<std::string, std::string> meta;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<int> line_no;
  std::string origin;

  [[noreturn]] void fail(std::size_t row, const std::string& what) const {
    std::ostringstream os;
    os << origin << ":" << (row < line_no.size() ? line_no[row] : 0) << ": " << what;
    throw IoError(os.str());
  }
  double number(std::size_t row, std::size_t col) const {
    try {
      return parse_double(rows[row][col]);
    } catch (const IoError& e) {
      fail(row, std::string("column '") + header[col] + "': " + e.what());
    }
  }
};

CsvTable read_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  CsvTable t;
  t.origin = path.string();
  std::string line;
  int no = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++no;
    const std::string s = trim(line);
    if (s.empty()) continue;
    if (s[0] == '#') {
      if (have_header) continue;
      const std::string body = trim(s.substr(1));
      const auto eq = body.find('=');
      if (eq != std::string::npos) t.meta[trim(body.substr(0, eq))] = trim(body.substr(eq + 1));
      continue;
    }
    auto cells = split(s, ',');
    if (!have_header) {
      t.header = cells;
      have_header = true;
      continue;
    }
    if (cells.size() != t.header.size()) {
      std::ostringstream os;
      os << t.origin << ":" << no << ": expected " << t.header.size() << " columns, found "
         << cells.size();
      throw IoError(os.str());
    }
    t.rows.push_back(std::move(cells));
    t.line_no.push_back(no);
  }
  if (!have_header) throw IoError(t.origin + ": missing header row");
  return t;
}

void expect_header(const CsvTable& t, const std::vector<std::string>& want,
                   const std::vector<std::string>& optional = {}) {
  bool ok = t.header.size() >= want.size() && t.header.size() <= want.size() + optional.size();
  for (std::size_t i = 0; ok && i < t.header.size(); ++i) {
    const std::string& expect = i < want.size() ? want[i] : optional[i - want.size()];
    ok = t.header[i] == expect;
  }
  if (!ok) {
    std::string w;
    for (const auto& h : want) w += (w.empty() ? "" : ",") + h;
    throw IoError(t.origin + ": schema mismatch, expected header '" + w + "'");
  }
}

void check_increasing(const CsvTable& t, const std::vector<double>& v, bool strict) {
  for (std::size_t i = 1; i < v.size(); ++i)
    if (strict ? !(v[i] > v[i - 1]) : v[i] < v[i - 1])
      t.fail(i, strict ? "time column must be strictly increasing" : "time column must not decrease");
}

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  return out;
}

void finish(std::ofstream& out, const fs::path& path) {
  out.flush();
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

std::string escape(const std::string& s) {
  std::string o;
  for (char c : s) {
    if (c == '\\') o += "\\\\";
    else if (c == '\n') o += "\\n";
    else o += c;
  }
  return o;
}

std::string unescape(const std::string& s) {
  std::string o;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '\\' && i + 1 < s.size()) {
      ++i;
      o += s[i] == 'n' ? '\n' : s[i];
    } else {
      o += s[i];
    }
  }
  return o;
}

}  // namespace

// ---------------------------------------------------------------- config

const std::vector<KeySpec>& known_keys() {
  using K = ValueKind;
  static const std::vector<KeySpec> keys = {
      {"seed", K::integer, "master seed for all random streams"},
      {"e_c_ghz", K::number, "charging energy E_C/h"},
      {"e_j_ghz", K::number_list, "Josephson harmonics E_J1..E_JN /h"},
      {"e_l_ghz", K::number, "inductive energy E_L/h"},
      {"l_henry", K::number, "shunt inductance (alternative to e_l_ghz)"},
      {"n_g", K::number, "charge offset in Cooper pairs"},
      {"parity", K::text, "even or odd"},
      {"phi_ext", K::number, "reduced external flux (rad)"},
      {"charge_cutoff", K::integer, "charge basis half-width N_c"},
      {"osc_dim", K::integer, "oscillator basis size M"},
      {"conv_tol", K::number, "relative convergence tolerance"},
      {"n_levels", K::integer, "number of levels"},
      {"order", K::integer, "harmonic order N of the fit"},
      {"measured_csv", K::text, "transition set to fit"},
      {"band_csv", K::text, "frequency band"},
      {"e_l_grid_ghz", K::number_list, "explicit E_L grid"},
      {"e_l_min_ghz", K::number, "E_L grid start"},
      {"e_l_max_ghz", K::number, "E_L grid end"},
      {"e_l_points", K::integer, "E_L grid size"},
      {"f01_ghz", K::number, "0-1 transition frequency"},
      {"shift_ghz", K::number, "observed frequency shift"},
      {"e_j2_ghz", K::number, "second harmonic E_J2/h"},
      {"f1_hz", K::number, "first Ramsey frequency"},
      {"f2_hz", K::number, "second Ramsey frequency"},
      {"t2_s", K::number, "Ramsey decay time"},
      {"w1", K::number, "weight of the first cosine"},
      {"w2", K::number, "weight of the second cosine"},
      {"tau_step_s", K::number, "Ramsey delay step"},
      {"n_tau", K::integer, "number of Ramsey delays"},
      {"noise_sigma", K::number, "Gaussian noise (signal units)"},
      {"pad_factor", K::integer, "FFT zero padding"},
      {"drive_hz", K::number, "Ramsey drive frequency"},
      {"delta_f_hz", K::number, "charge dispersion of the probed transition"},
      {"level", K::integer, "lower level of the probed transition"},
      {"trace_csv", K::text, "input trace"},
      {"gamma_ps_hz", K::number, "parity switching rate"},
      {"p_even", K::number, "stationary even occupancy"},
      {"i_even", K::number, "even-parity signal level"},
      {"i_odd", K::number, "odd-parity signal level"},
      {"interval_s", K::number, "mean repetition interval"},
      {"n_samples", K::integer, "number of samples"},
      {"jitter", K::number, "interval jitter fraction"},
      {"max_lag_s", K::number, "largest autocorrelation lag"},
      {"spectrogram_csv", K::text, "input spectrogram"},
      {"n_peaks", K::integer, "peaks per spectrogram row"},
      {"track_csv", K::text, "input charge track"},
      {"dt_s", K::number, "charge track sampling step"},
      {"step_sigma", K::number, "random-walk step in Cooper pairs"},
      {"target_e2_per_hz", K::number, "PSD calibration target"},
      {"f_ref_hz", K::number, "PSD reference frequency"},
      {"fit_lo_hz", K::number, "power-law fit start"},
      {"fit_hi_hz", K::number, "power-law fit end"},
      {"segments", K::integer, "PSD segments"},
      {"reference_a_e2_per_hz", K::number, "comparison line amplitude at f_ref"},
      {"reference_b_e2_per_hz", K::number, "comparison line amplitude at f_ref"},
      {"run", K::text, "run label"},
  };
  return keys;
}

RunConfig RunConfig::parse(const std::string& text, const std::string& origin) {
  RunConfig cfg;
  std::istringstream is(text);
  std::string line;
  int no = 0;
  while (std::getline(is, line)) {
    ++no;
    std::string s = line;
    const auto hash = s.find('#');
    if (hash != std::string::npos) s = s.substr(0, hash);
    s = trim(s);
    if (s.empty()) continue;
    const auto eq = s.find('=');
    std::ostringstream where;
    where << origin << ":" << no << ": ";
    if (eq == std::string::npos) throw IoError(where.str() + "expected 'key = value'");
    const std::string key = trim(s.substr(0, eq));
    const std::string value = trim(s.substr(eq + 1));
    if (cfg.has(key)) throw IoError(where.str() + "duplicate key '" + key + "'");
    try {
      cfg.set(key, value);
    } catch (const IoError& e) {
      throw IoError(where.str() + e.what());
    }
  }
  return cfg;
}

RunConfig RunConfig::load(const fs::path& path) { return parse(read_text(path), path.string()); }

void RunConfig::set(const std::string& key, const std::string& value) {
  const KeySpec* spec = find_key(key);
  if (!spec) {
    const std::string st = stem(key);
    for (const auto& k : known_keys())
      if (stem(k.name) == st && k.name != st)
        throw IoError("unit mismatch for '" + key + "': this quantity is given as '" + k.name + "'");
    throw IoError("unknown key '" + key + "'");
  }
  switch (spec->kind) {
    case ValueKind::number:
      parse_double(value);
      break;
    case ValueKind::number_list:
      if (parse_numbers(value).empty()) throw IoError("'" + key + "' needs at least one number");
      break;
    case ValueKind::integer: {
      long long v = 0;
      const auto res = std::from_chars(value.data(), value.data() + value.size(), v);
      if (res.ec != std::errc() || res.ptr != value.data() + value.size() || value.empty())
        throw IoError("'" + key + "' needs an integer, got '" + value + "'");
      break;
    }
    case ValueKind::text:
      if (value.empty()) throw IoError("'" + key + "' is empty");
      break;
  }
  values_[key] = value;
}

double RunConfig::number(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) throw IoError("missing required key '" + key + "'");
  return parse_double(it->second);
}

double RunConfig::number(const std::string& key, double fallback) const {
  return has(key) ? number(key) : fallback;
}

long long RunConfig::integer(const std::string& key, long long fallback) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  return std::stoll(it->second);
}

std::vector<double> RunConfig::list(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) throw IoError("missing required key '" + key + "'");
  return parse_numbers(it->second);
}

std::string RunConfig::text(const std::string& key, const std::string& fallback) const {
  const auto it = values_.find(key);
  return it == values_.end() ? fallback : it->second;
}

// ---------------------------------------------------------------- CSV

RamseyTrace load_ramsey_csv(const fs::path& path) {
  const CsvTable t = read_csv(path);
  expect_header(t, {"tau_s", "I"});
  RamseyTrace tr;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    tr.tau_s.push_back(t.number(r, 0));
    tr.i_quadrature.push_back(t.number(r, 1));
  }
  if (tr.tau_s.empty()) throw IoError(t.origin + ": no data rows");
  check_increasing(t, tr.tau_s, true);
  if (t.meta.count("repetitions")) tr.repetitions = std::stoi(t.meta.at("repetitions"));
  return tr;
}

void write_ramsey_csv(const RamseyTrace& trace, const fs::path& path) {
  auto out = open_out(path);
  out << "# repetitions=" << trace.repetitions << "\n";
  out << "tau_s,I\n";
  for (std::size_t i = 0; i < trace.tau_s.size(); ++i)
    out << format_double(trace.tau_s[i]) << ',' << format_double(trace.i_quadrature[i]) << '\n';
  finish(out, path);
}

TelegraphTrace load_telegraph_csv(const fs::path& path) {
  const CsvTable t = read_csv(path);
  expect_header(t, {"t_s", "I"});
  TelegraphTrace tr;
  tr.t_s.reserve(t.rows.size());
  tr.values.reserve(t.rows.size());
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    tr.t_s.push_back(t.number(r, 0));
    tr.values.push_back(t.number(r, 1));
  }
  if (tr.t_s.size() < 2) throw IoError(t.origin + ": need at least two rows");
  check_increasing(t, tr.t_s, true);
  if (t.meta.count("mean_interval_s")) tr.mean_interval_s = parse_double(t.meta.at("mean_interval_s"));
  return tr;
}

void write_telegraph_csv(const TelegraphTrace& trace, const fs::path& path) {
  auto out = open_out(path);
  if (trace.mean_interval_s > 0.0) out << "# mean_interval_s=" << format_double(trace.mean_interval_s) << "\n";
  out << "t_s,I\n";
  for (std::size_t i = 0; i < trace.t_s.size(); ++i)
    out << format_double(trace.t_s[i]) << ',' << format_double(trace.values[i]) << '\n';
  finish(out, path);
}

Spectrogram load_spectrogram_csv(const fs::path& path) {
  const CsvTable t = read_csv(path);
  if (t.header.empty() || t.header[0] != "t_s")
    throw IoError(t.origin + ": schema mismatch, spectrogram header must start with 't_s'");
  Spectrogram s;
  const bool has_v = t.header.size() > 1 && t.header[1] == "vdc_v";
  const std::size_t first = has_v ? 2 : 1;
  for (std::size_t c = first; c < t.header.size(); ++c) {
    const std::string& h = t.header[c];
    if (h.rfind("f_hz=", 0) != 0)
      throw IoError(t.origin + ": schema mismatch, frequency columns must be 'f_hz=<value>'");
    s.freq_hz.push_back(parse_double(h.substr(5)));
  }
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    s.times_s.push_back(t.number(r, 0));
    if (has_v) s.vdc_v.push_back(t.number(r, 1));
    std::vector<double> row;
    for (std::size_t c = first; c < t.header.size(); ++c) row.push_back(t.number(r, c));
    s.rows.push_back(std::move(row));
  }
  check_increasing(t, s.times_s, false);
  if (t.meta.count("run")) s.run_label = t.meta.at("run");
  if (t.meta.count("drive_hz")) s.drive_hz = parse_double(t.meta.at("drive_hz"));
  s.validate();
  return s;
}

void write_spectrogram_csv(const Spectrogram& spec, const fs::path& path) {
  spec.validate();
  auto out = open_out(path);
  if (!spec.run_label.empty()) out << "# run=" << spec.run_label << "\n";
  if (spec.drive_hz > 0.0) out << "# drive_hz=" << format_double(spec.drive_hz) << "\n";
  out << "t_s";
  if (!spec.vdc_v.empty()) out << ",vdc_v";
  for (double f : spec.freq_hz) out << ",f_hz=" << format_double(f);
  out << '\n';
  for (std::size_t r = 0; r < spec.rows.size(); ++r) {
    out << format_double(spec.times_s[r]);
    if (!spec.vdc_v.empty()) out << ',' << format_double(spec.vdc_v[r]);
    for (double v : spec.rows[r]) out << ',' << format_double(v);
    out << '\n';
  }
  finish(out, path);
}

ChargeTrack load_charge_track_csv(const fs::path& path) {
  const CsvTable t = read_csv(path);
  expect_header(t, {"t_s", "ng", "ng_err"}, {"jump"});
  ChargeTrack tr;
  const bool has_jump = t.header.size() == 4;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    tr.t_s.push_back(t.number(r, 0));
    tr.ng.push_back(t.number(r, 1));
    tr.ng_err.push_back(t.number(r, 2));
    tr.jump.push_back(has_jump ? static_cast<std::uint8_t>(t.number(r, 3) != 0.0) : 0);
  }
  check_increasing(t, tr.t_s, true);
  try {
    tr.validate();
  } catch (const InvalidArgument& e) {
    throw IoError(t.origin + ": " + e.what());
  }
  return tr;
}

void write_charge_track_csv(const ChargeTrack& track, const fs::path& path) {
  auto out = open_out(path);
  out << "t_s,ng,ng_err,jump\n";
  for (std::size_t i = 0; i < track.t_s.size(); ++i)
    out << format_double(track.t_s[i]) << ',' << format_double(track.ng[i]) << ','
        << format_double(track.ng_err[i]) << ',' << (i < track.jump.size() && track.jump[i] ? 1 : 0)
        << '\n';
  finish(out, path);
}

TransitionSet load_transitions_csv(const fs::path& path) {
  const CsvTable t = read_csv(path);
  expect_header(t, {"lower", "upper", "freq_ghz", "parity", "n_g"});
  TransitionSet set;
  set.provenance = Provenance::measured;
  if (t.meta.count("provenance")) {
    const auto& p = t.meta.at("provenance");
    if (p == "predicted") set.provenance = Provenance::predicted;
    else if (p != "measured") throw IoError(t.origin + ": provenance must be measured or predicted");
  }
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    Transition tr;
    const double lo = t.number(r, 0), up = t.number(r, 1);
    if (lo != std::floor(lo) || up != std::floor(up)) t.fail(r, "level indices must be integers");
    tr.lower = static_cast<int>(lo);
    tr.upper = static_cast<int>(up);
    tr.freq_ghz = t.number(r, 2);
    try {
      tr.parity = parse_parity(t.rows[r][3]);
    } catch (const InvalidArgument& e) {
      t.fail(r, e.what());
    }
    tr.n_g = t.number(r, 4);
    set.entries.push_back(tr);
  }
  try {
    set.validate();
  } catch (const InvalidArgument& e) {
    throw IoError(t.origin + ": " + e.what());
  }
  return set;
}

void write_transitions_csv(const TransitionSet& set, const fs::path& path) {
  auto out = open_out(path);
  out << "# provenance=" << (set.provenance == Provenance::measured ? "measured" : "predicted") << "\n";
  out << "lower,upper,freq_ghz,parity,n_g\n";
  for (const auto& t : set.entries)
    out << t.lower << ',' << t.upper << ',' << format_double(t.freq_ghz) << ',' << to_string(t.parity)
        << ',' << format_double(t.n_g) << '\n';
  finish(out, path);
}

FrequencyBand load_band_csv(const fs::path& path) {
  const CsvTable t = read_csv(path);
  expect_header(t, {"lower", "upper", "min_ghz", "max_ghz"});
  FrequencyBand band;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    band.intervals.push_back({static_cast<int>(t.number(r, 0)), static_cast<int>(t.number(r, 1)),
                              t.number(r, 2), t.number(r, 3)});
  }
  try {
    band.validate();
  } catch (const InvalidArgument& e) {
    throw IoError(t.origin + ": " + e.what());
  }
  return band;
}

void write_band_csv(const FrequencyBand& band, const fs::path& path) {
  auto out = open_out(path);
  out << "lower,upper,min_ghz,max_ghz\n";
  for (const auto& iv : band.intervals)
    out << iv.lower << ',' << iv.upper << ',' << format_double(iv.min_ghz) << ','
        << format_double(iv.max_ghz) << '\n';
  finish(out, path);
}

// ---------------------------------------------------------------- reports

std::string render_report(const Report& r) {
  if (r.schema.empty()) throw IoError("report schema tag is mandatory");
  std::ostringstream os;
  os << "schema = " << r.schema << "\n";
  os << "command = " << escape(r.command) << "\n";
  os << "[inputs]\n";
  for (const auto& [k, v] : r.inputs) os << k << " = " << escape(v) << "\n";
  os << "[results]\n";
  for (const auto& [k, v] : r.results) os << k << " = " << escape(v) << "\n";
  os << "[warnings]\n";
  os << "count = " << r.warnings.size() << "\n";
  for (const auto& w : r.warnings) os << "warning = " << escape(w) << "\n";
  return os.str();
}

Report parse_report(const std::string& text) {
  Report r;
  r.schema.clear();
  std::istringstream is(text);
  std::string line, section;
  std::size_t declared = 0;
  bool have_count = false;
  int no = 0;
  while (std::getline(is, line)) {
    ++no;
    if (line.empty()) continue;
    if (line.front() == '[' && line.back() == ']') {
      section = line.substr(1, line.size() - 2);
      if (section != "inputs" && section != "results" && section != "warnings")
        throw IoError("report line " + std::to_string(no) + ": unknown section '" + section + "'");
      continue;
    }
    const auto eq = line.find(" = ");
    if (eq == std::string::npos) {
      // "key =" with an empty value.
      if (line.size() >= 2 && line.compare(line.size() - 2, 2, " =") == 0) {
        line += " ";
      } else {
        throw IoError("report line " + std::to_string(no) + ": expected 'key = value'");
      }
    }
    const auto pos = line.find(" = ");
    const std::string key = line.substr(0, pos);
    const std::string value = unescape(line.substr(pos + 3));
    if (section.empty()) {
      if (key == "schema") r.schema = value;
      else if (key == "command") r.command = value;
      else throw IoError("report line " + std::to_string(no) + ": unexpected key '" + key + "'");
    } else if (section == "inputs") {
      r.inputs.emplace_back(key, value);
    } else if (section == "results") {
      r.results.emplace_back(key, value);
    } else if (key == "count") {
      declared = std::stoul(value);
      have_count = true;
    } else if (key == "warning") {
      r.warnings.push_back(value);
    }
  }
  if (r.schema.empty()) throw IoError("report without schema tag");
  if (r.schema != kSchema) throw IoError("unsupported report schema '" + r.schema + "'");
  if (!have_count || declared != r.warnings.size()) throw IoError("report warnings section is inconsistent");
  return r;
}

void write_report(const Report& report, const fs::path& path) { write_text(path, render_report(report)); }

Report read_report(const fs::path& path) { return parse_report(read_text(path)); }

void append_fit_report(KeyValues& kv, const std::string& p, const FitReport& fit) {
  kv.emplace_back(p + ".model", fit.model);
  kv.emplace_back(p + ".e_c_ghz", format_double(fit.params.e_c));
  kv.emplace_back(p + ".e_j_ghz", join_numbers(fit.params.e_j));
  kv.emplace_back(p + ".e_l_ghz", format_double(fit.params.e_l));
  kv.emplace_back(p + ".guess_e_c_ghz", format_double(fit.initial_guess.e_c));
  kv.emplace_back(p + ".guess_e_j_ghz", join_numbers(fit.initial_guess.e_j));
  kv.emplace_back(p + ".residuals_mhz", join_numbers(fit.residuals_mhz));
  kv.emplace_back(p + ".rms_mhz", format_double(fit.rms_mhz));
  kv.emplace_back(p + ".sigma_ghz", join_numbers(fit.sigma));
  kv.emplace_back(p + ".iterations", std::to_string(fit.iterations));
  kv.emplace_back(p + ".converged", fit.converged ? "true" : "false");
}

FitReport extract_fit_report(const KeyValues& kv, const std::string& p) {
  auto get = [&](const std::string& k) -> const std::string& {
    for (const auto& [key, v] : kv)
      if (key == p + "." + k) return v;
    throw IoError("report has no '" + p + "." + k + "'");
  };
  FitReport f;
  f.model = get("model");
  f.params.e_c = parse_double(get("e_c_ghz"));
  f.params.e_j = parse_numbers(get("e_j_ghz"));
  f.params.e_l = parse_double(get("e_l_ghz"));
  f.initial_guess.e_c = parse_double(get("guess_e_c_ghz"));
  f.initial_guess.e_j = parse_numbers(get("guess_e_j_ghz"));
  f.initial_guess.e_l = f.params.e_l;
  f.residuals_mhz = parse_numbers(get("residuals_mhz"));
  f.rms_mhz = parse_double(get("rms_mhz"));
  f.sigma = parse_numbers(get("sigma_ghz"));
  f.iterations = std::stoi(get("iterations"));
  const std::string& c = get("converged");
  if (c != "true" && c != "false") throw IoError("converged must be true or false");
  f.converged = c == "true";
  return f;
}

void emit_plot_data(const fs::path& path, const std::vector<std::string>& header,
                    const std::vector<std::vector<double>>& columns) {
  if (header.size() != columns.size()) throw IoError("plot data header and columns differ");
  const std::size_t n = columns.empty() ? 0 : columns.front().size();
  for (const auto& c : columns)
    if (c.size() != n) throw IoError("plot data columns differ in length");
  auto out = open_out(path);
  for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
  out << '\n';
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < columns.size(); ++c) out << (c ? "," : "") << format_double(columns[c][r]);
    out << '\n';
  }
  finish(out, path);
}

// ---------------------------------------------------------------- files

void write_text(const fs::path& path, const std::string& text) {
  auto out = open_out(path);
  out << text;
  finish(out, path);
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

fs::path resolve_output_dir(const std::string& cli_value) {
  if (!cli_value.empty()) return cli_value;
  if (const char* env = std::getenv("QCHARGE_OUT_DIR"); env && *env) return env;
  return "qcharge_out";
}

OutputLock::OutputLock(const fs::path& dir) : path_(dir / ".qcharge.lock") {
  fs::create_directories(dir);
  std::FILE* f = std::fopen(path_.c_str(), "wx");
  if (!f) {
    const int err = errno;
    if (err == EEXIST)
      throw IoError("output directory '" + dir.string() + "' is locked by another process (" +
                    path_.string() + ")");
    throw IoError("cannot create lock file '" + path_.string() + "'");
  }
  std::fclose(f);
}

OutputLock::~OutputLock() {
  std::error_code ec;
  fs::remove(path_, ec);
}

}  // namespace qcharge::io
