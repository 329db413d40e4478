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

#include "qcharge_cli/cli.hpp"

#include <chrono>
#include <ostream>

#include "CLI11.hpp"
#include "commands.hpp"
#include "qcharge/error.hpp"

namespace qcharge::cli {

namespace fs = std::filesystem;

namespace {

struct Options {
  std::string config;
  std::string out;
  std::vector<std::string> sets;
  std::uint64_t seed = 0;
  unsigned threads = 0;
};

void report_error(std::ostream& err, const std::string& command, const std::string& type,
                  const std::string& message, const fs::path& out_dir) {
  io::Report r;
  r.command = command.empty() ? "qcharge" : command;
  r.results = {{"status", "error"}, {"error.type", type}, {"error.message", message}};
  err << io::render_report(r);
  if (out_dir.empty()) return;
  try {
    io::write_report(r, out_dir / "error.report");
  } catch (const std::exception&) {
    // The error is already on stderr.
  }
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Spectra, fits and noise analysis for charge-offset experiments on transmon circuits."};
  app.name("qcharge");
  app.require_subcommand(1, 1);
  Options opt;
  for (const auto& info : commands()) {
    CLI::App* sub = app.add_subcommand(info.name, info.help);
    sub->add_option("--config", opt.config, "key = value configuration file");
    sub->add_option("--set", opt.sets, "override one configuration key (key=value); repeatable");
    sub->add_option("--out", opt.out, "output directory (default $QCHARGE_OUT_DIR or ./qcharge_out)");
    sub->add_option("--seed", opt.seed, "master seed (overrides the config)");
    sub->add_option("--threads", opt.threads, "worker threads, 0 = all cores");
  }

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    report_error(err, "", "usage", e.what(), {});
    return 2;
  }

  const CLI::App* sub = app.get_subcommands().front();
  const std::string command = sub->get_name();
  CommandFn fn = nullptr;
  for (const auto& info : commands())
    if (command == info.name) fn = info.fn;

  fs::path out_dir;
  try {
    Context ctx;
    ctx.command = command;
    if (!opt.config.empty()) ctx.config = io::RunConfig::load(opt.config);
    for (const auto& s : opt.sets) {
      const auto eq = s.find('=');
      if (eq == std::string::npos) throw IoError("--set expects key=value, got '" + s + "'");
      ctx.config.set(s.substr(0, eq), s.substr(eq + 1));
    }
    if (sub->count("--seed")) ctx.config.set("seed", std::to_string(opt.seed));
    ctx.seed = static_cast<std::uint64_t>(ctx.config.integer("seed", 0));
    ctx.threads = opt.threads;
    out_dir = io::resolve_output_dir(opt.out);
    ctx.out_dir = out_dir;

    io::OutputLock lock(out_dir);
    Timings timings;
    ctx.timings = &timings;
    const auto t0 = std::chrono::steady_clock::now();
    execute(ctx, fn);
    const double total = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    std::string timing_text;
    for (const auto& [name, secs] : timings) timing_text += name + " " + io::format_double(secs) + "\n";
    timing_text += "total " + io::format_double(total) + "\n";
    io::write_text(out_dir / kTimingFile, timing_text);
    out << io::render_report(ctx.report);
    return 0;
  } catch (const IoError& e) {
    report_error(err, command, "io", e.what(), out_dir);
    return 2;
  } catch (const InvalidArgument& e) {
    report_error(err, command, "invalid-argument", e.what(), out_dir);
    return 2;
  } catch (const ConvergenceError& e) {
    report_error(err, command, "convergence", e.what(), out_dir);
    return 1;
  } catch (const AmbiguityError& e) {
    report_error(err, command, "ambiguity", e.what(), out_dir);
    return 1;
  } catch (const std::exception& e) {
    report_error(err, command, "internal", e.what(), out_dir);
    return 1;
  }
}

}  // namespace qcharge::cli
