/*
 *   Copyright 2026 The dlocal Authors
 *
 *   Licensed under the Apache License, Version 2.0 (the "License");
 *   you may not use this file except in compliance with the License.
 *   You may obtain a copy of the License at
 *
 *       http://www.apache.org/licenses/LICENSE-2.0
 *
 *   Unless required by applicable law or agreed to in writing, software
 *   distributed under the License is distributed on an "AS IS" BASIS,
 *   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 *   See the License for the specific language governing permissions and
 *   limitations under the License.
 */

// Command-line runner: one run, or a batch with "bench".

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "dlocal/runner.hpp"

namespace {

// Flags that map one-to-one onto config keys, in the order they are applied.
const char* const kSettingFlags[] = {"algo",       "graph",      "gen",       "n",          "p",
                                     "degree",     "width",      "max-weight", "graph-seed", "k",
                                     "d",          "model",      "bandwidth-factor", "c-prime", "t-max",
                                     "spanner-t-max", "strict-k", "xi-factor", "cap-factor", "c-size",
                                     "rng-seed",   "traces",     "out",       "csv"};

bool write_text(const std::string& path, const std::string& text, bool append) {
  std::ofstream out(path, append ? std::ios::app : std::ios::trunc);
  if (!out) return false;
  out << text;
  return static_cast<bool>(out);
}

void append_csv(const std::string& path, const std::vector<std::string>& row) {
  const bool fresh = !std::filesystem::exists(path) || std::filesystem::file_size(path) == 0;
  std::string text = fresh ? dlocal::csv_line(dlocal::csv_header()) : "";
  text += dlocal::csv_line(row);
  if (!write_text(path, text, true)) throw dlocal::ConfigError("cannot write csv '" + path + "'");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Deterministic distributed MIS, coloring and spanners on a simulated network"};
  app.set_help_all_flag("--help-all");

  std::map<std::string, std::string> values;
  for (const char* name : kSettingFlags) app.add_option(std::string("--") + name, values[name]);
  std::string config_path;
  app.add_option("--config", config_path, "flat key = value file; flags override it");

  auto* bench_cmd = app.add_subcommand("bench", "run one config per line of FILE and print a CSV");
  std::string bench_file;
  std::string bench_csv;
  bench_cmd->add_option("file", bench_file, "lines of key=value pairs")->required();
  bench_cmd->add_option("--csv", bench_csv, "write the CSV here instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    dlocal::RunConfig cfg;
    if (!config_path.empty()) dlocal::apply_config_file(cfg, config_path);
    for (const char* name : kSettingFlags) {
      if (app.count(std::string("--") + name) > 0) dlocal::apply_setting(cfg, name, values[name]);
    }

    if (bench_cmd->parsed()) {
      std::ifstream in(bench_file);
      if (!in) throw dlocal::ConfigError("cannot open bench file '" + bench_file + "'");
      const auto configs = dlocal::parse_bench(in, cfg);
      const auto b = dlocal::bench(configs);
      if (bench_csv.empty()) {
        std::cout << b.csv;
      } else if (!write_text(bench_csv, b.csv, false)) {
        throw dlocal::ConfigError("cannot write csv '" + bench_csv + "'");
      }
      if (b.failed > 0) std::cerr << b.failed << " of " << configs.size() << " runs failed\n";
      return b.exit_code;
    }

    const auto o = dlocal::run(cfg);
    const std::string text = o.json.dump(2) + "\n";
    if (cfg.out.empty()) {
      std::cout << text;
    } else if (!write_text(cfg.out, text, false)) {
      throw dlocal::ConfigError("cannot write output '" + cfg.out + "'");
    }
    if (!cfg.csv.empty()) append_csv(cfg.csv, o.csv_row);
    if (o.exit_code != 0) std::cerr << "dlocal: " << o.status << ": " << o.message << "\n";
    return o.exit_code;
  } catch (const dlocal::ConfigError& e) {
    std::cerr << "dlocal: config error: " << e.what() << "\n";
    return 2;
  }
}
