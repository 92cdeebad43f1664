// Copyright 2026 The qrproc Authors
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

#include <cstdint>
#include <cstdlib>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "qrp/experiment.hpp"

namespace {

// Resolution order: --out flag, then QRP_OUT_DIR, then the spec file.
std::string resolve_output_dir(const std::string& flag_value,
                               const std::string& spec_value) {
  if (!flag_value.empty()) return flag_value;
  if (const char* env = std::getenv("QRP_OUT_DIR"); env != nullptr && *env) {
    return env;
  }
  return spec_value;
}

std::string format_point(const qrp::ResultTable& table,
                         const std::vector<double>& point) {
  std::ostringstream os;
  for (std::size_t i = 0; i < point.size(); ++i) {
    if (i > 0) os << " ";
    os << table.param_names[i] << "=" << point[i];
  }
  return os.str();
}

void print_summary(const qrp::ResultTable& table) {
  for (const qrp::Aggregate& a : qrp::aggregate(table)) {
    std::cout << table.task;
    const std::string pt = format_point(table, a.point);
    if (!pt.empty()) std::cout << " [" << pt << "]";
    std::cout << " " << a.metric << ": " << a.mean << " +- " << a.stddev
              << " (" << a.count << " trials)\n";
  }
  for (const qrp::CellFailure& f : table.failures) {
    std::cerr << "cell failed (sweep " << f.sweep_index << ", trial "
              << f.trial << "): " << f.message << "\n";
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quantum reservoir experiment runner"};
  app.require_subcommand(1);

  std::string spec_path;
  std::string out_dir;
  int jobs = 1;
  std::uint64_t seed = 0;

  CLI::App* run = app.add_subcommand("run", "Execute an experiment spec");
  run->add_option("spec", spec_path, "Path to the spec JSON")->required();
  run->add_option("--out", out_dir, "Output directory (overrides the spec)");
  run->add_option("--jobs", jobs, "Worker threads for sweep cells")
      ->check(CLI::PositiveNumber);
  CLI::Option* seed_opt =
      run->add_option("--seed", seed, "Base seed (overrides the spec)");

  CLI::App* validate = app.add_subcommand("validate", "Check a spec file");
  validate->add_option("spec", spec_path, "Path to the spec JSON")->required();

  CLI::App* list = app.add_subcommand("list-tasks", "Print known task names");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (list->parsed()) {
      for (const std::string& name : qrp::task_names()) std::cout << name << "\n";
      return 0;
    }
    if (validate->parsed()) {
      qrp::load_spec(spec_path);
      std::cout << "ok\n";
      return 0;
    }
    qrp::ExperimentSpec spec = qrp::load_spec(spec_path);
    if (seed_opt->count() > 0) spec.base_seed = seed;
    const std::string dir = resolve_output_dir(out_dir, spec.output_dir);
    const qrp::ResultTable table = qrp::run_experiment(spec, jobs);
    qrp::emit_outputs(table, dir);
    print_summary(table);
    std::cout << "wrote " << dir << " in " << table.wall_seconds << " s\n";
    return table.failures.empty() ? 0 : 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
