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

#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "qrp/reservoir.hpp"

namespace qrp {

// Task-specific knobs.  Every field has a working default so a spec naming
// only the task runs out of the box; unknown JSON keys are rejected.
struct TaskOptions {
  int d = 1;        // equalizer delay
  int d_c = 0;      // classical delay of the temporal depolarizing target
  int d_q = 0;      // quantum delay of the temporal depolarizing target
  double q_a = -1.0;  // switch channel strengths; negative draws a fresh
  double q_b = -1.0;  // uniform [0, 1] value per trial
  double f = 60.0;            // control-signal frequency
  std::string encoding = "amplitude";  // squeezing encoding: amplitude | phase
  int target_dim = 2;         // target Hilbert dimension for channel prep
  std::string mode_set = "all";   // readout node selection: in | rv | all
  std::string trainable = "wio";  // trained parameters: wo | wio
  // Channel-preparation cost: "ef" trains fidelity error on random mixed
  // inputs, "ew" trains the Wigner-grid error on squeezed thermal inputs.
  std::string cost = "ef";
  int mixer_modes = 1;            // output modes kept by the mixer
  int max_iters = 400;            // simplex iteration budget
  int d_max_classical = 40;       // memory-capacity delay range
  int d_max_quantum = 20;
  int esn_nodes = 16;
  double snr_db = 24.0;           // equalizer channel noise level
  int sample_steps = 0;  // evaluation steps dumped as Wigner/density files
  // Onsite Kerr strength; unset picks the task default (zero everywhere
  // except channel preparation, which uses gamma).
  std::optional<double> kerr;
};

// One named sweep axis; the run enumerates the cross product of all axes in
// stored order, last axis fastest.
struct SweepAxis {
  std::string name;
  std::vector<double> values;
};

struct ExperimentSpec {
  std::string task = "switch-equalizer";
  ReservoirConfig reservoir;  // E, h, Q, W_in are redrawn per trial
  TaskOptions options;
  std::vector<SweepAxis> sweep;  // axes sorted by name; empty = single cell
  int trials = 10;
  std::uint64_t base_seed = 0;
  int train_length = 800;
  int eval_length = 200;
  std::string output_dir = "out";
};

// Task registry in canonical order.
const std::vector<std::string>& task_names();

// Fully defaulted spec for one task: reservoir geometry, cutoffs, lengths
// and options tuned to that task's usual operating point.
ExperimentSpec default_spec(const std::string& task);

// Parameter names accepted as sweep axes (also usable inside "reservoir" /
// "options" where they overlap).
const std::vector<std::string>& sweep_parameter_names();

// Parses the JSON text of a spec.  Unknown keys anywhere are rejected;
// missing keys fall back to the task defaults; the result is validated.
ExperimentSpec parse_spec(const std::string& json_text);

// parse_spec over the file contents; parse errors carry the path.
ExperimentSpec load_spec(const std::string& path);

// Canonical JSON form; parse_spec(serialize_spec(s)) reproduces s exactly.
std::string serialize_spec(const ExperimentSpec& spec);

// Throws std::invalid_argument listing every violated constraint.
void validate_spec(const ExperimentSpec& spec);

// FNV-1a hash of the canonical serialization, as fixed-width hex.
std::string spec_hash(const ExperimentSpec& spec);

struct ResultRow {
  std::vector<double> point;  // sweep-axis values, aligned with param names
  int trial = 0;
  std::string metric;
  double value = 0.0;
};

struct CellFailure {
  int sweep_index = 0;
  int trial = 0;
  std::string message;
};

// Dense real grid destined for a text file (Wigner values or stacked
// real/imaginary density parts).
struct GridFile {
  std::string name;  // file stem, no extension
  Eigen::MatrixXd values;
};

struct ResultTable {
  std::string task;
  std::vector<std::string> param_names;
  std::vector<ResultRow> rows;       // cell-major, metric names sorted
  std::vector<CellFailure> failures;
  std::vector<GridFile> grids;
  std::string config_hash;
  std::string code_version;
  double wall_seconds = 0.0;
};

struct Aggregate {
  std::vector<double> point;
  std::string metric;
  double mean = 0.0;
  double stddev = 0.0;  // population deviation over trials
  int count = 0;
};

// Per-sweep-point mean and standard deviation over trials, in row order.
std::vector<Aggregate> aggregate(const ResultTable& table);

// Executes every (sweep point x trial) cell with seed derived from
// (base_seed, sweep index, trial).  A throwing cell is recorded under
// failures and the run continues.  jobs > 1 distributes cells over threads;
// the assembled table is identical regardless of jobs.
ResultTable run_experiment(const ExperimentSpec& spec, int jobs = 1);

// Runs a single cell and returns its metric map (exposed for tests and for
// the acceptance harness, which inspects individual trials).
std::map<std::string, double> run_cell(const ExperimentSpec& spec,
                                       const std::vector<double>& point,
                                       int sweep_index, int trial,
                                       std::vector<GridFile>* grids = nullptr);

// Long-form CSV: header "task,<param names>,trial,metric,value", one line
// per row, doubles at full round-trip precision.
std::string table_to_csv(const ResultTable& table);

// JSON with rows, failures and metadata (grids are emitted separately);
// table_from_json(table_to_json(t)) reproduces every serialized field.
std::string table_to_json(const ResultTable& table);
ResultTable table_from_json(const std::string& text);

// Whitespace-separated reals, one matrix row per line.
void write_grid_file(const std::string& path, const Eigen::MatrixXd& values);
Eigen::MatrixXd read_grid_file(const std::string& path);

// Writes <dir>/results.csv, <dir>/results.json and one
// <dir>/grids/<name>.txt per stored grid; creates directories as needed.
void emit_outputs(const ResultTable& table, const std::string& dir);

}  // namespace qrp
