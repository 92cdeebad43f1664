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

#include "qrp/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <json.hpp>

#include "qrp/metrics.hpp"
#include "qrp/quantum_readout.hpp"
#include "qrp/readout.hpp"
#include "qrp/rng.hpp"
#include "qrp/states.hpp"
#include "qrp/tasks.hpp"
#include "qrp/wigner.hpp"

namespace qrp {
namespace {

using json = nlohmann::json;
using MetricMap = std::map<std::string, double>;

constexpr const char* kCodeVersion = "0.1.0";

enum class TaskId {
  kSwitchEqualizer,
  kCvClosedLoop,
  kCvNontemporal,
  kDepolarizingPrep,
  kMemoryCapacity,
  kEsnBaseline,
};

const std::vector<std::pair<std::string, TaskId>>& task_registry() {
  static const std::vector<std::pair<std::string, TaskId>> reg = {
      {"switch-equalizer", TaskId::kSwitchEqualizer},
      {"cv-closed-loop", TaskId::kCvClosedLoop},
      {"cv-nontemporal", TaskId::kCvNontemporal},
      {"depolarizing-prep", TaskId::kDepolarizingPrep},
      {"memory-capacity", TaskId::kMemoryCapacity},
      {"esn-baseline", TaskId::kEsnBaseline},
  };
  return reg;
}

TaskId task_id(const std::string& name) {
  for (const auto& [n, id] : task_registry()) {
    if (n == name) return id;
  }
  throw std::invalid_argument("unknown task '" + name + "'");
}

std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

// Shortest round-trip decimal form (shared with the JSON writer) so the CSV
// and JSON artifacts print identical numbers.
std::string fmt_double(double v) { return json(v).dump(); }

std::string policy_name(CutoffPolicy p) {
  switch (p) {
    case CutoffPolicy::kWarn: return "warn";
    case CutoffPolicy::kStrict: return "strict";
    case CutoffPolicy::kAutoRaise: return "auto_raise";
  }
  throw std::logic_error("unreachable cutoff policy");
}

CutoffPolicy policy_from_name(const std::string& s) {
  if (s == "warn") return CutoffPolicy::kWarn;
  if (s == "strict") return CutoffPolicy::kStrict;
  if (s == "auto_raise") return CutoffPolicy::kAutoRaise;
  throw std::invalid_argument("cutoff_policy must be warn|strict|auto_raise, got '" + s + "'");
}

void check_keys(const json& obj, const std::string& where,
                std::initializer_list<const char*> allowed) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool ok = false;
    for (const char* k : allowed) {
      if (it.key() == k) {
        ok = true;
        break;
      }
    }
    if (!ok) {
      throw std::invalid_argument("unknown key '" + it.key() + "' in " + where);
    }
  }
}

template <typename T>
void read_field(const json& obj, const char* key, T& out) {
  if (obj.contains(key)) obj.at(key).get_to(out);
}

void read_reservoir(const json& obj, ReservoirConfig& r) {
  check_keys(obj, "reservoir",
             {"N", "site_cutoff", "input_cutoff", "input_cutoffs", "P", "W",
              "gamma", "tau", "t_init", "V", "step", "cutoff_policy",
              "cutoff_tol", "psd_tol"});
  read_field(obj, "N", r.N);
  read_field(obj, "site_cutoff", r.site_cutoff);
  if (obj.contains("input_cutoff")) {
    r.input_cutoffs = {obj.at("input_cutoff").get<int>()};
  }
  if (obj.contains("input_cutoffs")) {
    r.input_cutoffs = obj.at("input_cutoffs").get<std::vector<int>>();
  }
  read_field(obj, "P", r.P);
  read_field(obj, "W", r.W);
  read_field(obj, "gamma", r.gamma);
  read_field(obj, "tau", r.tau);
  read_field(obj, "t_init", r.t_init);
  read_field(obj, "V", r.V);
  read_field(obj, "step", r.step);
  if (obj.contains("cutoff_policy")) {
    r.cutoff_policy = policy_from_name(obj.at("cutoff_policy").get<std::string>());
  }
  read_field(obj, "cutoff_tol", r.cutoff_tol);
  read_field(obj, "psd_tol", r.psd_tol);
}

void read_options(const json& obj, TaskOptions& o) {
  check_keys(obj, "options",
             {"d", "d_c", "d_q", "q_a", "q_b", "f", "encoding", "target_dim",
              "mode_set", "trainable", "cost", "mixer_modes", "max_iters",
              "d_max_classical", "d_max_quantum", "esn_nodes", "snr_db",
              "sample_steps", "kerr"});
  read_field(obj, "d", o.d);
  read_field(obj, "d_c", o.d_c);
  read_field(obj, "d_q", o.d_q);
  read_field(obj, "q_a", o.q_a);
  read_field(obj, "q_b", o.q_b);
  read_field(obj, "f", o.f);
  read_field(obj, "encoding", o.encoding);
  read_field(obj, "target_dim", o.target_dim);
  read_field(obj, "mode_set", o.mode_set);
  read_field(obj, "trainable", o.trainable);
  read_field(obj, "cost", o.cost);
  read_field(obj, "mixer_modes", o.mixer_modes);
  read_field(obj, "max_iters", o.max_iters);
  read_field(obj, "d_max_classical", o.d_max_classical);
  read_field(obj, "d_max_quantum", o.d_max_quantum);
  read_field(obj, "esn_nodes", o.esn_nodes);
  read_field(obj, "snr_db", o.snr_db);
  read_field(obj, "sample_steps", o.sample_steps);
  if (obj.contains("kerr")) {
    const json& k = obj.at("kerr");
    o.kerr = k.is_null() ? std::nullopt : std::optional<double>(k.get<double>());
  }
}

ModeSet mode_set_from_name(const std::string& s) {
  if (s == "in") return ModeSet::kIn;
  if (s == "rv") return ModeSet::kRv;
  if (s == "all") return ModeSet::kAll;
  throw std::invalid_argument("mode_set must be in|rv|all, got '" + s + "'");
}

Trainable trainable_from_name(const std::string& s) {
  if (s == "wo") return Trainable::kWo;
  if (s == "wio") return Trainable::kWio;
  throw std::invalid_argument("trainable must be wo|wio, got '" + s + "'");
}

CvEncoding encoding_from_name(const std::string& s) {
  if (s == "amplitude") return CvEncoding::kAmplitude;
  if (s == "phase") return CvEncoding::kPhase;
  throw std::invalid_argument("encoding must be amplitude|phase, got '" + s + "'");
}

// Applies one sweep-axis value to the resolved cell parameters.
void apply_axis(const std::string& name, double v, ReservoirConfig& r,
                TaskOptions& o) {
  const auto as_int = [&](const char* what) {
    const double rounded = std::llround(v);
    if (std::abs(v - rounded) > 1e-9) {
      throw std::invalid_argument(std::string("sweep value for '") + what +
                                  "' must be an integer, got " + fmt_double(v));
    }
    return static_cast<int>(rounded);
  };
  if (name == "W") {
    r.W = v;
  } else if (name == "P") {
    r.P = v;
  } else if (name == "N") {
    r.N = as_int("N");
  } else if (name == "V") {
    r.V = as_int("V");
  } else if (name == "site_cutoff") {
    r.site_cutoff = as_int("site_cutoff");
  } else if (name == "input_cutoff") {
    r.input_cutoffs.assign(r.input_cutoffs.empty() ? 1 : r.input_cutoffs.size(),
                           as_int("input_cutoff"));
  } else if (name == "tau") {
    r.tau = v;
  } else if (name == "step") {
    r.step = v;
  } else if (name == "t_init") {
    r.t_init = v;
  } else if (name == "Q") {
    o.kerr = v;
  } else if (name == "d") {
    o.d = as_int("d");
  } else if (name == "d_c") {
    o.d_c = as_int("d_c");
  } else if (name == "d_q") {
    o.d_q = as_int("d_q");
  } else if (name == "f") {
    o.f = v;
  } else if (name == "q_a") {
    o.q_a = v;
  } else if (name == "q_b") {
    o.q_b = v;
  } else if (name == "nodes") {
    o.esn_nodes = as_int("nodes");
  } else if (name == "snr_db") {
    o.snr_db = v;
  } else if (name == "target_dim") {
    // Keeps the injected input dimension and the target dimension in step.
    o.target_dim = as_int("target_dim");
    r.input_cutoffs = {o.target_dim};
  } else if (name == "mixer_modes") {
    o.mixer_modes = as_int("mixer_modes");
  } else {
    throw std::invalid_argument("unknown sweep parameter '" + name + "'");
  }
}

void add_stats(MetricMap& m, const PhysicalityStats& st) {
  m["max_trace_drift"] = st.max_trace_drift;
  m["worst_negative_eig"] = st.worst_negative_eig;
  m["psd_violations"] = static_cast<double>(st.psd_violations);
  m["max_top_population"] = st.max_top_population;
  m["total_time"] = st.total_time;
}

std::string grid_name(const char* kind, int sweep_index, int trial, int step,
                      const char* role) {
  std::ostringstream os;
  os << kind << "_p" << sweep_index << "_t" << trial << "_s" << step << "_"
     << role;
  return os.str();
}

// Real/imaginary parts stacked vertically into one real matrix.
Eigen::MatrixXd density_grid(const CMatrix& m) {
  Eigen::MatrixXd g(2 * m.rows(), m.cols());
  g.topRows(m.rows()) = m.real();
  g.bottomRows(m.rows()) = m.imag();
  return g;
}

double draw_channel_strength(double configured, Rng& rng) {
  return configured < 0.0 ? rng.uniform() : configured;
}

MetricMap cell_switch_equalizer(const ReservoirConfig& cfg,
                                const TaskOptions& opt, int L, int T,
                                std::uint64_t seed, int sweep_index, int trial,
                                std::vector<GridFile>* grids) {
  const int offset = std::max(opt.d, 2);
  const int length = L + T + offset;
  Rng qrng(derive_seed(seed, 3));
  const double q_a = draw_channel_strength(opt.q_a, qrng);
  const double q_b = draw_channel_strength(opt.q_b, qrng);
  HybridSequence seq =
      switch_task_sequence(length, derive_seed(seed, 1), q_a, q_b, opt.d);

  PhysicalityStats stats;
  FeatureMatrix fm = run_sequence(cfg, seq, &stats);
  const Eigen::MatrixXd x = fm.X.middleRows(offset, L + T);
  const int n_targets = static_cast<int>(seq.target_states.size());
  if (n_targets < L + T) {
    throw std::runtime_error("switch-equalizer: target stream shorter than L + T");
  }

  // Symbol head.
  Eigen::MatrixXd ys(L, 1);
  for (int i = 0; i < L; ++i) ys(i, 0) = seq.target_symbols[static_cast<size_t>(i)];
  const Eigen::MatrixXd x_train = x.topRows(L);
  const ReadoutWeights symbol_head =
      ridge_fit(x_train, ys, default_ridge_eta(x_train));
  const Eigen::MatrixXd y_hat = symbol_head.apply_rows(x.middleRows(L, T));
  std::vector<int> predicted(static_cast<size_t>(T));
  std::vector<int> truth(static_cast<size_t>(T));
  for (int i = 0; i < T; ++i) {
    predicted[static_cast<size_t>(i)] = quantize_symbol(y_hat(i, 0));
    truth[static_cast<size_t>(i)] = seq.target_symbols[static_cast<size_t>(L + i)];
  }

  // Tomography head over the stacked real/imaginary state vector.
  const int D = static_cast<int>(seq.target_states.front().mat.rows());
  Eigen::MatrixXd yt(L, 2 * D * D);
  for (int i = 0; i < L; ++i) {
    yt.row(i) = vectorize_density(seq.target_states[static_cast<size_t>(i)].mat)
                    .transpose();
  }
  const ReadoutWeights tomo_head = ridge_fit(x_train, yt, default_ridge_eta(x_train));
  const Eigen::MatrixXd yt_hat = tomo_head.apply_rows(x.middleRows(L, T));
  std::vector<CMatrix> target_states;
  std::vector<CMatrix> predicted_states;
  target_states.reserve(static_cast<size_t>(T));
  predicted_states.reserve(static_cast<size_t>(T));
  for (int i = 0; i < T; ++i) {
    target_states.push_back(seq.target_states[static_cast<size_t>(L + i)].mat);
    predicted_states.push_back(
        reconstruct_density(yt_hat.row(i).transpose(), D).mat);
  }

  if (grids != nullptr && opt.sample_steps > 0) {
    const int n = std::min(opt.sample_steps, T);
    for (int k = 0; k < n; ++k) {
      grids->push_back({grid_name("density", sweep_index, trial, k, "pred"),
                        density_grid(predicted_states[static_cast<size_t>(k)])});
      grids->push_back({grid_name("density", sweep_index, trial, k, "target"),
                        density_grid(target_states[static_cast<size_t>(k)])});
    }
  }

  MetricMap m;
  m["ser"] = ser(truth, predicted);
  m["rmsf"] = rmsf(target_states, predicted_states, cfg.psd_tol);
  m["q_a"] = q_a;
  m["q_b"] = q_b;
  add_stats(m, stats);
  return m;
}

MetricMap cell_esn_baseline(const TaskOptions& opt, int L, int T,
                            std::uint64_t seed) {
  const int offset = std::max(opt.d, 2);
  const int length = L + T + offset;
  EqualizerData eq = gen_equalizer_data(length, derive_seed(seed, 1), opt.snr_db);

  EsnConfig ec;
  ec.nodes = opt.esn_nodes;
  ec.seed = derive_seed(seed, 2);
  // Symbols span [-3, 3]; scale them into tanh's responsive range.
  ec.input_scale = 1.0 / 3.0;
  const FeatureMatrix fm = esn_run(ec, eq.u);

  Eigen::MatrixXd ys(L, 1);
  for (int i = 0; i < L; ++i) {
    ys(i, 0) = eq.symbols[static_cast<size_t>(offset + i - opt.d)];
  }
  const Eigen::MatrixXd x_train = fm.X.middleRows(offset, L);
  const ReadoutWeights head = ridge_fit(x_train, ys, default_ridge_eta(x_train));
  const Eigen::MatrixXd y_hat = head.apply_rows(fm.X.middleRows(offset + L, T));
  std::vector<int> predicted(static_cast<size_t>(T));
  std::vector<int> truth(static_cast<size_t>(T));
  for (int i = 0; i < T; ++i) {
    predicted[static_cast<size_t>(i)] = quantize_symbol(y_hat(i, 0));
    truth[static_cast<size_t>(i)] =
        eq.symbols[static_cast<size_t>(offset + L + i - opt.d)];
  }

  MetricMap m;
  m["ser"] = ser(truth, predicted);
  return m;
}

MetricMap cell_memory_capacity(const ReservoirConfig& cfg,
                               const TaskOptions& opt, int L, int T,
                               std::uint64_t seed) {
  const int total = L + T;
  const int d_in = cfg.input_cutoffs.empty() ? 2 : cfg.input_cutoffs.front();
  Rng rng(derive_seed(seed, 1));
  HybridSequence seq;
  seq.u.resize(static_cast<size_t>(total));
  seq.beta.reserve(static_cast<size_t>(total));
  std::vector<DensityMatrix> inputs;
  inputs.reserve(static_cast<size_t>(total));
  for (int l = 0; l < total; ++l) {
    seq.u[static_cast<size_t>(l)] = rng.uniform();
    DensityMatrix beta = random_state(
        d_in, derive_seed(seed, 2, static_cast<std::uint64_t>(l)),
        StateKind::kPure);
    inputs.push_back(beta);
    seq.beta.push_back(std::move(beta));
  }

  PhysicalityStats stats;
  const FeatureMatrix fm = run_sequence(cfg, seq, &stats);

  MetricMap m;
  m["mc"] = memory_capacity_classical(fm.X, seq.u, opt.d_max_classical).capacity;
  m["qmc"] = quantum_memory_capacity(fm.X, inputs, opt.d_max_quantum).capacity;

  // End-of-interval occupation traces, one column per site.
  Eigen::MatrixXd traces(total, cfg.N);
  for (int j = 0; j < cfg.N; ++j) {
    traces.col(j) = fm.X.col(j * cfg.V + cfg.V - 1);
  }
  const AutocorrelationResult ac = autocorrelation_timescale(traces, cfg.tau);
  m["autocorr_time"] = ac.crossing_time;
  m["autocorr_crossed"] = ac.crossed ? 1.0 : 0.0;
  add_stats(m, stats);
  return m;
}

MetricMap cell_cv_closed_loop(const ReservoirConfig& cfg, const TaskOptions& opt,
                              int L, int T, std::uint64_t seed) {
  const int d_in = cfg.input_cutoffs.empty() ? 2 : cfg.input_cutoffs.front();
  const std::vector<DensityMatrix> betas =
      cv_input_states(L + T, d_in, derive_seed(seed, 2));

  ReservoirSimulator sim(cfg);
  const int nf = cfg.N * cfg.V;
  Eigen::MatrixXd x(L, nf + 1);
  std::vector<double> u_train(static_cast<size_t>(L));
  for (int l = 0; l < L; ++l) {
    u_train[static_cast<size_t>(l)] = control_signal(l + 1, opt.f);
    x.row(l).head(nf) =
        sim.step(u_train[static_cast<size_t>(l)], betas[static_cast<size_t>(l)])
            .transpose();
    x(l, nf) = 1.0;
  }
  if (L < 2) throw std::runtime_error("cv-closed-loop: needs at least 2 training steps");

  // One-step-ahead predictor: features after step l regress the next control.
  Eigen::MatrixXd y(L - 1, 1);
  for (int l = 0; l + 1 < L; ++l) y(l, 0) = u_train[static_cast<size_t>(l + 1)];
  const Eigen::MatrixXd x_fit = x.topRows(L - 1);
  const ReadoutWeights predictor = ridge_fit(x_fit, y, default_ridge_eta(x_fit));

  const DensityMatrix resume_state = sim.state();
  const auto beta_source = [&](int i) { return betas[static_cast<size_t>(L + i)]; };
  ClosedLoopOptions lo;
  lo.steps = T;
  lo.initial_u = predictor.apply(x.row(L - 1).transpose())(0);
  lo.divergence_guard = 1e6;
  const ClosedLoopResult nominal =
      closed_loop_generate(sim, predictor, nullptr, beta_source, lo);

  // Twin run from the same resume point with a one-step control kick.
  const int kick = std::min(50, T / 2);
  sim.set_state(resume_state);
  ClosedLoopOptions lp = lo;
  lp.intervention_step = kick;
  lp.perturbation = 0.05;
  const ClosedLoopResult kicked =
      closed_loop_generate(sim, predictor, nullptr, beta_source, lp);

  std::vector<double> truth(static_cast<size_t>(T));
  std::vector<double> errors(static_cast<size_t>(T));
  double u_min = 1.0, u_max = 0.0;
  for (int k = 0; k < T; ++k) {
    truth[static_cast<size_t>(k)] = control_signal(L + 1 + k, opt.f);
    const double u = nominal.u_fed[static_cast<size_t>(k)];
    errors[static_cast<size_t>(k)] = std::abs(u - truth[static_cast<size_t>(k)]);
    u_min = std::min(u_min, u);
    u_max = std::max(u_max, u);
  }

  double recovery_steps = -1.0;
  for (int k = kick + 1; k < T; ++k) {
    const double dev = std::abs(kicked.u_fed[static_cast<size_t>(k)] -
                                nominal.u_fed[static_cast<size_t>(k)]);
    if (dev < 0.05) {
      recovery_steps = k - kick;
      break;
    }
  }

  MetricMap m;
  m["nrmse_100"] = nrmse(truth, nominal.u_fed, std::min(100, T));
  m["nrmse_full"] = nrmse(truth, nominal.u_fed, T);
  m["vpt"] = static_cast<double>(vpt(errors, 0.1));
  m["u_min"] = u_min;
  m["u_max"] = u_max;
  m["in_range"] = (u_min >= 0.0 && u_max <= 1.0) ? 1.0 : 0.0;
  m["recovery_steps"] = recovery_steps;
  m["recovered"] = (recovery_steps > 0.0 && recovery_steps <= 30.0) ? 1.0 : 0.0;
  add_stats(m, sim.stats());
  return m;
}

void add_train_result(MetricMap& m, const char* prefix, const TrainResult& res) {
  m[std::string(prefix)] = res.eval_error;
  m[std::string(prefix) + "_train"] = res.train_error;
  m[std::string(prefix) + "_baseline"] = res.baseline_error;
  m["iterations"] = static_cast<double>(res.iterations);
  add_stats(m, res.stats);
}

// Re-runs the dynamics at the trained coupling and dumps mixer outputs next
// to their targets for the first sampled evaluation steps.
void dump_quantum_outputs(const ReservoirConfig& cfg, const HybridSequence& data,
                          const TrainResult& res, ModeSet set, int first_eval,
                          int n_samples, bool wigner, int sweep_index, int trial,
                          std::vector<GridFile>* grids) {
  ReservoirConfig local = cfg;
  local.W_in = res.W_in;
  derive_input_rates(local);
  local.cutoff_policy = CutoffPolicy::kWarn;
  const std::vector<int> selected = select_modes(local, set);
  std::vector<CMatrix> margs;
  run_sequence(local, data, nullptr, &selected, &margs);

  const HilbertSpace full = composite_space(local);
  std::vector<int> dims;
  dims.reserve(selected.size());
  for (int mode : selected) dims.push_back(full.dim(mode));
  const HilbertSpace sel_space(dims);
  const int offset =
      static_cast<int>(data.u.size() - data.target_states.size());

  const int out_dim = static_cast<int>(data.target_states.front().mat.rows());
  std::optional<WignerBasis> basis;
  if (wigner) basis.emplace(WignerBasis::standard(out_dim));

  for (int k = 0; k < n_samples; ++k) {
    const int target_idx = first_eval + k;
    const int step_idx = offset + target_idx;
    if (step_idx >= static_cast<int>(margs.size()) ||
        target_idx >= static_cast<int>(data.target_states.size())) {
      break;
    }
    const DensityMatrix reduced{sel_space, margs[static_cast<size_t>(step_idx)]};
    const DensityMatrix out = output_state(reduced, res.mixer, 0.25);
    const CMatrix& target = data.target_states[static_cast<size_t>(target_idx)].mat;
    if (wigner) {
      grids->push_back({grid_name("wigner", sweep_index, trial, k, "pred"),
                        basis->evaluate(out.mat).values});
      grids->push_back({grid_name("wigner", sweep_index, trial, k, "target"),
                        basis->evaluate(target).values});
    } else {
      grids->push_back({grid_name("density", sweep_index, trial, k, "pred"),
                        density_grid(out.mat)});
      grids->push_back({grid_name("density", sweep_index, trial, k, "target"),
                        density_grid(target)});
    }
  }
}

MetricMap cell_cv_nontemporal(const ReservoirConfig& cfg, const TaskOptions& opt,
                              int L, int T, std::uint64_t seed, int sweep_index,
                              int trial, std::vector<GridFile>* grids) {
  const int total = L + T;
  const int d_in = cfg.input_cutoffs.empty() ? 2 : cfg.input_cutoffs.front();
  const CvEncoding enc = encoding_from_name(opt.encoding);

  Rng rng(derive_seed(seed, 1));
  HybridSequence data;
  data.u.resize(static_cast<size_t>(total));
  data.beta = cv_input_states(total, d_in, derive_seed(seed, 2));
  data.target_states.reserve(static_cast<size_t>(total));
  for (int l = 0; l < total; ++l) {
    data.u[static_cast<size_t>(l)] = rng.uniform();
    data.target_states.push_back(
        cv_target(data.beta[static_cast<size_t>(l)],
                  data.u[static_cast<size_t>(l)], enc));
  }

  TrainSpec ts;
  ts.trainable = trainable_from_name(opt.trainable);
  ts.cost = CostKind::kEw;
  ts.mode_set = mode_set_from_name(opt.mode_set);
  ts.M = opt.mixer_modes;
  ts.max_iters = opt.max_iters;
  ts.eval_fraction = static_cast<double>(T) / total;
  const TrainResult res = train_quantum_readout(cfg, data, ts);

  MetricMap m;
  add_train_result(m, "ew", res);
  if (grids != nullptr && opt.sample_steps > 0) {
    dump_quantum_outputs(cfg, data, res, ts.mode_set, L,
                         std::min(opt.sample_steps, T), /*wigner=*/true,
                         sweep_index, trial, grids);
  }
  return m;
}

MetricMap cell_depolarizing_prep(const ReservoirConfig& cfg,
                                 const TaskOptions& opt, int L, int T,
                                 std::uint64_t seed, int sweep_index, int trial,
                                 std::vector<GridFile>* grids) {
  const int offset = std::max(opt.d_c, opt.d_q);
  const int total = L + T + offset;
  const int D = opt.target_dim;
  const bool wigner_cost = opt.cost == "ew";

  Rng rng(derive_seed(seed, 1));
  std::vector<double> s(static_cast<size_t>(total));
  for (int l = 0; l < total; ++l) s[static_cast<size_t>(l)] = rng.uniform();
  std::vector<DensityMatrix> betas;
  if (wigner_cost) {
    betas = cv_squeezed_input_states(total, D, derive_seed(seed, 2));
  } else {
    betas.reserve(static_cast<size_t>(total));
    for (int l = 0; l < total; ++l) {
      betas.push_back(random_state(
          D, derive_seed(seed, 2, static_cast<std::uint64_t>(l)),
          StateKind::kMixed));
    }
  }

  HybridSequence data;
  data.u = s;
  data.beta = betas;
  data.d_c = opt.d_c;
  data.d_q = opt.d_q;
  data.target_states = depolarizing_target(s, betas, D, opt.d_c, opt.d_q);

  TrainSpec ts;
  ts.trainable = trainable_from_name(opt.trainable);
  ts.cost = wigner_cost ? CostKind::kEw : CostKind::kEf;
  ts.mode_set = mode_set_from_name(opt.mode_set);
  ts.M = opt.mixer_modes;
  ts.max_iters = opt.max_iters;
  ts.eval_fraction = static_cast<double>(T) / (L + T);
  const TrainResult res = train_quantum_readout(cfg, data, ts);

  MetricMap m;
  add_train_result(m, wigner_cost ? "ew" : "ef", res);
  if (grids != nullptr && opt.sample_steps > 0) {
    dump_quantum_outputs(cfg, data, res, ts.mode_set, L,
                         std::min(opt.sample_steps, T), wigner_cost,
                         sweep_index, trial, grids);
  }
  return m;
}

std::vector<std::vector<double>> sweep_points(const ExperimentSpec& spec) {
  std::vector<std::vector<double>> points;
  if (spec.sweep.empty()) {
    points.push_back({});
    return points;
  }
  std::vector<std::size_t> idx(spec.sweep.size(), 0);
  while (true) {
    std::vector<double> p(spec.sweep.size());
    for (std::size_t a = 0; a < spec.sweep.size(); ++a) {
      p[a] = spec.sweep[a].values[idx[a]];
    }
    points.push_back(std::move(p));
    std::size_t a = spec.sweep.size();
    while (a > 0) {
      --a;
      if (++idx[a] < spec.sweep[a].values.size()) break;
      idx[a] = 0;
      if (a == 0) return points;
    }
  }
}

}  // namespace

const std::vector<std::string>& task_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> v;
    for (const auto& [n, id] : task_registry()) v.push_back(n);
    return v;
  }();
  return names;
}

const std::vector<std::string>& sweep_parameter_names() {
  static const std::vector<std::string> names = {
      "W",   "P",   "N",          "V",            "site_cutoff", "input_cutoff",
      "tau", "step", "t_init",    "Q",            "d",           "d_c",
      "d_q", "f",   "q_a",        "q_b",          "nodes",       "snr_db",
      "target_dim", "mixer_modes"};
  return names;
}

ExperimentSpec default_spec(const std::string& task) {
  ExperimentSpec s;
  s.task = task;
  ReservoirConfig& r = s.reservoir;
  TaskOptions& o = s.options;
  r.step = 0.02;
  switch (task_id(task)) {
    case TaskId::kSwitchEqualizer:
      r.N = 3;
      r.V = 8;
      r.P = 0.1;
      r.W = 1.0;
      r.input_cutoffs = {2};
      s.train_length = 800;
      s.eval_length = 200;
      break;
    case TaskId::kCvClosedLoop:
      r.N = 3;
      r.V = 10;
      r.P = 1.0;
      r.W = 0.8;
      r.input_cutoffs = {9};
      s.train_length = 300;
      s.eval_length = 200;
      o.f = 60.0;
      break;
    case TaskId::kCvNontemporal:
      r.N = 2;
      r.V = 1;
      r.P = 1.0;
      r.W = 1.0;
      r.input_cutoffs = {3};
      s.train_length = 100;
      s.eval_length = 100;
      break;
    case TaskId::kDepolarizingPrep:
      r.N = 2;
      r.V = 1;
      r.P = 1.0;
      r.W = 2.0;
      // The onsite nonlinearity is active here, which pushes population one
      // Fock level higher than the linear tomography networks.
      r.site_cutoff = 4;
      r.input_cutoffs = {2};
      o.target_dim = 2;
      s.train_length = 200;
      s.eval_length = 100;
      break;
    case TaskId::kMemoryCapacity:
      r.N = 2;
      r.V = 8;
      r.P = 4.0;
      r.W = 1.0;
      r.input_cutoffs = {2};
      s.train_length = 800;
      s.eval_length = 200;
      break;
    case TaskId::kEsnBaseline:
      s.train_length = 800;
      s.eval_length = 200;
      break;
  }
  return s;
}

ExperimentSpec parse_spec(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    // Count lines up to the failing byte for a readable diagnostic.
    std::size_t line = 1;
    const std::size_t stop = std::min(json_text.size(), e.byte);
    for (std::size_t i = 0; i < stop; ++i) {
      if (json_text[i] == '\n') ++line;
    }
    throw std::invalid_argument("spec parse error at line " +
                                std::to_string(line) + ": " + e.what());
  }
  if (!j.is_object()) throw std::invalid_argument("spec must be a JSON object");
  check_keys(j, "spec",
             {"task", "reservoir", "options", "sweep", "trials", "seed",
              "lengths", "output_dir"});
  if (!j.contains("task")) throw std::invalid_argument("spec is missing 'task'");

  ExperimentSpec spec = default_spec(j.at("task").get<std::string>());
  if (j.contains("reservoir")) read_reservoir(j.at("reservoir"), spec.reservoir);
  if (j.contains("options")) read_options(j.at("options"), spec.options);
  read_field(j, "trials", spec.trials);
  read_field(j, "seed", spec.base_seed);
  if (j.contains("lengths")) {
    const json& len = j.at("lengths");
    check_keys(len, "lengths", {"train", "eval"});
    read_field(len, "train", spec.train_length);
    read_field(len, "eval", spec.eval_length);
  }
  read_field(j, "output_dir", spec.output_dir);
  if (j.contains("sweep")) {
    const json& sw = j.at("sweep");
    if (!sw.is_object()) throw std::invalid_argument("'sweep' must map names to value arrays");
    for (auto it = sw.begin(); it != sw.end(); ++it) {
      SweepAxis axis;
      axis.name = it.key();
      axis.values = it.value().get<std::vector<double>>();
      spec.sweep.push_back(std::move(axis));
    }
    std::sort(spec.sweep.begin(), spec.sweep.end(),
              [](const SweepAxis& a, const SweepAxis& b) { return a.name < b.name; });
  }
  validate_spec(spec);
  return spec;
}

ExperimentSpec load_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open spec file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return parse_spec(buf.str());
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument(path + ": " + e.what());
  }
}

std::string serialize_spec(const ExperimentSpec& spec) {
  json j;
  j["task"] = spec.task;
  j["trials"] = spec.trials;
  j["seed"] = spec.base_seed;
  j["lengths"] = {{"train", spec.train_length}, {"eval", spec.eval_length}};
  j["output_dir"] = spec.output_dir;

  const ReservoirConfig& r = spec.reservoir;
  j["reservoir"] = {
      {"N", r.N},
      {"site_cutoff", r.site_cutoff},
      {"input_cutoffs", r.input_cutoffs},
      {"P", r.P},
      {"W", r.W},
      {"gamma", r.gamma},
      {"tau", r.tau},
      {"t_init", r.t_init},
      {"V", r.V},
      {"step", r.step},
      {"cutoff_policy", policy_name(r.cutoff_policy)},
      {"cutoff_tol", r.cutoff_tol},
      {"psd_tol", r.psd_tol},
  };

  const TaskOptions& o = spec.options;
  json& opt = j["options"];
  opt = {
      {"d", o.d},
      {"d_c", o.d_c},
      {"d_q", o.d_q},
      {"q_a", o.q_a},
      {"q_b", o.q_b},
      {"f", o.f},
      {"encoding", o.encoding},
      {"target_dim", o.target_dim},
      {"mode_set", o.mode_set},
      {"trainable", o.trainable},
      {"cost", o.cost},
      {"mixer_modes", o.mixer_modes},
      {"max_iters", o.max_iters},
      {"d_max_classical", o.d_max_classical},
      {"d_max_quantum", o.d_max_quantum},
      {"esn_nodes", o.esn_nodes},
      {"snr_db", o.snr_db},
      {"sample_steps", o.sample_steps},
  };
  opt["kerr"] = o.kerr.has_value() ? json(*o.kerr) : json(nullptr);

  json sweep = json::object();
  for (const SweepAxis& axis : spec.sweep) sweep[axis.name] = axis.values;
  j["sweep"] = sweep;
  return j.dump(2);
}

void validate_spec(const ExperimentSpec& spec) {
  std::vector<std::string> bad;
  const auto complain = [&](const std::string& msg) { bad.push_back(msg); };

  bool task_known = true;
  try {
    task_id(spec.task);
  } catch (const std::invalid_argument& e) {
    complain(e.what());
    task_known = false;
  }
  if (spec.trials < 1) complain("trials must be >= 1");
  if (spec.train_length < 1) complain("lengths.train must be >= 1");
  if (spec.eval_length < 1) complain("lengths.eval must be >= 1");

  const ReservoirConfig& r = spec.reservoir;
  if (r.N < 1) complain("reservoir.N must be >= 1");
  if (r.site_cutoff < 2) complain("reservoir.site_cutoff must be >= 2");
  for (int c : r.input_cutoffs) {
    if (c < 2) complain("reservoir input cutoffs must be >= 2");
  }
  if (r.V < 1) complain("reservoir.V must be >= 1");
  if (!(r.gamma > 0.0)) complain("reservoir.gamma must be > 0");
  if (!(r.tau > 0.0)) complain("reservoir.tau must be > 0");
  if (!(r.step > 0.0)) complain("reservoir.step must be > 0");
  if (r.t_init < 0.0) complain("reservoir.t_init must be >= 0");
  if (!(r.cutoff_tol > 0.0)) complain("reservoir.cutoff_tol must be > 0");
  if (!(r.psd_tol >= 0.0)) complain("reservoir.psd_tol must be >= 0");

  const TaskOptions& o = spec.options;
  if (o.d < 0) complain("options.d must be >= 0");
  if (o.d_c < 0) complain("options.d_c must be >= 0");
  if (o.d_q < 0) complain("options.d_q must be >= 0");
  if (o.q_a > 1.0) complain("options.q_a must be <= 1");
  if (o.q_b > 1.0) complain("options.q_b must be <= 1");
  if (!(o.f > 0.0)) complain("options.f must be > 0");
  if (o.encoding != "amplitude" && o.encoding != "phase") {
    complain("options.encoding must be amplitude|phase");
  }
  if (o.target_dim < 2) complain("options.target_dim must be >= 2");
  if (o.mode_set != "in" && o.mode_set != "rv" && o.mode_set != "all") {
    complain("options.mode_set must be in|rv|all");
  }
  if (o.trainable != "wo" && o.trainable != "wio") {
    complain("options.trainable must be wo|wio");
  }
  if (o.cost != "ef" && o.cost != "ew") complain("options.cost must be ef|ew");
  if (o.mixer_modes < 1) complain("options.mixer_modes must be >= 1");
  if (o.max_iters < 1) complain("options.max_iters must be >= 1");
  if (o.d_max_classical < 0) complain("options.d_max_classical must be >= 0");
  if (o.d_max_quantum < 0) complain("options.d_max_quantum must be >= 0");
  if (o.esn_nodes < 1) complain("options.esn_nodes must be >= 1");
  if (!std::isfinite(o.snr_db)) complain("options.snr_db must be finite");
  if (o.sample_steps < 0) complain("options.sample_steps must be >= 0");
  if (o.kerr.has_value() && !std::isfinite(*o.kerr)) {
    complain("options.kerr must be finite");
  }

  for (std::size_t a = 0; a < spec.sweep.size(); ++a) {
    const SweepAxis& axis = spec.sweep[a];
    const auto& names = sweep_parameter_names();
    if (std::find(names.begin(), names.end(), axis.name) == names.end()) {
      complain("unknown sweep parameter '" + axis.name + "'");
    }
    if (axis.values.empty()) {
      complain("sweep axis '" + axis.name + "' has no values");
    }
    for (std::size_t b = a + 1; b < spec.sweep.size(); ++b) {
      if (spec.sweep[b].name == axis.name) {
        complain("duplicate sweep axis '" + axis.name + "'");
      }
    }
  }
  (void)task_known;
  if (!bad.empty()) {
    std::string msg = "invalid spec: ";
    for (std::size_t i = 0; i < bad.size(); ++i) {
      if (i > 0) msg += "; ";
      msg += bad[i];
    }
    throw std::invalid_argument(msg);
  }
}

std::string spec_hash(const ExperimentSpec& spec) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(fnv1a(serialize_spec(spec))));
  return std::string(buf);
}

std::map<std::string, double> run_cell(const ExperimentSpec& spec,
                                       const std::vector<double>& point,
                                       int sweep_index, int trial,
                                       std::vector<GridFile>* grids) {
  if (point.size() != spec.sweep.size()) {
    throw std::invalid_argument("run_cell: point size does not match sweep axes");
  }
  ReservoirConfig cfg = spec.reservoir;
  TaskOptions opt = spec.options;
  for (std::size_t a = 0; a < point.size(); ++a) {
    apply_axis(spec.sweep[a].name, point[a], cfg, opt);
  }
  const int L = spec.train_length;
  const int T = spec.eval_length;
  const std::uint64_t seed = derive_seed(
      spec.base_seed, static_cast<std::uint64_t>(sweep_index),
      static_cast<std::uint64_t>(trial));
  const TaskId id = task_id(spec.task);

  if (id != TaskId::kEsnBaseline) {
    // Fresh couplings per trial; channel preparation keeps the onsite
    // nonlinearity on by default, the tomography tasks run linear sites.
    const double q_strength =
        opt.kerr.has_value()
            ? *opt.kerr
            : (id == TaskId::kDepolarizingPrep ? cfg.gamma : 0.0);
    Rng rng(derive_seed(seed, 0));
    randomize_couplings(cfg, q_strength, rng);
    cfg.seed = seed;
  }

  switch (id) {
    case TaskId::kSwitchEqualizer:
      return cell_switch_equalizer(cfg, opt, L, T, seed, sweep_index, trial, grids);
    case TaskId::kCvClosedLoop:
      return cell_cv_closed_loop(cfg, opt, L, T, seed);
    case TaskId::kCvNontemporal:
      return cell_cv_nontemporal(cfg, opt, L, T, seed, sweep_index, trial, grids);
    case TaskId::kDepolarizingPrep:
      return cell_depolarizing_prep(cfg, opt, L, T, seed, sweep_index, trial, grids);
    case TaskId::kMemoryCapacity:
      return cell_memory_capacity(cfg, opt, L, T, seed);
    case TaskId::kEsnBaseline:
      return cell_esn_baseline(opt, L, T, seed);
  }
  throw std::logic_error("unreachable task dispatch");
}

ResultTable run_experiment(const ExperimentSpec& spec, int jobs) {
  validate_spec(spec);
  const auto t0 = std::chrono::steady_clock::now();

  const std::vector<std::vector<double>> points = sweep_points(spec);
  const int n_cells = static_cast<int>(points.size()) * spec.trials;

  struct CellOutcome {
    MetricMap metrics;
    std::vector<GridFile> grids;
    std::string error;
    bool failed = false;
  };
  std::vector<CellOutcome> outcomes(static_cast<size_t>(n_cells));

  const auto work = [&](int cell) {
    const int sweep_index = cell / spec.trials;
    const int trial = cell % spec.trials;
    CellOutcome& out = outcomes[static_cast<size_t>(cell)];
    try {
      out.metrics = run_cell(spec, points[static_cast<size_t>(sweep_index)],
                             sweep_index, trial, &out.grids);
    } catch (const std::exception& e) {
      out.failed = true;
      out.error = e.what();
    }
  };

  const int workers = std::max(1, std::min(jobs, n_cells));
  if (workers == 1) {
    for (int c = 0; c < n_cells; ++c) work(c);
  } else {
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    pool.reserve(static_cast<size_t>(workers));
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (int c = next.fetch_add(1); c < n_cells; c = next.fetch_add(1)) {
          work(c);
        }
      });
    }
    for (std::thread& t : pool) t.join();
  }

  ResultTable table;
  table.task = spec.task;
  for (const SweepAxis& axis : spec.sweep) table.param_names.push_back(axis.name);
  for (int c = 0; c < n_cells; ++c) {
    const int sweep_index = c / spec.trials;
    const int trial = c % spec.trials;
    CellOutcome& out = outcomes[static_cast<size_t>(c)];
    if (out.failed) {
      table.failures.push_back({sweep_index, trial, out.error});
      continue;
    }
    for (const auto& [metric, value] : out.metrics) {
      table.rows.push_back(
          {points[static_cast<size_t>(sweep_index)], trial, metric, value});
    }
    for (GridFile& g : out.grids) table.grids.push_back(std::move(g));
  }
  table.config_hash = spec_hash(spec);
  table.code_version = kCodeVersion;
  table.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return table;
}

std::vector<Aggregate> aggregate(const ResultTable& table) {
  struct Acc {
    std::vector<double> point;
    std::string metric;
    double sum = 0.0;
    double sumsq = 0.0;
    int count = 0;
  };
  std::vector<Acc> accs;
  const auto key_of = [](const ResultRow& r) {
    std::string k = r.metric;
    for (double v : r.point) k += "|" + fmt_double(v);
    return k;
  };
  std::map<std::string, std::size_t> index;
  for (const ResultRow& r : table.rows) {
    const std::string k = key_of(r);
    auto it = index.find(k);
    if (it == index.end()) {
      index.emplace(k, accs.size());
      accs.push_back({r.point, r.metric, r.value, r.value * r.value, 1});
    } else {
      Acc& a = accs[it->second];
      a.sum += r.value;
      a.sumsq += r.value * r.value;
      a.count += 1;
    }
  }
  std::vector<Aggregate> out;
  out.reserve(accs.size());
  for (const Acc& a : accs) {
    Aggregate g;
    g.point = a.point;
    g.metric = a.metric;
    g.count = a.count;
    g.mean = a.sum / a.count;
    g.stddev = std::sqrt(std::max(0.0, a.sumsq / a.count - g.mean * g.mean));
    out.push_back(std::move(g));
  }
  return out;
}

std::string table_to_csv(const ResultTable& table) {
  std::ostringstream os;
  os << "task";
  for (const std::string& p : table.param_names) os << "," << p;
  os << ",trial,metric,value\n";
  for (const ResultRow& r : table.rows) {
    os << table.task;
    for (double v : r.point) os << "," << fmt_double(v);
    os << "," << r.trial << "," << r.metric << "," << fmt_double(r.value)
       << "\n";
  }
  return os.str();
}

std::string table_to_json(const ResultTable& table) {
  json j;
  j["task"] = table.task;
  j["param_names"] = table.param_names;
  json rows = json::array();
  for (const ResultRow& r : table.rows) {
    rows.push_back({{"point", r.point},
                    {"trial", r.trial},
                    {"metric", r.metric},
                    {"value", r.value}});
  }
  j["rows"] = rows;
  json failures = json::array();
  for (const CellFailure& f : table.failures) {
    failures.push_back({{"sweep_index", f.sweep_index},
                        {"trial", f.trial},
                        {"message", f.message}});
  }
  j["failures"] = failures;
  j["metadata"] = {{"config_hash", table.config_hash},
                   {"code_version", table.code_version},
                   {"wall_seconds", table.wall_seconds}};
  json grid_names = json::array();
  for (const GridFile& g : table.grids) grid_names.push_back(g.name);
  j["grid_names"] = grid_names;
  return j.dump(2);
}

ResultTable table_from_json(const std::string& text) {
  const json j = json::parse(text);
  ResultTable t;
  j.at("task").get_to(t.task);
  j.at("param_names").get_to(t.param_names);
  for (const json& r : j.at("rows")) {
    ResultRow row;
    r.at("point").get_to(row.point);
    r.at("trial").get_to(row.trial);
    r.at("metric").get_to(row.metric);
    r.at("value").get_to(row.value);
    t.rows.push_back(std::move(row));
  }
  for (const json& f : j.at("failures")) {
    CellFailure fail;
    f.at("sweep_index").get_to(fail.sweep_index);
    f.at("trial").get_to(fail.trial);
    f.at("message").get_to(fail.message);
    t.failures.push_back(std::move(fail));
  }
  const json& meta = j.at("metadata");
  meta.at("config_hash").get_to(t.config_hash);
  meta.at("code_version").get_to(t.code_version);
  meta.at("wall_seconds").get_to(t.wall_seconds);
  return t;
}

void write_grid_file(const std::string& path, const Eigen::MatrixXd& values) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write grid file '" + path + "'");
  for (Eigen::Index i = 0; i < values.rows(); ++i) {
    for (Eigen::Index k = 0; k < values.cols(); ++k) {
      if (k > 0) out << ' ';
      out << fmt_double(values(i, k));
    }
    out << '\n';
  }
  if (!out) throw std::runtime_error("failed while writing '" + path + "'");
}

Eigen::MatrixXd read_grid_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read grid file '" + path + "'");
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::vector<double> row;
    double v = 0.0;
    while (ls >> v) row.push_back(v);
    if (!row.empty()) rows.push_back(std::move(row));
  }
  if (rows.empty()) throw std::runtime_error("grid file '" + path + "' is empty");
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()),
                    static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != rows.front().size()) {
      throw std::runtime_error("grid file '" + path + "' has ragged rows");
    }
    for (std::size_t k = 0; k < rows[i].size(); ++k) {
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = rows[i][k];
    }
  }
  return m;
}

void emit_outputs(const ResultTable& table, const std::string& dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) {
    throw std::runtime_error("cannot create output directory '" + dir +
                             "': " + ec.message());
  }
  {
    std::ofstream csv(fs::path(dir) / "results.csv");
    if (!csv) throw std::runtime_error("cannot write results.csv in '" + dir + "'");
    csv << table_to_csv(table);
  }
  {
    std::ofstream js(fs::path(dir) / "results.json");
    if (!js) throw std::runtime_error("cannot write results.json in '" + dir + "'");
    js << table_to_json(table);
  }
  if (!table.grids.empty()) {
    const fs::path gdir = fs::path(dir) / "grids";
    fs::create_directories(gdir, ec);
    if (ec) {
      throw std::runtime_error("cannot create grid directory '" +
                               gdir.string() + "': " + ec.message());
    }
    for (const GridFile& g : table.grids) {
      write_grid_file((gdir / (g.name + ".txt")).string(), g.values);
    }
  }
}

}  // namespace qrp
