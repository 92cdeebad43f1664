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

#include "qrp/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "qrp/readout.hpp"
#include "qrp/states.hpp"

namespace qrp {

namespace {

constexpr double kDegenerateVariance = 1e-12;

// Usable window for delay regressions: l = d_max .. L-1, split 4:1 in time.
struct Window {
  int start;
  int train_end;  // exclusive
  int end;        // exclusive
};

Window delay_window(long rows, int d_max) {
  if (d_max < 0) throw std::invalid_argument("memory capacity: d_max < 0");
  const int start = d_max;
  const int total = static_cast<int>(rows) - start;
  if (total < 10) {
    throw std::invalid_argument(
        "memory capacity: not enough samples beyond d_max");
  }
  const int eval_count = std::max(1, total / 5);
  return {start, start + (total - eval_count), static_cast<int>(rows)};
}

double pearson_sq(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  const double ma = a.mean();
  const double mb = b.mean();
  const Eigen::VectorXd da = a.array() - ma;
  const Eigen::VectorXd db = b.array() - mb;
  const double va = da.squaredNorm();
  const double vb = db.squaredNorm();
  if (va < kDegenerateVariance || vb < kDegenerateVariance) return 0.0;
  const double cov = da.dot(db);
  return (cov * cov) / (va * vb);
}

Eigen::MatrixXd bures_distances(const std::vector<CMatrix>& states,
                                double psd_tol) {
  const long n = static_cast<long>(states.size());
  Eigen::MatrixXd dist = Eigen::MatrixXd::Zero(n, n);
  for (long j = 0; j < n; ++j) {
    for (long k = j + 1; k < n; ++k) {
      const double d = bures_angle(states[j], states[k], psd_tol);
      dist(j, k) = d;
      dist(k, j) = d;
    }
  }
  return dist;
}

}  // namespace

double rmsf(const std::vector<CMatrix>& targets,
            const std::vector<CMatrix>& predictions, double psd_tol) {
  if (targets.size() != predictions.size()) {
    throw std::invalid_argument("rmsf: length mismatch");
  }
  if (targets.empty()) throw std::invalid_argument("rmsf: empty input");
  double acc = 0.0;
  for (size_t i = 0; i < targets.size(); ++i) {
    const double f = fidelity(targets[i], predictions[i], psd_tol);
    acc += f * f;
  }
  return std::sqrt(acc / static_cast<double>(targets.size()));
}

double ser(const std::vector<int>& true_symbols,
           const std::vector<int>& predicted_symbols) {
  if (true_symbols.size() != predicted_symbols.size()) {
    throw std::invalid_argument("ser: length mismatch");
  }
  if (true_symbols.empty()) throw std::invalid_argument("ser: empty input");
  long wrong = 0;
  for (size_t i = 0; i < true_symbols.size(); ++i) {
    wrong += true_symbols[i] != predicted_symbols[i] ? 1 : 0;
  }
  return static_cast<double>(wrong) / static_cast<double>(true_symbols.size());
}

double ew_error(const std::vector<Eigen::VectorXd>& target_grids,
                const std::vector<Eigen::VectorXd>& predicted_grids) {
  if (target_grids.size() != predicted_grids.size()) {
    throw std::invalid_argument("ew_error: length mismatch");
  }
  if (target_grids.empty()) throw std::invalid_argument("ew_error: empty input");
  double acc = 0.0;
  for (size_t i = 0; i < target_grids.size(); ++i) {
    const Eigen::VectorXd& wt = target_grids[i];
    const Eigen::VectorXd& wp = predicted_grids[i];
    if (wt.size() != wp.size()) {
      throw std::invalid_argument("ew_error: grid shape mismatch");
    }
    const double den = (wt + wp).squaredNorm();
    acc += den > 0.0 ? (wt - wp).squaredNorm() / den : 0.0;
  }
  return std::sqrt(acc / static_cast<double>(target_grids.size()));
}

double nrmse(const std::vector<double>& truth,
             const std::vector<double>& predicted, int horizon) {
  if (horizon < 1 || truth.size() < static_cast<size_t>(horizon) ||
      predicted.size() < static_cast<size_t>(horizon)) {
    throw std::invalid_argument("nrmse: horizon exceeds the sequences");
  }
  double mse = 0.0;
  double mean = 0.0;
  for (int i = 0; i < horizon; ++i) mean += truth[i];
  mean /= horizon;
  double var = 0.0;
  for (int i = 0; i < horizon; ++i) {
    const double e = predicted[i] - truth[i];
    mse += e * e;
    var += (truth[i] - mean) * (truth[i] - mean);
  }
  mse /= horizon;
  var /= horizon;
  return std::sqrt(mse / std::max(var, kDegenerateVariance));
}

std::vector<double> nrmse_curve(const std::vector<double>& truth,
                                const std::vector<double>& predicted) {
  const int n = static_cast<int>(std::min(truth.size(), predicted.size()));
  std::vector<double> curve(n);
  double se = 0.0, sum = 0.0, sum_sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double e = predicted[i] - truth[i];
    se += e * e;
    sum += truth[i];
    sum_sq += truth[i] * truth[i];
    const double t = i + 1.0;
    const double var = sum_sq / t - (sum / t) * (sum / t);
    curve[i] = std::sqrt((se / t) / std::max(var, kDegenerateVariance));
  }
  return curve;
}

int vpt(const std::vector<double>& errors_by_horizon, double epsilon) {
  int valid = 0;
  for (double e : errors_by_horizon) {
    if (e > epsilon) break;
    ++valid;
  }
  return valid;
}

MemoryProfile memory_capacity_classical(const Eigen::MatrixXd& features,
                                        const std::vector<double>& u_seq,
                                        int d_max) {
  if (static_cast<size_t>(features.rows()) != u_seq.size()) {
    throw std::invalid_argument(
        "memory capacity: features and inputs are misaligned");
  }
  const Window w = delay_window(features.rows(), d_max);
  const int n_train = w.train_end - w.start;
  const int n_eval = w.end - w.train_end;

  MemoryProfile profile;
  profile.d_max = d_max;
  profile.values.resize(d_max + 1);
  const Eigen::MatrixXd x_train = features.middleRows(w.start, n_train);
  const Eigen::MatrixXd x_eval = features.middleRows(w.train_end, n_eval);
  const double eta = default_ridge_eta(x_train);
  for (int d = 0; d <= d_max; ++d) {
    Eigen::MatrixXd y_train(n_train, 1);
    for (int i = 0; i < n_train; ++i) y_train(i, 0) = u_seq[w.start + i - d];
    const ReadoutWeights head = ridge_fit(x_train, y_train, eta);
    const Eigen::VectorXd predicted = head.apply_rows(x_eval).col(0);
    Eigen::VectorXd truth(n_eval);
    for (int i = 0; i < n_eval; ++i) truth[i] = u_seq[w.train_end + i - d];
    profile.values[d] = pearson_sq(predicted, truth);
  }
  profile.capacity = profile.values.sum();
  return profile;
}

double distance_correlation_sq(const Eigen::MatrixXd& dist_a,
                               const Eigen::MatrixXd& dist_b) {
  const long n = dist_a.rows();
  if (dist_a.cols() != n || dist_b.rows() != n || dist_b.cols() != n) {
    throw std::invalid_argument(
        "distance correlation: square matrices of equal size required");
  }
  if (n < 2) throw std::invalid_argument("distance correlation: need >= 2 points");
  auto centered = [n](const Eigen::MatrixXd& d) {
    const Eigen::VectorXd row_mean = d.rowwise().mean();
    const double total_mean = d.mean();
    Eigen::MatrixXd c = d;
    c.colwise() -= row_mean;
    c.rowwise() -= row_mean.transpose();
    c.array() += total_mean;
    return c;
  };
  const Eigen::MatrixXd a = centered(dist_a);
  const Eigen::MatrixXd b = centered(dist_b);
  const double scale = 1.0 / static_cast<double>(n * n);
  const double v_ab = scale * a.cwiseProduct(b).sum();
  const double v_a = scale * a.cwiseProduct(a).sum();
  const double v_b = scale * b.cwiseProduct(b).sum();
  if (v_a < kDegenerateVariance || v_b < kDegenerateVariance) return 0.0;
  return v_ab / std::sqrt(v_a * v_b);
}

double distance_correlation_sq(const std::vector<CMatrix>& a,
                               const std::vector<CMatrix>& b, double psd_tol) {
  if (a.size() != b.size()) {
    throw std::invalid_argument("distance correlation: length mismatch");
  }
  return distance_correlation_sq(bures_distances(a, psd_tol),
                                 bures_distances(b, psd_tol));
}

MemoryProfile quantum_memory_capacity(const Eigen::MatrixXd& features,
                                      const std::vector<DensityMatrix>& input_states,
                                      int d_max) {
  if (static_cast<size_t>(features.rows()) != input_states.size()) {
    throw std::invalid_argument(
        "quantum memory capacity: features and states are misaligned");
  }
  if (input_states.empty()) {
    throw std::invalid_argument("quantum memory capacity: empty input");
  }
  const Window w = delay_window(features.rows(), d_max);
  const int n_train = w.train_end - w.start;
  const int n_eval = w.end - w.train_end;
  const int dim = static_cast<int>(input_states.front().space.total_dim());
  const int vec_len = 2 * dim * dim;

  MemoryProfile profile;
  profile.d_max = d_max;
  profile.values.resize(d_max + 1);
  const Eigen::MatrixXd x_train = features.middleRows(w.start, n_train);
  const Eigen::MatrixXd x_eval = features.middleRows(w.train_end, n_eval);
  const double eta = default_ridge_eta(x_train);
  for (int d = 0; d <= d_max; ++d) {
    Eigen::MatrixXd y_train(n_train, vec_len);
    for (int i = 0; i < n_train; ++i) {
      y_train.row(i) =
          vectorize_density(input_states[w.start + i - d].mat).transpose();
    }
    const ReadoutWeights head = ridge_fit(x_train, y_train, eta);
    const Eigen::MatrixXd predicted = head.apply_rows(x_eval);
    std::vector<CMatrix> outputs;
    std::vector<CMatrix> truth;
    outputs.reserve(n_eval);
    truth.reserve(n_eval);
    for (int i = 0; i < n_eval; ++i) {
      outputs.push_back(reconstruct_density(predicted.row(i).transpose(), dim).mat);
      truth.push_back(input_states[w.train_end + i - d].mat);
    }
    profile.values[d] = distance_correlation_sq(outputs, truth);
  }
  profile.capacity = profile.values.sum();
  return profile;
}

AutocorrelationResult autocorrelation_timescale(const Eigen::MatrixXd& traces,
                                                double dt) {
  const long samples = traces.rows();
  const long sites = traces.cols();
  if (samples < 2 || sites < 1) {
    throw std::invalid_argument("autocorrelation: need >= 2 samples");
  }
  if (!(dt > 0.0)) throw std::invalid_argument("autocorrelation: dt must be > 0");

  Eigen::MatrixXd centered = traces;
  centered.rowwise() -= traces.colwise().mean();

  AutocorrelationResult result;
  result.curve.resize(samples);
  for (long lag = 0; lag < samples; ++lag) {
    const long span = samples - lag;
    double acc = 0.0;
    for (long j = 0; j < sites; ++j) {
      acc += centered.col(j).head(span).dot(centered.col(j).tail(span));
    }
    result.curve[lag] = acc / static_cast<double>(span * sites);
  }

  result.crossed = false;
  result.crossing_time = static_cast<double>(samples) * dt;
  for (long lag = 1; lag < samples; ++lag) {
    const double prev = result.curve[lag - 1];
    const double cur = result.curve[lag];
    if (prev > 0.0 && cur <= 0.0) {
      const double frac = prev / (prev - cur);
      result.crossing_time = (static_cast<double>(lag - 1) + frac) * dt;
      result.crossed = true;
      break;
    }
  }
  return result;
}

}  // namespace qrp
