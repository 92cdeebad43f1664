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

#include "qrp/quantum_readout.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <list>
#include <memory>
#include <sstream>
#include <stdexcept>
#include <utility>

#include "qrp/nelder_mead.hpp"
#include "qrp/states.hpp"
#include "qrp/wigner.hpp"

namespace qrp {

namespace {

constexpr complexd kI(0.0, 1.0);

int total_level(const HilbertSpace& space, long idx) {
  int total = 0;
  for (int m = 0; m < space.modes(); ++m) total += space.level_of(idx, m);
  return total;
}

// Probability mass in Fock sectors the truncation cannot represent in full:
// a photon-conserving mixer can route any sector up to min(dim) - 1 without
// loss, so everything above that is at risk of truncation artifacts.
void check_overflow(const CMatrix& rho, const HilbertSpace& space,
                    double overflow_tol) {
  int min_dim = space.dim(0);
  for (int m = 1; m < space.modes(); ++m) min_dim = std::min(min_dim, space.dim(m));
  const int n_safe = min_dim - 1;
  double mass = 0.0;
  for (long i = 0; i < space.total_dim(); ++i) {
    if (total_level(space, i) > n_safe) mass += rho(i, i).real();
  }
  if (mass > overflow_tol) {
    std::ostringstream msg;
    msg << "output_state: probability mass " << mass
        << " sits above the photon-number range the cutoffs can mix exactly"
           " (safe total occupation " << n_safe << "); raise the cutoffs";
    throw CutoffError(-1, mass, msg.str());
  }
}

// Phase of each row's largest-modulus entry (first maximum wins).
Eigen::VectorXd row_gauge_phases(const CMatrix& rows) {
  Eigen::VectorXd phases(rows.rows());
  for (Eigen::Index m = 0; m < rows.rows(); ++m) {
    Eigen::Index best = 0;
    double best_mod = -1.0;
    for (Eigen::Index j = 0; j < rows.cols(); ++j) {
      const double mod = std::abs(rows(m, j));
      if (mod > best_mod) {
        best_mod = mod;
        best = j;
      }
    }
    phases[m] = std::arg(rows(m, best));
  }
  return phases;
}

// rho_out picked up in the raw (un-gauged) frame differs from the canonical
// one by a phase rotation per output mode; fixing row m by e^{-i phi_m}
// multiplies entry (a, b) by e^{i (n_b - n_a) . phi}.
void apply_gauge(CMatrix& reduced, const HilbertSpace& out_space,
                 const Eigen::VectorXd& phases) {
  const long dim = out_space.total_dim();
  Eigen::VectorXd accum(dim);
  for (long i = 0; i < dim; ++i) {
    double p = 0.0;
    for (int m = 0; m < out_space.modes(); ++m) {
      p += out_space.level_of(i, m) * phases[m];
    }
    accum[i] = p;
  }
  for (long a = 0; a < dim; ++a) {
    for (long b = 0; b < dim; ++b) {
      reduced(a, b) *= std::exp(kI * (accum[b] - accum[a]));
    }
  }
}

double squash(double raw, double gamma) { return gamma / (1.0 + std::exp(-raw)); }

double unsquash(double w, double gamma) {
  const double x = std::clamp(w / gamma, 1e-6, 1.0 - 1e-6);
  return std::log(x / (1.0 - x));
}

std::uint64_t hash_matrix(const Eigen::MatrixXd& m) {
  std::uint64_t h = 1469598103934665603ULL;
  auto mix = [&h](std::uint64_t v) {
    for (int b = 0; b < 8; ++b) {
      h ^= (v >> (8 * b)) & 0xffULL;
      h *= 1099511628211ULL;
    }
  };
  mix(static_cast<std::uint64_t>(m.rows()));
  mix(static_cast<std::uint64_t>(m.cols()));
  for (Eigen::Index i = 0; i < m.size(); ++i) {
    std::uint64_t bits = 0;
    std::memcpy(&bits, m.data() + i, sizeof(double));
    mix(bits);
  }
  return h;
}

struct RecordSet {
  std::vector<CMatrix> selected;  // marginal on the selected modes, per target
  std::vector<CMatrix> baseline;  // marginal on the first input modes
  PhysicalityStats stats;         // physicality record of the producing run
};

// Shared engine behind cost_eval and train_quantum_readout.  Dynamics depend
// on the input coupling only, so recorded marginals are memoized per coupling
// and mixer-parameter moves are evaluated against the cached records.
class Evaluator {
 public:
  Evaluator(const ReservoirConfig& cfg, const HybridSequence& data,
            const TrainSpec& spec)
      : cfg_(cfg), data_(data), spec_(spec) {
    validate_config(cfg_);
    if (spec_.max_iters < 1) {
      throw std::invalid_argument("quantum readout: max_iters must be >= 1");
    }
    if (!(spec_.tolerance > 0.0)) {
      throw std::invalid_argument("quantum readout: tolerance must be > 0");
    }
    if (spec_.eval_fraction < 0.0 || spec_.eval_fraction >= 1.0) {
      throw std::invalid_argument(
          "quantum readout: eval_fraction must lie in [0, 1)");
    }
    if (data_.target_states.empty()) {
      throw std::invalid_argument("quantum readout: no target states");
    }
    if (data_.target_states.size() > data_.u.size()) {
      throw std::invalid_argument(
          "quantum readout: more target states than input steps");
    }
    offset_ = static_cast<int>(data_.u.size() - data_.target_states.size());

    selected_ = select_modes(cfg_, spec_.mode_set);
    n_r_ = static_cast<int>(selected_.size());
    if (spec_.M < 1 || spec_.M > n_r_) {
      throw std::invalid_argument("quantum readout: M out of range");
    }

    const HilbertSpace composite = composite_space(cfg_);
    union_modes_ = selected_;
    for (int k = 0; k < cfg_.n_inputs(); ++k) union_modes_.push_back(k);
    std::sort(union_modes_.begin(), union_modes_.end());
    union_modes_.erase(std::unique(union_modes_.begin(), union_modes_.end()),
                       union_modes_.end());
    std::vector<int> union_dims;
    for (int m : union_modes_) union_dims.push_back(composite.dim(m));
    union_space_ = HilbertSpace(union_dims);
    auto position_of = [this](int mode) {
      return static_cast<int>(
          std::find(union_modes_.begin(), union_modes_.end(), mode) -
          union_modes_.begin());
    };
    for (int m : selected_) sel_in_union_.push_back(position_of(m));
    const int n_base = std::min(spec_.M, cfg_.n_inputs());
    for (int k = 0; k < n_base; ++k) base_in_union_.push_back(position_of(k));

    std::vector<int> sel_dims;
    for (int m : selected_) sel_dims.push_back(composite.dim(m));
    sel_space_ = HilbertSpace(sel_dims);
    std::vector<int> out_dims(sel_dims.begin(), sel_dims.begin() + spec_.M);
    out_space_ = HilbertSpace(out_dims);
    out_dim_ = out_space_.total_dim();
    base_dim_ = 1;
    for (int p : base_in_union_) base_dim_ *= union_space_.dim(p);

    const long target_dim = data_.target_states.front().space.total_dim();
    for (const DensityMatrix& t : data_.target_states) {
      if (t.space.total_dim() != target_dim) {
        throw std::invalid_argument(
            "quantum readout: target states have mixed dimensions");
      }
    }
    if (target_dim != out_dim_) {
      throw std::invalid_argument(
          "quantum readout: output dimension does not match the targets");
    }

    if (spec_.cost == CostKind::kEw) {
      if (spec_.M != 1) {
        throw std::invalid_argument(
            "quantum readout: the Wigner cost needs a single output mode");
      }
      wbasis_ = std::make_unique<WignerBasis>(
          WignerBasis::standard(static_cast<int>(out_dim_)));
      target_wigner_.reserve(data_.target_states.size());
      for (const DensityMatrix& t : data_.target_states) {
        target_wigner_.push_back(wbasis_->evaluate_flat(t.mat));
      }
    }

    quad_.reserve(static_cast<size_t>(n_r_) * n_r_);
    std::vector<CMatrix> lowering;
    for (int j = 0; j < n_r_; ++j) {
      lowering.push_back(annihilator(sel_space_, j).mat);
    }
    for (int j = 0; j < n_r_; ++j) {
      for (int k = 0; k < n_r_; ++k) {
        quad_.push_back(lowering[j].adjoint() * lowering[k]);
      }
    }
  }

  int n_targets() const { return static_cast<int>(data_.target_states.size()); }
  int theta_size() const { return n_r_ * n_r_; }
  int param_size() const {
    return theta_size() + (spec_.trainable == Trainable::kWio
                               ? static_cast<int>(cfg_.W_in.size())
                               : 0);
  }
  int n_r() const { return n_r_; }

  Eigen::MatrixXd w_in_for(const Eigen::VectorXd& params) const {
    if (spec_.trainable != Trainable::kWio) return cfg_.W_in;
    Eigen::MatrixXd w(cfg_.W_in.rows(), cfg_.W_in.cols());
    const Eigen::VectorXd raw = params.tail(cfg_.W_in.size());
    for (Eigen::Index i = 0; i < w.size(); ++i) {
      w.data()[i] = squash(raw[i], cfg_.gamma);
    }
    return w;
  }

  Eigen::VectorXd raw_of_initial_coupling() const {
    Eigen::VectorXd raw(cfg_.W_in.size());
    for (Eigen::Index i = 0; i < raw.size(); ++i) {
      raw[i] = unsquash(cfg_.W_in.data()[i], cfg_.gamma);
    }
    return raw;
  }

  PhysicalityStats stats_of(const Eigen::VectorXd& params) {
    return records_for(w_in_for(params)).stats;
  }

  double evaluate(const Eigen::VectorXd& params, int lo, int hi) {
    if (params.size() != param_size()) {
      throw std::invalid_argument("quantum readout: parameter size mismatch");
    }
    const Eigen::VectorXd theta = params.head(theta_size());
    const RecordSet& records = records_for(w_in_for(params));

    const CMatrix g = hermitian_from_params(theta, n_r_);
    CMatrix gen = CMatrix::Zero(sel_space_.total_dim(), sel_space_.total_dim());
    for (int j = 0; j < n_r_; ++j) {
      for (int k = 0; k < n_r_; ++k) {
        gen.noalias() += g(j, k) * quad_[static_cast<size_t>(j) * n_r_ + k];
      }
    }
    const CMatrix u = unitary_exp_i(gen);
    const Eigen::VectorXd phases =
        row_gauge_phases(unitary_exp_i(g).topRows(spec_.M));

    // rho_out(m, n) = Tr[sigma E_nm] with E_nm = U^dag (|n><m| ox I) U;
    // assembling the E matrices once per theta leaves O(dim^2) work per state.
    const long dim = sel_space_.total_dim();
    const long rest = dim / out_dim_;
    std::vector<CMatrix> e_ops;
    e_ops.reserve(static_cast<size_t>(out_dim_) * (out_dim_ + 1) / 2);
    for (long m = 0; m < out_dim_; ++m) {
      for (long n = m; n < out_dim_; ++n) {
        CMatrix e = CMatrix::Zero(dim, dim);
        for (long r = 0; r < rest; ++r) {
          e.noalias() += u.row(n * rest + r).adjoint() * u.row(m * rest + r);
        }
        e_ops.push_back(std::move(e));
      }
    }

    double acc = 0.0;
    CMatrix out(out_dim_, out_dim_);
    for (int i = lo; i < hi; ++i) {
      const CMatrix& sigma = records.selected[i];
      size_t op = 0;
      for (long m = 0; m < out_dim_; ++m) {
        for (long n = m; n < out_dim_; ++n, ++op) {
          const complexd value =
              (sigma.array() * e_ops[op].transpose().array()).sum();
          out(m, n) = value;
          out(n, m) = std::conj(value);
        }
      }
      apply_gauge(out, out_space_, phases);
      acc += cost_term(hermitize(out), i);
    }
    return std::sqrt(acc / std::max(1, hi - lo));
  }

  double baseline(int lo, int hi) {
    if (base_dim_ != out_dim_) {
      throw std::invalid_argument(
          "quantum readout: input-mode dimension does not match the targets,"
          " no baseline available");
    }
    const RecordSet& records = records_for(cfg_.W_in);
    double acc = 0.0;
    for (int i = lo; i < hi; ++i) acc += cost_term(records.baseline[i], i);
    return std::sqrt(acc / std::max(1, hi - lo));
  }

 private:
  double cost_term(const CMatrix& out, int target_idx) {
    if (spec_.cost == CostKind::kEf) {
      const double f =
          fidelity(out, data_.target_states[target_idx].mat, cfg_.psd_tol);
      return (1.0 - f) * (1.0 - f);
    }
    const Eigen::VectorXd wp = wbasis_->evaluate_flat(out);
    const Eigen::VectorXd& wt = target_wigner_[target_idx];
    const double den = (wt + wp).squaredNorm();
    return den > 0.0 ? (wt - wp).squaredNorm() / den : 0.0;
  }

  const RecordSet& records_for(const Eigen::MatrixXd& w_in) {
    const std::uint64_t key = hash_matrix(w_in);
    for (auto it = cache_.begin(); it != cache_.end(); ++it) {
      if (it->first == key) {
        cache_.splice(cache_.begin(), cache_, it);
        return cache_.front().second;
      }
    }

    ReservoirConfig local = cfg_;
    local.W_in = w_in;
    derive_input_rates(local);
    // Keep dimensions fixed across the cache: record physicality instead of
    // retrying with larger cutoffs mid-optimization.
    local.cutoff_policy = CutoffPolicy::kWarn;
    PhysicalityStats stats;
    std::vector<CMatrix> margs;
    run_sequence(local, data_, &stats, &union_modes_, &margs);

    RecordSet rs;
    rs.stats = stats;
    const int nt = n_targets();
    rs.selected.reserve(nt);
    rs.baseline.reserve(nt);
    const bool union_is_selected = sel_in_union_.size() == union_modes_.size();
    for (int i = 0; i < nt; ++i) {
      CMatrix sel = union_is_selected
                        ? std::move(margs[offset_ + i])
                        : partial_trace(margs[offset_ + i], union_space_,
                                        sel_in_union_);
      check_overflow(sel, sel_space_, spec_.overflow_tol);
      if (!union_is_selected) {
        rs.baseline.push_back(
            partial_trace(margs[offset_ + i], union_space_, base_in_union_));
      } else {
        rs.baseline.push_back(partial_trace(sel, sel_space_, base_in_union_));
      }
      rs.selected.push_back(std::move(sel));
    }
    if (cache_.size() >= 2) cache_.pop_back();
    cache_.emplace_front(key, std::move(rs));
    return cache_.front().second;
  }

  ReservoirConfig cfg_;
  const HybridSequence& data_;
  TrainSpec spec_;
  std::vector<int> selected_;
  std::vector<int> union_modes_;
  std::vector<int> sel_in_union_;
  std::vector<int> base_in_union_;
  HilbertSpace sel_space_;
  HilbertSpace union_space_;
  HilbertSpace out_space_;
  long out_dim_ = 0;
  long base_dim_ = 0;
  int n_r_ = 0;
  int offset_ = 0;
  std::unique_ptr<WignerBasis> wbasis_;
  std::vector<Eigen::VectorXd> target_wigner_;
  std::vector<CMatrix> quad_;  // a_j^dag a_k on the selected space
  std::list<std::pair<std::uint64_t, RecordSet>> cache_;
};

}  // namespace

CMatrix hermitian_from_params(const Eigen::VectorXd& theta, int n) {
  if (n < 1 || theta.size() != static_cast<Eigen::Index>(n) * n) {
    throw std::invalid_argument(
        "hermitian_from_params: expected n^2 parameters");
  }
  CMatrix g = CMatrix::Zero(n, n);
  for (int j = 0; j < n; ++j) g(j, j) = theta[j];
  int idx = n;
  for (int j = 0; j < n; ++j) {
    for (int k = j + 1; k < n; ++k, idx += 2) {
      g(j, k) = complexd(theta[idx], theta[idx + 1]);
      g(k, j) = std::conj(g(j, k));
    }
  }
  return g;
}

CMatrix modes_from_params(const Eigen::VectorXd& theta, int M, int N_R) {
  if (M < 1 || M > N_R) {
    throw std::invalid_argument("modes_from_params: M out of range");
  }
  const CMatrix u = unitary_exp_i(hermitian_from_params(theta, N_R));
  CMatrix rows = u.topRows(M);
  const Eigen::VectorXd phases = row_gauge_phases(rows);
  for (int m = 0; m < M; ++m) {
    rows.row(m) *= std::exp(-kI * phases[m]);
  }
  return rows;
}

CMatrix extend_to_unitary(const CMatrix& rows) {
  const Eigen::Index m = rows.rows();
  const Eigen::Index n = rows.cols();
  if (m < 1 || m > n) {
    throw std::invalid_argument("extend_to_unitary: need 1 <= rows <= cols");
  }
  const double defect =
      (rows * rows.adjoint() - CMatrix::Identity(m, m)).cwiseAbs().maxCoeff();
  if (defect > 1e-8) {
    throw std::invalid_argument("extend_to_unitary: rows are not orthonormal");
  }
  if (m == n) return rows;
  Eigen::MatrixXcd a = rows.adjoint();
  Eigen::HouseholderQR<Eigen::MatrixXcd> qr(a);
  Eigen::MatrixXcd q = qr.householderQ();
  CMatrix full(n, n);
  full.topRows(m) = rows;
  full.bottomRows(n - m) = q.rightCols(n - m).adjoint();
  return full;
}

std::vector<int> select_modes(const ReservoirConfig& cfg, ModeSet set) {
  const int n_in = cfg.n_inputs();
  std::vector<int> modes;
  switch (set) {
    case ModeSet::kIn:
      for (int k = 0; k < n_in; ++k) modes.push_back(k);
      break;
    case ModeSet::kRv:
      for (int j = 0; j < cfg.N; ++j) modes.push_back(n_in + j);
      break;
    case ModeSet::kAll:
      for (int m = 0; m < n_in + cfg.N; ++m) modes.push_back(m);
      break;
  }
  if (modes.empty()) {
    throw std::invalid_argument("select_modes: the mode set is empty");
  }
  return modes;
}

int mode_count(const ReservoirConfig& cfg, ModeSet set) {
  return static_cast<int>(select_modes(cfg, set).size());
}

DensityMatrix output_state(const DensityMatrix& rho, const ModeMixer& mixer,
                           double overflow_tol) {
  if (rho.space.modes() != mixer.N_R) {
    throw std::invalid_argument(
        "output_state: state must live on exactly the N_R selected modes");
  }
  if (mixer.M < 1 || mixer.M > mixer.N_R) {
    throw std::invalid_argument("output_state: M out of range");
  }
  check_overflow(rho.mat, rho.space, overflow_tol);

  const CMatrix g = hermitian_from_params(mixer.theta, mixer.N_R);
  CMatrix gen = CMatrix::Zero(rho.space.total_dim(), rho.space.total_dim());
  for (int j = 0; j < mixer.N_R; ++j) {
    const CMatrix raise_j = annihilator(rho.space, j).mat.adjoint();
    for (int k = 0; k < mixer.N_R; ++k) {
      gen.noalias() += g(j, k) * (raise_j * annihilator(rho.space, k).mat);
    }
  }
  const CMatrix u = unitary_exp_i(gen);
  const CMatrix rotated = u * rho.mat * u.adjoint();

  std::vector<int> keep(mixer.M);
  for (int m = 0; m < mixer.M; ++m) keep[m] = m;
  CMatrix reduced = partial_trace(rotated, rho.space, keep);

  std::vector<int> out_dims;
  for (int m = 0; m < mixer.M; ++m) out_dims.push_back(rho.space.dim(m));
  const HilbertSpace out_space(out_dims);
  apply_gauge(reduced, out_space,
              row_gauge_phases(unitary_exp_i(g).topRows(mixer.M)));
  return {out_space, hermitize(reduced)};
}

double cost_eval(const Eigen::VectorXd& params, const HybridSequence& data,
                 const TrainSpec& spec, const ReservoirConfig& cfg) {
  Evaluator ev(cfg, data, spec);
  return ev.evaluate(params, 0, ev.n_targets());
}

TrainResult train_quantum_readout(const ReservoirConfig& cfg,
                                  const HybridSequence& data,
                                  const TrainSpec& spec) {
  Evaluator ev(cfg, data, spec);
  const int nt = ev.n_targets();
  const int eval_count =
      spec.eval_fraction > 0.0
          ? std::max(1, static_cast<int>(std::lround(spec.eval_fraction * nt)))
          : 0;
  const int train_count = nt - eval_count;
  if (train_count < 1) {
    throw std::invalid_argument(
        "train_quantum_readout: no training targets left after the split");
  }

  const int ts = ev.theta_size();
  TrainResult result;

  // Mixer-only warmup at the initial coupling; for kWo this is the whole fit.
  NelderMeadOptions theta_opts;
  theta_opts.max_iters = spec.max_iters;
  theta_opts.tolerance = spec.tolerance;
  theta_opts.initial_step = spec.theta_step;
  Eigen::VectorXd raw0;
  std::function<double(const Eigen::VectorXd&)> theta_cost;
  if (spec.trainable == Trainable::kWio) {
    raw0 = ev.raw_of_initial_coupling();
    theta_cost = [&](const Eigen::VectorXd& th) {
      Eigen::VectorXd packed(th.size() + raw0.size());
      packed << th, raw0;
      return ev.evaluate(packed, 0, train_count);
    };
  } else {
    theta_cost = [&](const Eigen::VectorXd& th) {
      return ev.evaluate(th, 0, train_count);
    };
  }
  const NelderMeadResult warm =
      nelder_mead(theta_cost, Eigen::VectorXd::Zero(ts), theta_opts);
  result.history = warm.best_history;
  result.iterations = warm.iterations;

  Eigen::VectorXd params;
  if (spec.trainable == Trainable::kWio) {
    Eigen::VectorXd start(ts + raw0.size());
    start << warm.x, raw0;
    NelderMeadOptions joint_opts;
    joint_opts.max_iters = spec.max_iters;
    joint_opts.tolerance = spec.tolerance;
    joint_opts.initial_steps = Eigen::VectorXd::Constant(start.size(), spec.theta_step);
    joint_opts.initial_steps.tail(raw0.size()).setConstant(spec.wio_step);
    const NelderMeadResult joint = nelder_mead(
        [&](const Eigen::VectorXd& p) { return ev.evaluate(p, 0, train_count); },
        start, joint_opts);
    result.history.insert(result.history.end(), joint.best_history.begin(),
                          joint.best_history.end());
    result.iterations += joint.iterations;
    params = joint.x;
  } else {
    params = warm.x;
  }

  result.params = params;
  result.mixer.theta = params.head(ts);
  result.mixer.M = spec.M;
  result.mixer.N_R = ev.n_r();
  result.mixer.mode_set = spec.mode_set;
  result.W_in = ev.w_in_for(params);
  result.train_error = ev.evaluate(params, 0, train_count);
  result.eval_error =
      eval_count > 0 ? ev.evaluate(params, train_count, nt) : result.train_error;
  result.baseline_error = eval_count > 0 ? ev.baseline(train_count, nt)
                                         : ev.baseline(0, train_count);
  result.stats = ev.stats_of(params);
  return result;
}

}  // namespace qrp
