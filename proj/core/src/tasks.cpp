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

#include "qrp/tasks.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "qrp/rng.hpp"
#include "qrp/states.hpp"

namespace qrp {
namespace {

// FIR taps for offsets l+2 .. l-7.
constexpr double kFilterTaps[] = {0.08, -0.12, 1.0,  0.18, -0.1,
                                  0.09, -0.05, 0.04, 0.03, 0.01};
constexpr int kFilterLookahead = 2;

double symbol_at(const std::vector<int>& s, long idx) {
  if (idx < 0 || idx >= static_cast<long>(s.size())) return 0.0;
  return static_cast<double>(s[idx]);
}

}  // namespace

EqualizerData gen_equalizer_data(int length, std::uint64_t seed,
                                 double snr_db) {
  if (length < 10) {
    throw std::invalid_argument(
        "gen_equalizer_data: length must cover the filter support (>= 10)");
  }
  static constexpr int kAlphabet[] = {-3, -1, 1, 3};
  Rng rng(seed);
  EqualizerData data;
  data.symbols.resize(length);
  for (int l = 0; l < length; ++l) {
    data.symbols[l] = kAlphabet[rng.uniform_int(4)];
  }

  // Symbols are zero-mean with E[s^2] = 5, so Var(q) = 5 sum(tap^2); the
  // noise variance realizes the requested SNR against that nominal power.
  double tap_power = 0.0;
  for (double t : kFilterTaps) tap_power += t * t;
  const double var_q = 5.0 * tap_power;
  const double sigma = std::sqrt(var_q / std::pow(10.0, snr_db / 10.0));

  data.u.resize(length);
  for (int l = 0; l < length; ++l) {
    double q = 0.0;
    for (int t = 0; t < static_cast<int>(std::size(kFilterTaps)); ++t) {
      q += kFilterTaps[t] * symbol_at(data.symbols, l + kFilterLookahead - t);
    }
    data.u[l] = q + 0.036 * q * q - 0.011 * q * q * q + sigma * rng.normal();
  }
  return data;
}

std::vector<CMatrix> weyl_basis(int D) {
  if (D < 2) throw std::invalid_argument("weyl_basis: D must be >= 2");
  CMatrix shift = CMatrix::Zero(D, D);
  for (int n = 0; n < D; ++n) shift((n + 1) % D, n) = 1.0;
  CMatrix clock = CMatrix::Zero(D, D);
  const double theta = 2.0 * M_PI / D;
  for (int n = 0; n < D; ++n) {
    clock(n, n) = complexd(std::cos(theta * n), std::sin(theta * n));
  }

  std::vector<CMatrix> basis;
  basis.reserve(static_cast<std::size_t>(D) * D);
  CMatrix xa = CMatrix::Identity(D, D);
  for (int a = 0; a < D; ++a) {
    CMatrix cur = xa;
    for (int b = 0; b < D; ++b) {
      basis.push_back(cur);
      cur = cur * clock;
    }
    xa = shift * xa;
  }
  return basis;
}

void KrausChannel::validate() const {
  const int dim = space.total_dim();
  CMatrix acc = CMatrix::Zero(dim, dim);
  for (const CMatrix& k : kraus_ops) {
    if (k.rows() != dim || k.cols() != dim) {
      throw std::invalid_argument("KrausChannel: operator dimension mismatch");
    }
    acc += k.adjoint() * k;
  }
  if ((acc - CMatrix::Identity(dim, dim)).cwiseAbs().maxCoeff() > 1e-9) {
    throw std::invalid_argument(
        "KrausChannel: completeness sum K^dag K = I violated beyond 1e-9");
  }
}

CMatrix apply_channel(const KrausChannel& ch, const CMatrix& rho) {
  const int dim = ch.space.total_dim();
  if (rho.rows() != dim || rho.cols() != dim) {
    throw std::invalid_argument("apply_channel: state dimension mismatch");
  }
  CMatrix out = CMatrix::Zero(dim, dim);
  for (const CMatrix& k : ch.kraus_ops) out += k * rho * k.adjoint();
  return out;
}

KrausChannel depolarizing_channel(double q, int D) {
  if (q < 0.0 || q > 1.0) {
    throw std::invalid_argument("depolarizing_channel: q must be in [0, 1]");
  }
  KrausChannel ch;
  ch.space = HilbertSpace({D});
  if (q < 1.0) {
    ch.kraus_ops.push_back(std::sqrt(1.0 - q) * CMatrix::Identity(D, D));
  }
  if (q > 0.0) {
    // sum_i U_i rho U_i^dag = D tr(rho) I over the full basis, so the scaled
    // set contributes exactly q I/D.
    const double w = std::sqrt(q) / D;
    for (const CMatrix& u : weyl_basis(D)) ch.kraus_ops.push_back(w * u);
  }
  return ch;
}

DensityMatrix quantum_switch(const DensityMatrix& rho, double s,
                             const KrausChannel& ch_a,
                             const KrausChannel& ch_b) {
  const int D = rho.space.total_dim();
  if (ch_a.space.total_dim() != D || ch_b.space.total_dim() != D) {
    throw std::invalid_argument("quantum_switch: channel dimension mismatch");
  }
  if (s < 0.0 || s > 1.0) {
    throw std::invalid_argument("quantum_switch: s must be in [0, 1]");
  }

  // W_ij (rho (x) |psi_s><psi_s|) W_ij^dag summed over Kraus pairs, written
  // out per control block: with P = K^A_i K^B_j and Q = K^B_j K^A_i,
  //   A00 += s P rho P^dag           A01 += sqrt(s(1-s)) P rho Q^dag
  //   A11 += (1-s) Q rho Q^dag       A10 = A01^dag.
  CMatrix a00 = CMatrix::Zero(D, D);
  CMatrix a01 = CMatrix::Zero(D, D);
  CMatrix a11 = CMatrix::Zero(D, D);
  for (const CMatrix& ka : ch_a.kraus_ops) {
    for (const CMatrix& kb : ch_b.kraus_ops) {
      const CMatrix p = ka * kb;
      const CMatrix qq = kb * ka;
      const CMatrix pr = p * rho.mat;
      const CMatrix qr = qq * rho.mat;
      a00 += pr * p.adjoint();
      a01 += pr * qq.adjoint();
      a11 += qr * qq.adjoint();
    }
  }
  const double c = std::sqrt(s * (1.0 - s));
  a01 *= c;

  HilbertSpace joint({D, 2});
  CMatrix out = CMatrix::Zero(2 * D, 2 * D);
  for (int m = 0; m < D; ++m) {
    for (int n = 0; n < D; ++n) {
      out(2 * m, 2 * n) = s * a00(m, n);
      out(2 * m, 2 * n + 1) = a01(m, n);
      out(2 * m + 1, 2 * n) = std::conj(a01(n, m));
      out(2 * m + 1, 2 * n + 1) = (1.0 - s) * a11(m, n);
    }
  }
  return DensityMatrix{joint, std::move(out)};
}

HybridSequence switch_task_sequence(int length, std::uint64_t seed, double q_a,
                                    double q_b, int d) {
  if (d < 0) throw std::invalid_argument("switch_task_sequence: d must be >= 0");
  if (length <= d + 7) {
    throw std::invalid_argument(
        "switch_task_sequence: length must exceed d + filter support");
  }
  const KrausChannel ch_a = depolarizing_channel(q_a, 2);
  const KrausChannel ch_b = depolarizing_channel(q_b, 2);
  EqualizerData eq = gen_equalizer_data(length, derive_seed(seed, 1));

  HybridSequence seq;
  seq.d = d;
  seq.u = eq.u;
  seq.beta.reserve(length);
  for (int l = 0; l < length; ++l) {
    seq.beta.push_back(random_state(2, derive_seed(seed, 2, l), StateKind::kPure));
  }

  const int offset = std::max(d, 2);
  for (int l = offset; l < length; ++l) {
    const double s = (3.0 + eq.symbols[l - d]) / 6.0;
    seq.target_states.push_back(
        quantum_switch(seq.beta[l - d], s, ch_a, ch_b));
    seq.target_symbols.push_back(eq.symbols[l - d]);
  }
  return seq;
}

DensityMatrix cv_target(const DensityMatrix& beta, double s, CvEncoding enc) {
  if (beta.space.modes() != 1) {
    throw std::invalid_argument("cv_target: single-mode states only");
  }
  const int dim = beta.space.total_dim();
  complexd xi;
  if (enc == CvEncoding::kAmplitude) {
    xi = s * complexd(std::cos(M_PI / 4.0), std::sin(M_PI / 4.0));
  } else {
    xi = 0.3 * complexd(std::cos(2.0 * M_PI * s), std::sin(2.0 * M_PI * s));
  }
  const CMatrix sq = squeeze_operator(dim, xi);
  return DensityMatrix{beta.space, sq * beta.mat * sq.adjoint()};
}

double control_signal(long l, double f) {
  return 0.5 + 0.5 * std::sin(static_cast<double>(l) * M_PI * f / 510.0);
}

std::vector<DensityMatrix> depolarizing_target(
    const std::vector<double>& s_seq,
    const std::vector<DensityMatrix>& beta_seq, int D, int d_c, int d_q) {
  if (d_c < 0 || d_q < 0) {
    throw std::invalid_argument("depolarizing_target: delays must be >= 0");
  }
  if (s_seq.size() != beta_seq.size()) {
    throw std::invalid_argument("depolarizing_target: sequence length mismatch");
  }
  for (double s : s_seq) {
    if (s < 0.0 || s > 1.0) {
      throw std::invalid_argument("depolarizing_target: s must be in [0, 1]");
    }
  }
  const CMatrix eye_over_d =
      CMatrix::Identity(D, D) / static_cast<double>(D);
  const int offset = std::max(d_c, d_q);
  std::vector<DensityMatrix> targets;
  targets.reserve(s_seq.size() - offset);
  for (std::size_t l = offset; l < s_seq.size(); ++l) {
    const DensityMatrix& beta = beta_seq[l - d_q];
    if (beta.space.total_dim() != D) {
      throw std::invalid_argument("depolarizing_target: state dim != D");
    }
    const double s = s_seq[l - d_c];
    targets.push_back(DensityMatrix{
        beta.space, s * eye_over_d + (1.0 - s) * beta.mat});
  }
  return targets;
}

std::vector<DensityMatrix> cv_input_states(int length, int cutoff,
                                           std::uint64_t seed) {
  Rng rng(seed);
  std::vector<DensityMatrix> states;
  states.reserve(length);
  for (int l = 0; l < length; ++l) {
    const double r = rng.uniform(0.0, 0.3);
    const double phi = rng.uniform(0.0, M_PI);
    const double amp = r * std::cos(phi);
    states.push_back(thermal_state(cutoff, amp * amp));
  }
  return states;
}

std::vector<DensityMatrix> cv_squeezed_input_states(int length, int cutoff,
                                                    std::uint64_t seed) {
  Rng rng(seed);
  const HilbertSpace space({cutoff});
  std::vector<DensityMatrix> states;
  states.reserve(length);
  for (int l = 0; l < length; ++l) {
    const double r = rng.uniform(0.0, 0.3);
    const double phi = rng.uniform(0.0, M_PI);
    const double amp = r * std::cos(phi);
    const CMatrix s = squeeze_operator(cutoff, r * std::sin(phi));
    CMatrix rho = s * thermal_state(cutoff, amp * amp).mat * s.adjoint();
    // Truncated squeezing is only approximately unitary; restore the trace.
    rho /= rho.trace().real();
    states.push_back(DensityMatrix{space, std::move(rho)});
  }
  return states;
}

}  // namespace qrp
