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

#include <cstdint>
#include <vector>

#include "qrp/operators.hpp"
#include "qrp/sequence.hpp"

namespace qrp {

// Four-level symbol stream pushed through a dispersive FIR filter, a cubic
// memoryless distortion and additive Gaussian noise at the given SNR.
struct EqualizerData {
  std::vector<int> symbols;  // i.i.d. uniform over {-3, -1, 1, 3}
  std::vector<double> u;     // distorted, noisy observations
};
EqualizerData gen_equalizer_data(int length, std::uint64_t seed,
                                 double snr_db = 24.0);

// Generalized Pauli (Weyl-Heisenberg) unitaries U_{aD+b} = X^a Z^b with
// Tr U_i^dag U_j = D delta_ij; U_0 is the identity.
std::vector<CMatrix> weyl_basis(int D);

struct KrausChannel {
  HilbertSpace space;
  std::vector<CMatrix> kraus_ops;

  // Throws std::invalid_argument unless sum K^dag K = I within 1e-9.
  void validate() const;
};

// sum_i K_i rho K_i^dag.
CMatrix apply_channel(const KrausChannel& ch, const CMatrix& rho);

// N(rho) = (1 - q) rho + q I/D realized over the Weyl-Heisenberg basis.
KrausChannel depolarizing_channel(double q, int D);

// Channels A and B applied in a coherently controlled order: control qubit
// |0> routes A after B, |1> the reverse, prepared in sqrt(s)|0> +
// sqrt(1-s)|1>.  Returns the joint system (x) control state, control least
// significant.
DensityMatrix quantum_switch(const DensityMatrix& rho, double s,
                             const KrausChannel& ch_a,
                             const KrausChannel& ch_b);

// Full switch-plus-equalizer stream: qubit inputs beta_l, distorted classical
// inputs u_l, joint-state targets sigma_l = switch(beta_{l-d}, (3+s_{l-d})/6)
// and symbol targets s_{l-d}.  targets[i] corresponds to input step
// max(d, 2) + i; the first max(d, 2) steps carry no target.
HybridSequence switch_task_sequence(int length, std::uint64_t seed, double q_a,
                                    double q_b, int d);

enum class CvEncoding { kAmplitude, kPhase };

// Squeezed target S(xi) beta S(xi)^dag with xi = s e^{i pi/4} (amplitude
// encoding) or xi = 0.3 e^{i 2 pi s} (phase encoding).
DensityMatrix cv_target(const DensityMatrix& beta, double s, CvEncoding enc);

// s_l = 0.5 + 0.5 sin(l pi f / 510), always in [0, 1].
double control_signal(long l, double f);

// Convex-combination targets s_{l-d_c} I/D + (1 - s_{l-d_c}) beta_{l-d_q},
// emitted for l >= max(d_c, d_q); targets[i] corresponds to input step
// max(d_c, d_q) + i.
std::vector<DensityMatrix> depolarizing_target(
    const std::vector<double>& s_seq, const std::vector<DensityMatrix>& beta_seq,
    int D, int d_c, int d_q);

// Thermal input states with mean occupation (r cos phi)^2, r uniform on
// [0, 0.3] and phi uniform on [0, pi].
std::vector<DensityMatrix> cv_input_states(int length, int cutoff,
                                           std::uint64_t seed);

// Squeezed thermal input states: the same (r, phi) draw sets the mean
// occupation (r cos phi)^2 and a real squeeze parameter r sin phi.
std::vector<DensityMatrix> cv_squeezed_input_states(int length, int cutoff,
                                                    std::uint64_t seed);

}  // namespace qrp
