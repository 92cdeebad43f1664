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

#include "qrp/nelder_mead.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace qrp {

namespace {

double checked_cost(const std::function<double(const Eigen::VectorXd&)>& cost,
                    const Eigen::VectorXd& x) {
  const double value = cost(x);
  if (!std::isfinite(value)) {
    std::ostringstream msg;
    msg << "nelder_mead: non-finite cost " << value << " at x = [";
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      if (i > 0) msg << ", ";
      msg << x[i];
    }
    msg << "]";
    throw std::runtime_error(msg.str());
  }
  return value;
}

}  // namespace

NelderMeadResult nelder_mead(
    const std::function<double(const Eigen::VectorXd&)>& cost,
    const Eigen::VectorXd& x0, const NelderMeadOptions& opts) {
  if (x0.size() == 0) {
    throw std::invalid_argument("nelder_mead: empty initial point");
  }
  if (opts.initial_steps.size() != 0 && opts.initial_steps.size() != x0.size()) {
    throw std::invalid_argument(
        "nelder_mead: initial_steps size does not match the initial point");
  }
  constexpr double kReflect = 1.0;
  constexpr double kExpand = 2.0;
  constexpr double kContract = 0.5;
  constexpr double kShrink = 0.5;

  const int n = static_cast<int>(x0.size());
  std::vector<Eigen::VectorXd> verts(n + 1, x0);
  for (int i = 0; i < n; ++i) {
    const double step =
        opts.initial_steps.size() != 0 ? opts.initial_steps[i] : opts.initial_step;
    verts[i + 1][i] += step == 0.0 ? opts.initial_step : step;
  }
  std::vector<double> vals(n + 1);
  for (int i = 0; i <= n; ++i) vals[i] = checked_cost(cost, verts[i]);

  std::vector<int> order(n + 1);
  auto sort_order = [&] {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return vals[a] < vals[b]; });
  };

  NelderMeadResult result;
  Eigen::VectorXd centroid(n), xr(n), xe(n), xc(n);
  int iter = 0;
  for (; iter < opts.max_iters; ++iter) {
    sort_order();
    const int best = order[0];
    const int worst = order[n];
    const int second_worst = order[n - 1];

    double diameter = 0.0;
    for (int i = 0; i <= n; ++i) {
      if (i == best) continue;
      diameter = std::max(
          diameter, (verts[i] - verts[best]).cwiseAbs().maxCoeff());
    }
    if (diameter < opts.tolerance) {
      result.converged = true;
      break;
    }

    centroid.setZero();
    for (int i = 0; i <= n; ++i) {
      if (i == worst) continue;
      centroid += verts[i];
    }
    centroid /= static_cast<double>(n);

    xr = centroid + kReflect * (centroid - verts[worst]);
    const double fr = checked_cost(cost, xr);
    if (fr < vals[best]) {
      xe = centroid + kExpand * (xr - centroid);
      const double fe = checked_cost(cost, xe);
      if (fe < fr) {
        verts[worst] = xe;
        vals[worst] = fe;
      } else {
        verts[worst] = xr;
        vals[worst] = fr;
      }
    } else if (fr < vals[second_worst]) {
      verts[worst] = xr;
      vals[worst] = fr;
    } else {
      bool shrink = false;
      if (fr < vals[worst]) {
        xc = centroid + kContract * (xr - centroid);
        const double fc = checked_cost(cost, xc);
        if (fc <= fr) {
          verts[worst] = xc;
          vals[worst] = fc;
        } else {
          shrink = true;
        }
      } else {
        xc = centroid - kContract * (centroid - verts[worst]);
        const double fc = checked_cost(cost, xc);
        if (fc < vals[worst]) {
          verts[worst] = xc;
          vals[worst] = fc;
        } else {
          shrink = true;
        }
      }
      if (shrink) {
        for (int i = 0; i <= n; ++i) {
          if (i == best) continue;
          verts[i] = verts[best] + kShrink * (verts[i] - verts[best]);
          vals[i] = checked_cost(cost, verts[i]);
        }
      }
    }
    result.best_history.push_back(*std::min_element(vals.begin(), vals.end()));
  }

  sort_order();
  result.x = verts[order[0]];
  result.value = vals[order[0]];
  result.iterations = iter;
  if (result.best_history.empty() || result.best_history.back() > result.value) {
    result.best_history.push_back(result.value);
  }
  return result;
}

}  // namespace qrp
