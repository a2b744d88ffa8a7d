// Copyright 2026 The floss Authors
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

#include "floss/propensity.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <utility>

#include "absl/strings/str_cat.h"
#include "floss/status_macros.h"

namespace floss {
namespace {

struct MomentEval {
  Eigen::VectorXd residuals;
  Eigen::MatrixXd jacobian;
  int below_floor = 0;
};

absl::Status CheckInputs(const Eigen::VectorXd& beta,
                         const std::vector<UserRecord>& users,
                         const PropensityBasis& basis) {
  if (users.empty()) return absl::InvalidArgumentError("no users");
  const int dim_d = static_cast<int>(users.front().d_rest.size());
  if (beta.size() != dim_d + 2) {
    return absl::InvalidArgumentError(absl::StrCat(
        "beta has ", beta.size(), " entries, expected ", dim_d + 2));
  }
  if (basis.size() < 1) return absl::InvalidArgumentError("empty basis");
  for (const UserRecord& u : users) {
    if (u.r == 1 && !u.s.has_value()) {
      return absl::FailedPreconditionError(absl::StrCat(
          "responsive user ", u.id, " has no recorded satisfaction"));
    }
  }
  return absl::OkStatus();
}

// Residuals, and the Jacobian when requested. Unchecked.
MomentEval Evaluate(const Eigen::VectorXd& beta,
                    const std::vector<UserRecord>& users,
                    const std::vector<Eigen::VectorXd>& f,
                    bool with_jacobian) {
  const int p_dim = static_cast<int>(beta.size());
  const int q = static_cast<int>(f.front().size());
  MomentEval out;
  out.residuals = Eigen::VectorXd::Zero(q);
  if (with_jacobian) out.jacobian = Eigen::MatrixXd::Zero(q, p_dim);
  Eigen::VectorXd x(p_dim);
  for (size_t i = 0; i < users.size(); ++i) {
    const UserRecord& u = users[i];
    if (u.r == 0) {
      out.residuals -= f[i];
      continue;
    }
    const double p = PropensityScore(beta, u.d_rest, *u.s);
    if (p < kPropensityFloor) {
      ++out.below_floor;
      continue;
    }
    out.residuals += (1.0 / p - 1.0) * f[i];
    if (with_jacobian) {
      // d(1/p)/d(eta) = -(1 - p) / p for the logistic link.
      x[0] = 1.0;
      x.segment(1, u.d_rest.size()) = u.d_rest;
      x[p_dim - 1] = *u.s;
      out.jacobian.noalias() -= ((1.0 - p) / p) * f[i] * x.transpose();
    }
  }
  const double n = static_cast<double>(users.size());
  out.residuals /= n;
  if (with_jacobian) out.jacobian /= n;
  return out;
}

double SupNorm(const Eigen::VectorXd& v) { return v.cwiseAbs().maxCoeff(); }

double ConditionNumber(const Eigen::MatrixXd& m) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  const Eigen::VectorXd& sv = svd.singularValues();
  if (sv.size() == 0 || sv[sv.size() - 1] == 0.0) {
    return std::numeric_limits<double>::infinity();
  }
  return sv[0] / sv[sv.size() - 1];
}

// Objective for the derivative-free fallback: squared residual norm, +inf
// when any propensity underflows.
double Merit(const Eigen::VectorXd& beta, const std::vector<UserRecord>& users,
             const std::vector<Eigen::VectorXd>& f, int* floor_hits) {
  MomentEval e = Evaluate(beta, users, f, /*with_jacobian=*/false);
  if (e.below_floor > 0) {
    ++*floor_hits;
    return std::numeric_limits<double>::infinity();
  }
  return e.residuals.squaredNorm();
}

// Standard Nelder-Mead (reflection 1, expansion 2, contraction 1/2, shrink
// 1/2). Stops once the best vertex meets the residual tolerance.
Eigen::VectorXd NelderMead(const Eigen::VectorXd& start,
                           const std::vector<UserRecord>& users,
                           const std::vector<Eigen::VectorXd>& f, double tol,
                           int max_evals, int* evals, int* floor_hits) {
  const int q = static_cast<int>(start.size());
  std::vector<Eigen::VectorXd> simplex(q + 1, start);
  std::vector<double> value(q + 1);
  for (int i = 0; i < q; ++i) simplex[i + 1][i] += 0.5;
  for (int i = 0; i <= q; ++i) value[i] = Merit(simplex[i], users, f, floor_hits);
  *evals = q + 1;

  std::vector<int> order(q + 1);
  while (*evals < max_evals) {
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](int a, int b) { return value[a] < value[b]; });
    const int best = order.front();
    const int worst = order.back();
    const int second_worst = order[q - 1];
    if (std::sqrt(value[best]) <= tol) break;

    Eigen::VectorXd centroid = Eigen::VectorXd::Zero(q);
    for (int i = 0; i <= q; ++i) {
      if (i != worst) centroid += simplex[i];
    }
    centroid /= q;

    const Eigen::VectorXd reflected = centroid + (centroid - simplex[worst]);
    const double fr = Merit(reflected, users, f, floor_hits);
    ++*evals;
    if (fr < value[best]) {
      const Eigen::VectorXd expanded =
          centroid + 2.0 * (centroid - simplex[worst]);
      const double fe = Merit(expanded, users, f, floor_hits);
      ++*evals;
      if (fe < fr) {
        simplex[worst] = expanded;
        value[worst] = fe;
      } else {
        simplex[worst] = reflected;
        value[worst] = fr;
      }
      continue;
    }
    if (fr < value[second_worst]) {
      simplex[worst] = reflected;
      value[worst] = fr;
      continue;
    }
    const bool outside = fr < value[worst];
    const Eigen::VectorXd contracted =
        outside ? Eigen::VectorXd(centroid + 0.5 * (reflected - centroid))
                : Eigen::VectorXd(centroid + 0.5 * (simplex[worst] - centroid));
    const double fc = Merit(contracted, users, f, floor_hits);
    ++*evals;
    if (fc < std::min(fr, value[worst])) {
      simplex[worst] = contracted;
      value[worst] = fc;
      continue;
    }
    for (int i = 0; i <= q; ++i) {
      if (i == best) continue;
      simplex[i] = simplex[best] + 0.5 * (simplex[i] - simplex[best]);
      value[i] = Merit(simplex[i], users, f, floor_hits);
      ++*evals;
    }
  }
  const int best = static_cast<int>(
      std::min_element(value.begin(), value.end()) - value.begin());
  return simplex[best];
}

}  // namespace

PropensityBasis::PropensityBasis(std::vector<Function> functions,
                                 std::vector<std::string> names)
    : functions_(std::move(functions)), names_(std::move(names)) {
  names_.resize(functions_.size());
}

PropensityBasis PropensityBasis::Default(int dim_d) {
  std::vector<Function> f;
  std::vector<std::string> names;
  f.push_back([](const Eigen::VectorXd&, double) { return 1.0; });
  names.push_back("1");
  for (int j = 0; j < dim_d; ++j) {
    f.push_back([j](const Eigen::VectorXd& d, double) { return d[j]; });
    names.push_back(absl::StrCat("d", j));
  }
  f.push_back([](const Eigen::VectorXd&, double z) { return z; });
  names.push_back("z");
  return PropensityBasis(std::move(f), std::move(names));
}

Eigen::VectorXd PropensityBasis::Evaluate(const UserRecord& user) const {
  Eigen::VectorXd out(size());
  for (int i = 0; i < size(); ++i) out[i] = functions_[i](user.d_rest, user.z);
  return out;
}

double PropensityScore(const Eigen::VectorXd& beta,
                       const Eigen::VectorXd& d_rest, double s) {
  const Eigen::Index dim_d = d_rest.size();
  return Expit(beta[0] + beta.segment(1, dim_d).dot(d_rest) +
               beta[dim_d + 1] * s);
}

absl::StatusOr<Eigen::VectorXd> MomentResiduals(
    const Eigen::VectorXd& beta, const std::vector<UserRecord>& users,
    const PropensityBasis& basis) {
  FLOSS_RETURN_IF_ERROR(CheckInputs(beta, users, basis));
  std::vector<Eigen::VectorXd> f;
  f.reserve(users.size());
  for (const UserRecord& u : users) f.push_back(basis.Evaluate(u));
  MomentEval e = Evaluate(beta, users, f, /*with_jacobian=*/false);
  if (e.below_floor > 0) {
    return absl::OutOfRangeError(
        absl::StrCat(e.below_floor, " responsive users have p_beta below ",
                     kPropensityFloor));
  }
  return e.residuals;
}

absl::StatusOr<Eigen::MatrixXd> MomentJacobian(
    const Eigen::VectorXd& beta, const std::vector<UserRecord>& users,
    const PropensityBasis& basis) {
  FLOSS_RETURN_IF_ERROR(CheckInputs(beta, users, basis));
  std::vector<Eigen::VectorXd> f;
  f.reserve(users.size());
  for (const UserRecord& u : users) f.push_back(basis.Evaluate(u));
  MomentEval e = Evaluate(beta, users, f, /*with_jacobian=*/true);
  if (e.below_floor > 0) {
    return absl::OutOfRangeError(
        absl::StrCat(e.below_floor, " responsive users have p_beta below ",
                     kPropensityFloor));
  }
  return e.jacobian;
}

absl::StatusOr<PropensityFit> SolveShadowEquations(
    const std::vector<UserRecord>& users, const PropensityBasis& basis,
    const Eigen::VectorXd& init_beta, const SolverOptions& options) {
  FLOSS_RETURN_IF_ERROR(CheckInputs(init_beta, users, basis));
  if (basis.size() != init_beta.size()) {
    return absl::InvalidArgumentError(
        absl::StrCat("basis has ", basis.size(), " functions for ",
                     init_beta.size(), " parameters"));
  }
  if (!(options.tol > 0) || options.max_iter < 1) {
    return absl::InvalidArgumentError("solver needs tol > 0 and max_iter >= 1");
  }
  const int q = static_cast<int>(init_beta.size());

  PropensityFit fit;
  fit.beta = init_beta;
  for (const UserRecord& u : users) (u.r == 1 ? fit.responsive : fit.unresponsive)++;
  if (fit.unresponsive == 0) {
    fit.all_observed = true;
    fit.converged = true;
    return fit;
  }
  if (fit.responsive < q || fit.unresponsive < q) {
    return absl::FailedPreconditionError(absl::StrCat(
        "need at least ", q, " responsive and ", q,
        " unresponsive users; have ", fit.responsive, " and ",
        fit.unresponsive));
  }

  std::vector<Eigen::VectorXd> f;
  f.reserve(users.size());
  Eigen::MatrixXd design(users.size(), q);
  for (size_t i = 0; i < users.size(); ++i) {
    f.push_back(basis.Evaluate(users[i]));
    design.row(i) = f.back().transpose();
  }
  if (Eigen::ColPivHouseholderQR<Eigen::MatrixXd>(design).rank() < q) {
    return absl::InvalidArgumentError(
        "basis functions are redundant on these users (design matrix is "
        "rank-deficient)");
  }

  MomentEval current = Evaluate(fit.beta, users, f, /*with_jacobian=*/true);
  if (current.below_floor > 0) {
    return absl::OutOfRangeError("initial beta puts propensities below floor");
  }
  double sup = SupNorm(current.residuals);
  fit.residual_trajectory.push_back(sup);

  bool stalled = false;
  while (sup > options.tol && fit.iterations < options.max_iter) {
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(current.jacobian);
    if (qr.rank() < q || ConditionNumber(current.jacobian) > 1e12) {
      stalled = true;
      break;
    }
    const Eigen::VectorXd step = qr.solve(-current.residuals);
    const double merit = current.residuals.norm();
    bool accepted = false;
    for (double t = 1.0; t >= 1e-10; t *= 0.5) {
      const Eigen::VectorXd trial = fit.beta + t * step;
      MomentEval next = Evaluate(trial, users, f, /*with_jacobian=*/true);
      if (next.below_floor > 0) {
        ++fit.floor_hits;
        continue;
      }
      if (next.residuals.norm() < merit) {
        fit.beta = trial;
        current = std::move(next);
        accepted = true;
        break;
      }
    }
    ++fit.iterations;
    if (!accepted) {
      stalled = true;
      break;
    }
    sup = SupNorm(current.residuals);
    fit.residual_trajectory.push_back(sup);
  }

  if (stalled && sup > options.tol) {
    fit.used_fallback = true;
    int evals = 0;
    const int budget = 200 * options.max_iter;
    fit.beta = NelderMead(fit.beta, users, f, options.tol, budget, &evals,
                          &fit.floor_hits);
    current = Evaluate(fit.beta, users, f, /*with_jacobian=*/true);
    sup = SupNorm(current.residuals);
    fit.residual_trajectory.push_back(sup);
  }

  fit.final_residual_norm = sup;
  fit.converged = sup <= options.tol && fit.beta.allFinite();
  fit.condition_number = ConditionNumber(current.jacobian);
  return fit;
}

double InverseProbabilityWeight(double pi, double w_max) {
  if (!(pi > 0)) return w_max;
  return std::min(1.0 / pi, w_max);
}

namespace {

absl::StatusOr<WeightTable> BuildTable(
    const std::vector<UserRecord>& users, double w_max,
    const std::function<absl::StatusOr<double>(const UserRecord&)>& pi_of) {
  if (!(w_max >= 1)) {
    return absl::InvalidArgumentError("weight cap must be >= 1");
  }
  WeightTable table;
  for (const UserRecord& u : users) {
    if (u.r != 1) continue;
    FLOSS_ASSIGN_OR_RETURN(double pi, pi_of(u));
    table.user_ids.push_back(u.id);
    table.pi_hat.push_back(pi);
    if (!(pi > 0) || 1.0 / pi > w_max) ++table.clipped;
    table.weights.push_back(InverseProbabilityWeight(pi, w_max));
  }
  return table;
}

}  // namespace

absl::StatusOr<WeightTable> ComputeWeights(const Eigen::VectorXd& beta,
                                           const std::vector<UserRecord>& users,
                                           double w_max) {
  if (!beta.allFinite()) {
    return absl::FailedPreconditionError("beta is not finite");
  }
  return BuildTable(users, w_max,
                    [&](const UserRecord& u) -> absl::StatusOr<double> {
                      if (!u.s.has_value()) {
                        return absl::FailedPreconditionError(absl::StrCat(
                            "responsive user ", u.id,
                            " has no recorded satisfaction"));
                      }
                      if (beta.size() != u.d_rest.size() + 2) {
                        return absl::InvalidArgumentError(
                            "beta does not match covariate dimension");
                      }
                      return PropensityScore(beta, u.d_rest, *u.s);
                    });
}

absl::StatusOr<WeightTable> ComputeWeights(const PropensityFit& fit,
                                           const std::vector<UserRecord>& users,
                                           double w_max) {
  if (!fit.converged) {
    return absl::FailedPreconditionError("propensity fit did not converge");
  }
  if (fit.all_observed) {
    return BuildTable(users, w_max,
                      [](const UserRecord&) -> absl::StatusOr<double> {
                        return 1.0;
                      });
  }
  return ComputeWeights(fit.beta, users, w_max);
}

absl::StatusOr<WeightTable> OracleWeights(const std::vector<UserRecord>& users,
                                          double w_max) {
  return BuildTable(users, w_max,
                    [](const UserRecord& u) -> absl::StatusOr<double> {
                      return u.true_pi;
                    });
}

}  // namespace floss
