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

#ifndef FLOSS_PROPENSITY_H_
#define FLOSS_PROPENSITY_H_

#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "absl/status/statusor.h"
#include "floss/synth.h"

namespace floss {

// The propensity model is
//
//   p_beta(R = 1 | D', S) = expit(beta_0 + beta_D . D' + beta_S * S),
//
// so beta has dim_d + 2 entries. It is identified through a shadow variable
// Z (associated with S, independent of R given S and D') by the moment
// conditions
//
//   E[(R / p_beta(D', S) - 1) * f_i(D', Z)] = 0,   i = 1..q,
//
// which only need S for users with R = 1. With q = dim(beta) basis functions
// the system is exactly identified.

// Probabilities below this are treated as a numerical failure rather than
// silently clamped.
inline constexpr double kPropensityFloor = 1e-12;

class PropensityBasis {
 public:
  using Function =
      std::function<double(const Eigen::VectorXd& d_rest, double z)>;

  PropensityBasis(std::vector<Function> functions,
                  std::vector<std::string> names);

  // f = (1, D'_1, ..., D'_dim_d, Z).
  static PropensityBasis Default(int dim_d);

  int size() const { return static_cast<int>(functions_.size()); }
  const std::vector<std::string>& names() const { return names_; }
  Eigen::VectorXd Evaluate(const UserRecord& user) const;

 private:
  std::vector<Function> functions_;
  std::vector<std::string> names_;
};

double PropensityScore(const Eigen::VectorXd& beta,
                       const Eigen::VectorXd& d_rest, double s);

// Empirical moment vector: entry i is the mean over all users of
// (R / p_beta - 1) * f_i, where R = 0 users contribute exactly -f_i. Any
// number of basis functions is accepted here; the solver needs exactly
// dim(beta).
// Fails if an R = 1 user has no recorded S or if p_beta drops below
// kPropensityFloor for any R = 1 user.
absl::StatusOr<Eigen::VectorXd> MomentResiduals(
    const Eigen::VectorXd& beta, const std::vector<UserRecord>& users,
    const PropensityBasis& basis);

// Analytic derivative of MomentResiduals with respect to beta (q x dim beta).
absl::StatusOr<Eigen::MatrixXd> MomentJacobian(
    const Eigen::VectorXd& beta, const std::vector<UserRecord>& users,
    const PropensityBasis& basis);

struct SolverOptions {
  double tol = 1e-8;  // on the sup-norm of the moment vector
  int max_iter = 200;
};

struct PropensityFit {
  Eigen::VectorXd beta;
  bool converged = false;
  // Nobody was missing; the propensity is identically 1.
  bool all_observed = false;
  double final_residual_norm = 0.0;
  int iterations = 0;
  std::vector<double> residual_trajectory;
  // 2-norm condition number of the Jacobian at the returned beta.
  double condition_number = 0.0;
  // Trial points rejected because some p_beta fell below the floor.
  int floor_hits = 0;
  // The Jacobian was singular and the derivative-free minimiser finished the
  // solve.
  bool used_fallback = false;
  int responsive = 0;
  int unresponsive = 0;
};

// Damped Newton on the moment vector with step halving; falls back to a
// Nelder-Mead minimisation of the squared residual norm when the Jacobian is
// singular or Newton stalls. Non-convergence is reported through
// `converged`, not as an error.
absl::StatusOr<PropensityFit> SolveShadowEquations(
    const std::vector<UserRecord>& users, const PropensityBasis& basis,
    const Eigen::VectorXd& init_beta, const SolverOptions& options = {});

// Sampling weights for responsive users.
struct WeightTable {
  std::vector<int> user_ids;
  std::vector<double> pi_hat;
  std::vector<double> weights;  // min(1 / pi_hat, w_max)
  int clipped = 0;
};

// min(1 / pi, w_max).
double InverseProbabilityWeight(double pi, double w_max);

absl::StatusOr<WeightTable> ComputeWeights(const Eigen::VectorXd& beta,
                                           const std::vector<UserRecord>& users,
                                           double w_max);
// Uses the fit's beta, or unit weights when the fit saw no missingness.
absl::StatusOr<WeightTable> ComputeWeights(const PropensityFit& fit,
                                           const std::vector<UserRecord>& users,
                                           double w_max);

// Weights from the simulator's ground-truth propensities.
absl::StatusOr<WeightTable> OracleWeights(const std::vector<UserRecord>& users,
                                          double w_max);

}  // namespace floss

#endif  // FLOSS_PROPENSITY_H_
