#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <vector>

#include "shapelab/common.hpp"
#include "shapelab/densities.hpp"
#include "shapelab/errors.hpp"

namespace shapelab {

// ---------------------------------------------------------------------------
// Bounded convex least squares.

// Solution of min sum (Y_i - g_i)^2 over {(g, xi): g_j >= g_i + xi_i.(X_j -
// X_i), 0 <= g <= Gamma}. `xi` rows are the per-point subgradients.
struct ConvexFit {
  Matrix x;            // n x d design
  Vector y;            // observations
  Vector g;            // fitted values in [0, Gamma]
  Matrix xi;           // n x d subgradients
  double gamma = 0.0;
  double objective = 0.0;      // sum of squared residuals
  double kkt_residual = 0.0;   // projected-gradient / complementarity norm
  double max_violation = 0.0;  // worst pairwise constraint violation
  bool converged = true;
  int iterations = 0;

  // Largest affine minorant consistent with the fit, clipped to [0, Gamma]:
  // the canonical out-of-sample extension.
  double predict(const Vector& point) const;
};

struct ConvexFitOptions {
  double tol = 1e-6;          // KKT residual target
  double feas_tol = 1e-7;     // allowed pairwise violation
  int max_iterations = 100000;
  int max_outer_rounds = 40;  // constraint-generation rounds
};

ConvexFit convex_ls_fit(const Matrix& x, const Vector& y, double gamma,
                        const ConvexFitOptions& opts = {});

double convex_predict(const ConvexFit& fit, const Vector& point);

// Exact KKT residual of a candidate fit given multipliers are reconstructed
// internally; exposed for the property suite.
double convex_fit_check_feasibility(const ConvexFit& fit);

// ---------------------------------------------------------------------------
// 1-D log-concave maximum likelihood.

// Concave piecewise-linear log-density with knots at the order statistics,
// supported exactly on [min X, max X], normalized to integrate to one.
struct Mle1d {
  Vector knots;      // m sorted distinct values
  Vector log_f;      // log-density at the knots
  double objective = 0.0;  // (1/n) sum log f(X_i)
  bool converged = true;
  int iterations = 0;

  double log_eval(double x) const;
  double eval(double x) const;
  double mean() const;            // mean of the fitted density
  double integral() const;        // should be 1 up to normalization error
  // Squared Hellinger distance to a reference density (1-D quadrature).
  double hellinger_sq_to(const Density& ref) const;
};

struct Mle1dOptions {
  double tol = 1e-9;       // relative objective stall tolerance
  int max_iterations = 20000;
};

Mle1d logconcave_mle_1d(const Vector& x, const Mle1dOptions& opts = {});

// ---------------------------------------------------------------------------
// Tournament (minimum-distance) estimator over a finite net.

struct WitnessSet {
  // Indicator of the witness region A_{ij}.
  std::function<bool(const Vector&)> contains;
  Vector candidate_prob;  // P_f(A) for every candidate f
};

struct TournamentNet {
  std::vector<DensityPtr> candidates;
  std::vector<WitnessSet> witnesses;
};

// Net over the candidates with witness sets A_ij = {f_i > f_j}, their
// probabilities computed by 1-D quadrature (exact TV witnesses).
TournamentNet make_tournament_net_1d(std::vector<DensityPtr> candidates,
                                     long budget = 2'000'000);

struct TournamentResult {
  int index = 0;
  Vector scores;  // max_A |P_n(A) - P_f(A)| per candidate
};

// argmin over candidates of max over witnesses of |P_n(A) - P_f(A)|,
// ties broken by smallest index.
TournamentResult tournament_estimate(const Matrix& samples,
                                     const TournamentNet& net);

// ---------------------------------------------------------------------------
// Sample standardization (split in thirds: covariance, mean, payload).

struct AffineMap {
  Matrix a;  // y = a x + b
  Vector b;

  Vector apply(const Vector& x) const { return a * x + b; }
  Vector invert(const Vector& y) const;
  Matrix apply_rows(const Matrix& xs) const;
};

struct StandardizeResult {
  AffineMap transform;      // the standardizing map T
  Matrix standardized;      // T applied to the last third
  Eigen::Index used;        // 3m points actually used (input may be trimmed)
};

StandardizeResult standardize(const Matrix& samples);

}  // namespace shapelab
