#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

#include "shapelab/estimators.hpp"
#include "shapelab/quadrature.hpp"

namespace shapelab {

// ---------------------------------------------------------------------------
// Tournament estimator.

namespace {

// Sign-change locations of f_i - f_j on [-R, R]; these are the witness-set
// boundaries, found on a grid and sharpened by bisection.
std::vector<double> crossing_points(const Density& p, const Density& q, double r) {
  const int grid = 1024;
  std::vector<double> cuts;
  auto diff = [&](double t) {
    Vector v(1);
    v << t;
    return p.eval(v) - q.eval(v);
  };
  double prev_x = -r, prev_v = diff(prev_x);
  for (int k = 1; k <= grid; ++k) {
    double x = -r + 2.0 * r * k / grid;
    double v = diff(x);
    if ((prev_v <= 0 && v > 0) || (prev_v >= 0 && v < 0) ||
        (prev_v > 0 && v <= 0) || (prev_v < 0 && v >= 0)) {
      double a = prev_x, b = x;
      for (int t = 0; t < 60; ++t) {
        double mid = 0.5 * (a + b);
        if ((diff(a) <= 0) == (diff(mid) <= 0))
          a = mid;
        else
          b = mid;
      }
      cuts.push_back(0.5 * (a + b));
    }
    prev_x = x;
    prev_v = v;
  }
  return cuts;
}

}  // namespace

TournamentNet make_tournament_net_1d(std::vector<DensityPtr> candidates,
                                     long budget) {
  if (candidates.empty())
    throw UsageError("make_tournament_net_1d: empty candidate list");
  for (const auto& c : candidates)
    if (c->dim() != 1)
      throw DomainError("make_tournament_net_1d: candidates must be 1-D");

  TournamentNet net;
  net.candidates = candidates;
  const int m = static_cast<int>(candidates.size());
  double r = 0;
  for (const auto& c : candidates) r = std::max(r, c->support_radius());

  for (int i = 0; i < m; ++i) {
    for (int j = i + 1; j < m; ++j) {
      WitnessSet ws;
      DensityPtr pi = candidates[i], pj = candidates[j];
      ws.contains = [pi, pj](const Vector& x) {
        return pi->eval(x) > pj->eval(x);
      };
      std::vector<double> cuts = crossing_points(*pi, *pj, r);
      for (double b : pi->breakpoints_1d()) cuts.push_back(b);
      for (double b : pj->breakpoints_1d()) cuts.push_back(b);
      ws.candidate_prob.resize(m);
      for (int f = 0; f < m; ++f) {
        const Density& cf = *candidates[f];
        auto integrand = [&](double t) {
          Vector v(1);
          v << t;
          return ws.contains(v) ? cf.eval(v) : 0.0;
        };
        ws.candidate_prob[f] =
            integrate(integrand, -r, r, 1e-9, budget, cuts).value;
      }
      net.witnesses.push_back(std::move(ws));
    }
  }
  return net;
}

TournamentResult tournament_estimate(const Matrix& samples,
                                     const TournamentNet& net) {
  if (net.candidates.empty()) throw UsageError("tournament_estimate: empty net");
  const int m = static_cast<int>(net.candidates.size());
  const long n = samples.rows();

  Vector emp(net.witnesses.size());
  for (std::size_t a = 0; a < net.witnesses.size(); ++a) {
    long cnt = 0;
    for (long k = 0; k < n; ++k)
      if (net.witnesses[a].contains(samples.row(k).transpose())) ++cnt;
    emp[a] = n > 0 ? static_cast<double>(cnt) / n : 0.0;
  }

  TournamentResult res;
  res.scores = Vector::Zero(m);
  for (int f = 0; f < m; ++f) {
    double worst = 0;
    for (std::size_t a = 0; a < net.witnesses.size(); ++a)
      worst = std::max(worst,
                       std::fabs(emp[a] - net.witnesses[a].candidate_prob[f]));
    res.scores[f] = worst;
  }
  res.index = 0;
  for (int f = 1; f < m; ++f)
    if (res.scores[f] < res.scores[res.index]) res.index = f;  // ties: smallest
  return res;
}

// ---------------------------------------------------------------------------
// Standardization.

Vector AffineMap::invert(const Vector& y) const {
  return a.partialPivLu().solve(y - b);
}

Matrix AffineMap::apply_rows(const Matrix& xs) const {
  Matrix out(xs.rows(), xs.cols());
  for (Eigen::Index i = 0; i < xs.rows(); ++i)
    out.row(i) = (a * xs.row(i).transpose() + b).transpose();
  return out;
}

StandardizeResult standardize(const Matrix& samples) {
  const Eigen::Index n = samples.rows();
  const Eigen::Index d = samples.cols();
  Eigen::Index m = n / 3;
  if (m < 1) throw DomainError("standardize: need at least 3 samples");
  Eigen::Index used = 3 * m;

  // First third: covariance estimate.
  Matrix first = samples.topRows(m);
  Vector mu1 = first.colwise().mean().transpose();
  Matrix centered = first.rowwise() - mu1.transpose();
  Matrix sigma = centered.transpose() * centered / static_cast<double>(m);

  Eigen::SelfAdjointEigenSolver<Matrix> eig(sigma);
  double tol = 1e-12 * std::max(1.0, eig.eigenvalues().maxCoeff());
  int rank = 0;
  for (Eigen::Index i = 0; i < d; ++i)
    if (eig.eigenvalues()[i] > tol) ++rank;
  if (rank < d)
    throw RankDeficiencyError("standardize: singular empirical covariance", rank);
  Vector inv_sqrt = eig.eigenvalues().cwiseSqrt().cwiseInverse();
  Matrix s_inv_half =
      eig.eigenvectors() * inv_sqrt.asDiagonal() * eig.eigenvectors().transpose();

  // Second third: mean of the half-whitened points.
  Matrix second = samples.middleRows(m, m);
  Vector mu2 = Vector::Zero(d);
  for (Eigen::Index i = 0; i < m; ++i)
    mu2 += s_inv_half * second.row(i).transpose();
  mu2 /= static_cast<double>(m);

  StandardizeResult out;
  out.transform.a = s_inv_half;
  out.transform.b = -mu2;
  out.standardized = out.transform.apply_rows(samples.middleRows(2 * m, m));
  out.used = used;
  return out;
}

}  // namespace shapelab
