#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_set>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "shapelab/estimators.hpp"

namespace shapelab {

namespace {

// ---------------------------------------------------------------------------
// d = 1: exact path. Ties are grouped; feasibility of (g, xi) over all pairs
// is equivalent to the grouped values forming a convex sequence inside the
// box, so the fit reduces to a banded QP solved by a primal-dual interior
// point iteration in O(m) per step.

struct Grouped1d {
  std::vector<double> knots;   // distinct sorted x
  std::vector<double> wsum;    // group sizes
  std::vector<double> ymean;   // group means of y
  std::vector<int> group_of;   // per original index
};

Grouped1d group_1d(const Matrix& x, const Vector& y) {
  const int n = static_cast<int>(x.rows());
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](int a, int b) { return x(a, 0) < x(b, 0); });
  Grouped1d g;
  g.group_of.resize(n);
  for (int t = 0; t < n; ++t) {
    int i = order[t];
    if (g.knots.empty() || x(i, 0) != g.knots.back()) {
      g.knots.push_back(x(i, 0));
      g.wsum.push_back(0.0);
      g.ymean.push_back(0.0);
    }
    int grp = static_cast<int>(g.knots.size()) - 1;
    g.group_of[i] = grp;
    g.wsum[grp] += 1.0;
    g.ymean[grp] += y[i];
  }
  for (std::size_t k = 0; k < g.knots.size(); ++k) g.ymean[k] /= g.wsum[k];
  return g;
}

struct Ipm1dResult {
  Vector u;
  double kkt = 0.0;
  bool converged = false;
  int iterations = 0;
};

// min 1/2 sum w_k (u_k - ybar_k)^2 s.t. slopes nondecreasing, 0 <= u <= G.
// Constraint rows are normalized so the dual residual is measured on an O(1)
// scale even with nearly-coincident knots.
Ipm1dResult ipm_convex_seq(const Grouped1d& gr, double gamma) {
  const int m = static_cast<int>(gr.knots.size());
  Vector w = Eigen::Map<const Vector>(gr.wsum.data(), m);
  Vector yb = Eigen::Map<const Vector>(gr.ymean.data(), m);

  Ipm1dResult out;
  if (m == 1) {
    out.u = Vector::Constant(1, std::min(std::max(yb[0], 0.0), gamma));
    out.converged = true;
    return out;
  }

  const int nc = std::max(0, m - 2);
  const int rows = nc + 2 * m;
  std::vector<std::array<int, 3>> idx(nc);
  std::vector<std::array<double, 3>> coef(nc);
  for (int k = 0; k < nc; ++k) {
    double d1 = gr.knots[k + 1] - gr.knots[k];
    double d2 = gr.knots[k + 2] - gr.knots[k + 1];
    std::array<double, 3> a = {-1.0 / d1, 1.0 / d1 + 1.0 / d2, -1.0 / d2};
    double nrm = std::sqrt(a[0] * a[0] + a[1] * a[1] + a[2] * a[2]);
    idx[k] = {k, k + 1, k + 2};
    coef[k] = {a[0] / nrm, a[1] / nrm, a[2] / nrm};
  }
  auto b_of = [&](int r) {
    if (r < nc) return 0.0;
    if (r < nc + m) return gamma;
    return 0.0;
  };
  auto apply_a = [&](const Vector& u, Vector& au) {
    au.resize(rows);
    for (int k = 0; k < nc; ++k)
      au[k] = coef[k][0] * u[idx[k][0]] + coef[k][1] * u[idx[k][1]] +
              coef[k][2] * u[idx[k][2]];
    for (int i = 0; i < m; ++i) au[nc + i] = u[i];
    for (int i = 0; i < m; ++i) au[nc + m + i] = -u[i];
  };
  auto apply_at = [&](const Vector& lam, Vector& atl) {
    atl = Vector::Zero(m);
    for (int k = 0; k < nc; ++k)
      for (int t = 0; t < 3; ++t) atl[idx[k][t]] += coef[k][t] * lam[k];
    for (int i = 0; i < m; ++i) atl[i] += lam[nc + i] - lam[nc + m + i];
  };

  Vector u = yb.cwiseMax(0.05 * gamma).cwiseMin(0.95 * gamma);
  Vector lam = Vector::Constant(rows, 1.0);
  Vector s(rows), au(rows);
  apply_a(u, au);
  for (int r = 0; r < rows; ++r) s[r] = std::max(b_of(r) - au[r], 0.5);

  Eigen::SparseMatrix<double> h(m, m);
  std::vector<Eigen::Triplet<double>> trip;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver;

  for (int it = 0; it < 200; ++it) {
    out.iterations = it + 1;
    apply_a(u, au);
    Vector rp(rows);
    for (int r = 0; r < rows; ++r) rp[r] = au[r] + s[r] - b_of(r);
    Vector atl;
    apply_at(lam, atl);
    Vector rd = w.asDiagonal() * (u - yb) + atl;
    double mu = lam.dot(s) / rows;

    double viol = 0.0;
    for (int r = 0; r < rows; ++r) viol = std::max(viol, au[r] - b_of(r));
    out.kkt = std::max({rd.cwiseAbs().maxCoeff(), viol, mu});
    if (out.kkt < 1e-10) {
      out.converged = true;
      break;
    }

    double sigma = mu > 1e-8 ? 0.2 : 0.05;
    Vector d = lam.cwiseQuotient(s);
    Vector rhs_rows(rows);
    for (int r = 0; r < rows; ++r)
      rhs_rows[r] = (sigma * mu - lam[r] * s[r]) / s[r] + d[r] * rp[r];
    Vector at_rhs;
    apply_at(rhs_rows, at_rhs);
    Vector rhs = -(rd + at_rhs);

    trip.clear();
    for (int i = 0; i < m; ++i)
      trip.emplace_back(i, i, w[i] + d[nc + i] + d[nc + m + i]);
    for (int k = 0; k < nc; ++k)
      for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b)
          trip.emplace_back(idx[k][a], idx[k][b], coef[k][a] * coef[k][b] * d[k]);
    h.setFromTriplets(trip.begin(), trip.end());
    solver.compute(h);
    if (solver.info() != Eigen::Success) break;
    Vector du = solver.solve(rhs);

    Vector adu(rows);
    apply_a(du, adu);
    Vector ds = -rp - adu;
    Vector dlam(rows);
    for (int r = 0; r < rows; ++r)
      dlam[r] = (sigma * mu - lam[r] * s[r]) / s[r] - d[r] * ds[r];

    double alpha = 1.0;
    for (int r = 0; r < rows; ++r) {
      if (ds[r] < 0) alpha = std::min(alpha, -s[r] / ds[r]);
      if (dlam[r] < 0) alpha = std::min(alpha, -lam[r] / dlam[r]);
    }
    alpha = std::min(1.0, 0.95 * alpha);
    u += alpha * du;
    s += alpha * ds;
    lam += alpha * dlam;
  }
  out.u = u;
  return out;
}

ConvexFit convex_ls_fit_1d(const Matrix& x, const Vector& y, double gamma);

// ---------------------------------------------------------------------------
// General d: primal-dual interior point on (g, xi) over a working set of
// pair constraints, refreshed by full violation scans (constraint
// generation). The KKT systems are sparse with the kNN pair graph's
// structure, so direct LDLT factorizations stay cheap.

struct PairCon {
  int i, j;
};

class GeneralSolver {
 public:
  GeneralSolver(const Matrix& x, const Vector& y, double gamma,
                const ConvexFitOptions& opts)
      : x_(x), y_(y), gamma_(gamma), opts_(opts),
        n_(static_cast<int>(x.rows())), d_(static_cast<int>(x.cols())),
        nv_(n_ + n_ * d_) {}

  ConvexFit solve() {
    build_initial_pairs();
    z_ = Vector::Zero(nv_);
    z_.head(n_) = y_.cwiseMax(0.0).cwiseMin(gamma_);

    double kkt = std::numeric_limits<double>::infinity();
    int total_iters = 0;
    bool ipm_ok = false;
    for (int round = 0; round < opts_.max_outer_rounds; ++round) {
      ipm_ok = run_ipm(total_iters, kkt);
      int added = add_violated_pairs();
      if (added == 0) break;
      if (total_iters >= opts_.max_iterations) break;
    }

    ConvexFit fit;
    fit.x = x_;
    fit.y = y_;
    fit.gamma = gamma_;
    fit.g = z_.head(n_);
    fit.xi.resize(n_, d_);
    for (int i = 0; i < n_; ++i) fit.xi.row(i) = z_.segment(n_ + i * d_, d_).transpose();
    fit.objective = (y_ - fit.g).squaredNorm();
    fit.max_violation = std::max(0.0, convex_fit_check_feasibility(fit));
    fit.kkt_residual = std::max(kkt, fit.max_violation);
    fit.iterations = total_iters;
    fit.converged = ipm_ok && fit.kkt_residual <= opts_.tol &&
                    fit.max_violation <= opts_.feas_tol;
    return fit;
  }

 private:
  void add_pair(int i, int j) {
    long long key = static_cast<long long>(i) * n_ + j;
    if (have_.insert(key).second) cons_.push_back({i, j});
  }

  void build_initial_pairs() {
    int k0 = std::min(n_ - 1, 2 * d_ + 6);
    std::vector<std::pair<double, int>> dist(n_);
    for (int i = 0; i < n_; ++i) {
      for (int j = 0; j < n_; ++j)
        dist[j] = {(x_.row(j) - x_.row(i)).squaredNorm(), j};
      std::nth_element(dist.begin(), dist.begin() + k0, dist.end());
      for (int t = 0; t <= k0 && t < n_; ++t) {
        int j = dist[t].second;
        if (j == i) continue;
        add_pair(i, j);
        add_pair(j, i);
      }
    }
  }

  // Pair row in normalized form: (g_i - g_j + xi_i . dvec) / nrm <= 0.
  struct Row {
    int i, j;
    Vector dvec;
    double nrm;
  };

  void build_rows() {
    rows_.clear();
    rows_.reserve(cons_.size());
    for (const auto& c : cons_) {
      Row r;
      r.i = c.i;
      r.j = c.j;
      r.dvec = (x_.row(c.j) - x_.row(c.i)).transpose();
      r.nrm = std::sqrt(2.0 + r.dvec.squaredNorm());
      rows_.push_back(std::move(r));
    }
  }

  // Returns true if the interior-point loop reached its tolerance.
  bool run_ipm(int& total_iters, double& kkt_out) {
    build_rows();
    const int npair = static_cast<int>(rows_.size());
    const int nrows = npair + 2 * n_;
    const double ridge = 1e-8;  // pins subgradients left free by constraints

    auto b_of = [&](int r) {
      if (r < npair) return 0.0;
      if (r < npair + n_) return gamma_;
      return 0.0;
    };
    auto apply_a = [&](const Vector& z, Vector& az) {
      az.resize(nrows);
      for (int k = 0; k < npair; ++k) {
        const Row& r = rows_[k];
        az[k] = (z[r.i] - z[r.j] +
                 z.segment(n_ + r.i * d_, d_).dot(r.dvec)) / r.nrm;
      }
      for (int i = 0; i < n_; ++i) az[npair + i] = z[i];
      for (int i = 0; i < n_; ++i) az[npair + n_ + i] = -z[i];
    };
    auto apply_at = [&](const Vector& lam, Vector& atl) {
      atl = Vector::Zero(nv_);
      for (int k = 0; k < npair; ++k) {
        const Row& r = rows_[k];
        double v = lam[k] / r.nrm;
        atl[r.i] += v;
        atl[r.j] -= v;
        atl.segment(n_ + r.i * d_, d_) += v * r.dvec;
      }
      for (int i = 0; i < n_; ++i) atl[i] += lam[npair + i] - lam[npair + n_ + i];
    };

    // Start strictly inside the box, keep the previous subgradients.
    Vector z = z_;
    z.head(n_) = z.head(n_).cwiseMax(0.02 * gamma_).cwiseMin(0.98 * gamma_);
    Vector lam = Vector::Constant(nrows, 1.0);
    Vector s(nrows), az(nrows);
    apply_a(z, az);
    for (int r = 0; r < nrows; ++r) s[r] = std::max(b_of(r) - az[r], 0.5);

    Eigen::SparseMatrix<double> h(nv_, nv_);
    std::vector<Eigen::Triplet<double>> trip;
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver;
    bool analyzed = false;

    bool ok = false;
    for (int it = 0; it < 120 && total_iters < opts_.max_iterations; ++it) {
      ++total_iters;
      apply_a(z, az);
      Vector rp(nrows);
      for (int r = 0; r < nrows; ++r) rp[r] = az[r] + s[r] - b_of(r);
      Vector atl;
      apply_at(lam, atl);
      // True stationarity (no ridge term): (g - y; 0) + A^T lam.
      Vector rd_true = atl;
      rd_true.head(n_) += z.head(n_) - y_;
      double mu = lam.dot(s) / nrows;
      double viol = 0;
      for (int r = 0; r < nrows; ++r) viol = std::max(viol, az[r] - b_of(r));
      kkt_out = std::max({rd_true.cwiseAbs().maxCoeff(), viol, mu});
      double target = std::min(0.2 * opts_.tol, 1e-8);
      if (kkt_out < target) {
        ok = true;
        break;
      }

      double sigma = mu > 1e-7 ? 0.2 : 0.05;
      Vector dq = lam.cwiseQuotient(s);
      Vector rhs_rows(nrows);
      for (int r = 0; r < nrows; ++r)
        rhs_rows[r] = (sigma * mu - lam[r] * s[r]) / s[r] + dq[r] * rp[r];
      Vector at_rhs;
      apply_at(rhs_rows, at_rhs);
      Vector rd = rd_true;
      rd.tail(n_ * d_) += ridge * z.tail(n_ * d_);
      Vector rhs = -(rd + at_rhs);

      trip.clear();
      for (int i = 0; i < n_; ++i)
        trip.emplace_back(i, i, 1.0 + dq[npair + i] + dq[npair + n_ + i]);
      for (int i = n_; i < nv_; ++i) trip.emplace_back(i, i, ridge);
      for (int k = 0; k < npair; ++k) {
        const Row& r = rows_[k];
        double w = dq[k] / (r.nrm * r.nrm);
        // Index list of the row: g_i, g_j, xi_i block.
        std::vector<std::pair<int, double>> ent;
        ent.reserve(2 + d_);
        ent.emplace_back(r.i, 1.0);
        ent.emplace_back(r.j, -1.0);
        for (int t = 0; t < d_; ++t)
          ent.emplace_back(n_ + r.i * d_ + t, r.dvec[t]);
        for (const auto& [ia, va] : ent)
          for (const auto& [ib, vb] : ent)
            trip.emplace_back(ia, ib, w * va * vb);
      }
      h.setFromTriplets(trip.begin(), trip.end());
      if (!analyzed) {
        solver.analyzePattern(h);
        analyzed = true;
      }
      solver.factorize(h);
      if (solver.info() != Eigen::Success) break;
      Vector dz = solver.solve(rhs);

      Vector adz(nrows);
      apply_a(dz, adz);
      Vector ds = -rp - adz;
      Vector dlam(nrows);
      for (int r = 0; r < nrows; ++r)
        dlam[r] = (sigma * mu - lam[r] * s[r]) / s[r] - dq[r] * ds[r];

      double alpha = 1.0;
      for (int r = 0; r < nrows; ++r) {
        if (ds[r] < 0) alpha = std::min(alpha, -s[r] / ds[r]);
        if (dlam[r] < 0) alpha = std::min(alpha, -lam[r] / dlam[r]);
      }
      alpha = std::min(1.0, 0.95 * alpha);
      z += alpha * dz;
      s += alpha * ds;
      lam += alpha * dlam;
    }
    z_ = z;
    return ok;
  }

  // Full O(n^2 d) violation scan; adds the two worst rows per point.
  int add_violated_pairs() {
    if (n_ < 2) return 0;
    int added = 0;
    Vector offset(n_);
    for (int i = 0; i < n_; ++i)
      offset[i] = z_[i] - z_.segment(n_ + i * d_, d_).dot(x_.row(i));
    std::size_t before = cons_.size();
    for (int i = 0; i < n_; ++i) {
      Vector vals = x_ * z_.segment(n_ + i * d_, d_);
      int worst = -1, second = -1;
      double wv = opts_.feas_tol, sv = opts_.feas_tol;
      for (int j = 0; j < n_; ++j) {
        if (j == i) continue;
        double c = offset[i] + vals[j] - z_[j];
        if (c > wv) {
          second = worst;
          sv = wv;
          worst = j;
          wv = c;
        } else if (c > sv) {
          second = j;
          sv = c;
        }
      }
      (void)sv;
      for (int j : {worst, second})
        if (j >= 0) {
          std::size_t sz = have_.size();
          add_pair(i, j);
          if (have_.size() > sz) ++added;
        }
    }
    (void)before;
    return added;
  }

  const Matrix& x_;
  const Vector& y_;
  double gamma_;
  ConvexFitOptions opts_;
  int n_, d_, nv_;
  std::vector<PairCon> cons_;
  std::unordered_set<long long> have_;
  std::vector<Row> rows_;
  Vector z_;
};

ConvexFit convex_ls_fit_1d(const Matrix& x, const Vector& y, double gamma) {
  Grouped1d gr = group_1d(x, y);
  Ipm1dResult sol = ipm_convex_seq(gr, gamma);
  const int n = static_cast<int>(x.rows());
  const int m = static_cast<int>(gr.knots.size());

  ConvexFit fit;
  fit.x = x;
  fit.y = y;
  fit.gamma = gamma;
  fit.g.resize(n);
  fit.xi.resize(n, 1);
  Vector slope(std::max(0, m - 1));
  for (int k = 0; k + 1 < m; ++k)
    slope[k] = (sol.u[k + 1] - sol.u[k]) / (gr.knots[k + 1] - gr.knots[k]);
  for (int i = 0; i < n; ++i) {
    int grp = gr.group_of[i];
    fit.g[i] = sol.u[grp];
    double xi;
    if (m == 1)
      xi = 0.0;
    else if (grp == 0)
      xi = slope[0];
    else if (grp == m - 1)
      xi = slope[m - 2];
    else
      xi = 0.5 * (slope[grp - 1] + slope[grp]);
    fit.xi(i, 0) = xi;
  }
  fit.objective = (y - fit.g).squaredNorm();
  fit.kkt_residual = sol.kkt;
  fit.max_violation = std::max(0.0, convex_fit_check_feasibility(fit));
  fit.iterations = sol.iterations;
  fit.converged = sol.converged;
  return fit;
}

}  // namespace

ConvexFit convex_ls_fit(const Matrix& x, const Vector& y, double gamma,
                        const ConvexFitOptions& opts) {
  const int n = static_cast<int>(x.rows());
  const int d = static_cast<int>(x.cols());
  if (n < 1) throw DomainError("convex_ls_fit: need at least one point");
  if (y.size() != n) throw DomainError("convex_ls_fit: |Y| != |X|");
  if (!(gamma > 0)) throw DomainError("convex_ls_fit: Gamma must be positive");

  if (d == 1) return convex_ls_fit_1d(x, y, gamma);
  GeneralSolver solver(x, y, gamma, opts);
  return solver.solve();
}

double ConvexFit::predict(const Vector& point) const {
  double best = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < g.size(); ++i) {
    double v = g[i] + xi.row(i).dot(point.transpose() - x.row(i));
    best = std::max(best, v);
  }
  return std::min(std::max(best, 0.0), gamma);
}

double convex_predict(const ConvexFit& fit, const Vector& point) {
  return fit.predict(point);
}

double convex_fit_check_feasibility(const ConvexFit& fit) {
  const int n = static_cast<int>(fit.x.rows());
  double worst = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i) {
    Vector vals = fit.x * fit.xi.row(i).transpose();
    double off = fit.g[i] - fit.xi.row(i).dot(fit.x.row(i));
    for (int j = 0; j < n; ++j) {
      if (j == i) continue;
      worst = std::max(worst, off + vals[j] - fit.g[j]);
    }
  }
  return worst;  // <= feas_tol for a feasible fit
}

}  // namespace shapelab
