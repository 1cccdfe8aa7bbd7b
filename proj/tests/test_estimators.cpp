#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "shapelab/densities.hpp"
#include "shapelab/estimators.hpp"
#include "shapelab/rng.hpp"

using namespace shapelab;

namespace {

Vector vec(std::initializer_list<double> xs) {
  Vector v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

Matrix col(std::initializer_list<double> xs) {
  Matrix m(static_cast<Eigen::Index>(xs.size()), 1);
  Eigen::Index i = 0;
  for (double x : xs) m(i++, 0) = x;
  return m;
}

}  // namespace

TEST_CASE("convex LS: already-convex data is interpolated") {
  auto fit = convex_ls_fit(col({-1, 0, 1}), vec({1, 0, 1}), 2.0);
  CHECK(fit.converged);
  CHECK(fit.objective == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(fit.g[0] == doctest::Approx(1.0).epsilon(1e-5));
  CHECK(fit.g[1] == doctest::Approx(0.0).scale(1).epsilon(1e-5));
  CHECK(fit.g[2] == doctest::Approx(1.0).epsilon(1e-5));
}

TEST_CASE("convex LS: concave data collapses to the mean (KKT oracle)") {
  auto fit = convex_ls_fit(col({-1, 0, 1}), vec({0, 1, 0}), 2.0);
  CHECK(fit.converged);

  // Brute-force oracle: grid over (g1,g2,g3) with g2 <= (g1+g3)/2.
  double best = 1e18;
  for (int a = 0; a <= 100; ++a)
    for (int b = 0; b <= 100; ++b)
      for (int c = 0; c <= 100; ++c) {
        double g1 = a / 50.0, g2 = b / 50.0, g3 = c / 50.0;
        if (g2 > (g1 + g3) / 2 + 1e-12) continue;
        double obj = g1 * g1 + (1 - g2) * (1 - g2) + g3 * g3;
        best = std::min(best, obj);
      }
  CHECK(best == doctest::Approx(2.0 / 3.0).epsilon(1e-3));
  CHECK(fit.objective == doctest::Approx(2.0 / 3.0).epsilon(1e-6));
  for (int i = 0; i < 3; ++i)
    CHECK(fit.g[i] == doctest::Approx(1.0 / 3.0).epsilon(1e-4));
}

TEST_CASE("convex LS: objective never beats the best constant, never worse") {
  Rng rng(31);
  for (int rep = 0; rep < 10; ++rep) {
    int n = 5 + rng.uniform_int(20);
    Matrix x(n, 1);
    Vector y(n);
    for (int i = 0; i < n; ++i) {
      x(i, 0) = rng.uniform(-1, 1);
      y[i] = rng.uniform(-0.5, 1.5);
    }
    double gamma = 1.0;
    auto fit = convex_ls_fit(x, y, gamma);
    double cbest = std::min(std::max(y.mean(), 0.0), gamma);
    double cobj = (y.array() - cbest).square().sum();
    CHECK(fit.objective <= cobj + 1e-7);
  }
}

TEST_CASE("convex LS: KKT-feasibility property suite, d in {1,2,3,4}") {
  Rng rng(77);
  for (int d = 1; d <= 4; ++d) {
    int n = 25;
    Matrix x(n, d);
    Vector y(n);
    for (int i = 0; i < n; ++i) {
      Vector p = rng.ball_point(d);
      x.row(i) = p.transpose();
      y[i] = p.squaredNorm() + 0.3 * rng.normal();
    }
    auto fit = convex_ls_fit(x, y, 1.0);
    CHECK(fit.converged);
    CHECK(fit.kkt_residual <= 1e-6);
    CHECK(convex_fit_check_feasibility(fit) <= 1e-7);
    CHECK(fit.g.minCoeff() >= -1e-12);
    CHECK(fit.g.maxCoeff() <= 1.0 + 1e-12);
  }
}

TEST_CASE("convex LS: fitted values are the projection of Y (variational test)") {
  Rng rng(5);
  int n = 40;
  Matrix x(n, 2);
  Vector y(n);
  for (int i = 0; i < n; ++i) {
    x.row(i) = rng.ball_point(2).transpose();
    y[i] = rng.uniform(0, 1);
  }
  double gamma = 1.0;
  auto fit = convex_ls_fit(x, y, gamma);
  REQUIRE(fit.converged);
  // Any max-affine function clipped to [0, Gamma] is feasible; the projection
  // property demands <Y - g, h - g> <= 0 for all feasible h.
  for (int rep = 0; rep < 50; ++rep) {
    int pieces = 1 + rng.uniform_int(4);
    std::vector<Vector> slopes;
    std::vector<double> offs;
    for (int p = 0; p < pieces; ++p) {
      slopes.push_back(rng.normal_vec(2));
      offs.push_back(rng.uniform(-0.5, 0.5));
    }
    Vector h(n);
    for (int i = 0; i < n; ++i) {
      double val = -1e18;
      for (int p = 0; p < pieces; ++p)
        val = std::max(val, offs[p] + slopes[p].dot(x.row(i)));
      h[i] = std::min(std::max(val, 0.0), gamma);
    }
    // Clipping a max-affine to [0, Gamma] stays convex in value but may lose
    // subgradient feasibility at the clip boundary; rebuild as a proper
    // bounded convex function: max(0, affines) works, the min() clip needs a
    // feasibility check before use.
    bool feasible = true;
    {
      // verify with exact subgradients of max(0, affine) capped by gamma
      for (int i = 0; i < n && feasible; ++i)
        if (h[i] >= gamma - 1e-12) feasible = false;
    }
    if (!feasible) continue;
    double inner = (y - fit.g).dot(h - fit.g);
    CHECK(inner <= 1e-5);
  }
}

TEST_CASE("convex LS: enlarging Gamma never increases the objective") {
  Rng rng(6);
  int n = 30;
  Matrix x(n, 1);
  Vector y(n);
  for (int i = 0; i < n; ++i) {
    x(i, 0) = rng.uniform(-1, 1);
    y[i] = 0.8 * x(i, 0) * x(i, 0) + 0.3 * rng.normal();
  }
  double prev = 1e18;
  for (double gamma : {0.25, 0.5, 1.0, 2.0}) {
    auto fit = convex_ls_fit(x, y, gamma);
    CHECK(fit.objective <= prev + 1e-7);
    prev = fit.objective;
  }
}

TEST_CASE("square decomposition identity holds for fitted functions") {
  Rng rng(8);
  int n = 20;
  Matrix x(n, 1);
  Vector y1(n), y2(n);
  for (int i = 0; i < n; ++i) {
    x(i, 0) = rng.uniform(-1, 1);
    y1[i] = x(i, 0) * x(i, 0);
    y2[i] = 0.5 + 0.2 * x(i, 0);
  }
  auto f = convex_ls_fit(x, y1, 1.0);
  auto g = convex_ls_fit(x, y2, 1.0);
  for (int k = 0; k <= 100; ++k) {
    Vector p = vec({-1.0 + 0.02 * k});
    double fv = f.predict(p), gv = g.predict(p);
    double lhs = (fv - gv) * (fv - gv);
    double rhs = 2 * fv * fv + 2 * gv * gv - (fv + gv) * (fv + gv);
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12).scale(1.0));
  }
}

TEST_CASE("convex prediction: interpolation, convexity, minimality") {
  auto fit = convex_ls_fit(col({-1, 0, 1}), vec({0.9, 0.1, 0.8}), 1.0);
  REQUIRE(fit.converged);
  for (int j = 0; j < 3; ++j) {
    Vector p(1);
    p << fit.x(j, 0);
    CHECK(fit.predict(p) == doctest::Approx(fit.g[j]).epsilon(1e-6));
  }
  // Midpoint convexity of the prediction *before clamping* (the upper clip
  // is allowed to flatten the extension).
  auto raw = [&](double q) {
    double best = -1e18;
    for (int i = 0; i < 3; ++i)
      best = std::max(best, fit.g[i] + fit.xi(i, 0) * (q - fit.x(i, 0)));
    return best;
  };
  for (int k = 0; k < 60; ++k) {
    double a = -1.4 + 0.04 * k, b = a + 0.4;
    CHECK(raw(0.5 * (a + b)) <= 0.5 * raw(a) + 0.5 * raw(b) + 1e-9);
  }
  // Pointwise minimality among feasible extensions: any convex h with
  // h(X_i) = g_i and subgradient xi_i must dominate the max-affine minorant.
  Rng rng(9);
  for (int rep = 0; rep < 20; ++rep) {
    double q = rng.uniform(-2, 2);
    Vector p = vec({q});
    double ours = fit.predict(p);
    double lower = -1e18;
    for (int i = 0; i < 3; ++i)
      lower = std::max(lower, fit.g[i] + fit.xi(i, 0) * (q - fit.x(i, 0)));
    CHECK(ours >= std::min(std::max(lower, 0.0), 1.0) - 1e-12);
    CHECK(ours <= 1.0);
    CHECK(ours >= 0.0);
  }
}

TEST_CASE("1-D log-concave MLE: two points give the uniform density") {
  auto fit = logconcave_mle_1d(vec({0.0, 1.0}));
  CHECK(fit.converged);
  CHECK(fit.log_f[0] == doctest::Approx(0.0).scale(1).epsilon(1e-4));
  CHECK(fit.log_f[1] == doctest::Approx(0.0).scale(1).epsilon(1e-4));
  CHECK(fit.objective == doctest::Approx(0.0).scale(1).epsilon(1e-6));

  // Oracle: over densities proportional to e^{b x} on [0,1] the average
  // log-likelihood at {0,1} is b/2 - log((e^b - 1)/b), maximized at b = 0.
  double best = -1e18, best_b = 0;
  for (double b = -3; b <= 3; b += 0.001) {
    double logz = std::fabs(b) < 1e-8 ? std::log1p(b / 2) : std::log((std::exp(b) - 1) / b);
    double ll = 0.5 * b - logz;
    if (ll > best) {
      best = ll;
      best_b = b;
    }
  }
  CHECK(std::fabs(best_b) < 2e-3);
  CHECK(fit.objective >= best - 1e-6);
}

TEST_CASE("1-D log-concave MLE: invariants on a real sample") {
  Rng rng(123);
  int n = 400;
  Vector x(n);
  for (int i = 0; i < n; ++i) x[i] = rng.uniform(0, 1);
  auto fit = logconcave_mle_1d(x);
  CHECK(fit.converged);
  CHECK(fit.integral() == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(std::fabs(fit.mean() - x.mean()) <= 1e-6);
  // Concavity of the knot sequence.
  for (int a = 0; a + 2 < fit.knots.size(); ++a) {
    double s1 = (fit.log_f[a + 1] - fit.log_f[a]) / (fit.knots[a + 1] - fit.knots[a]);
    double s2 = (fit.log_f[a + 2] - fit.log_f[a + 1]) / (fit.knots[a + 2] - fit.knots[a + 1]);
    CHECK(s2 <= s1 + 1e-9);
  }
  // Support is exactly the sample range.
  CHECK(fit.eval(x.minCoeff() - 1e-9) == 0.0);
  CHECK(fit.eval(x.maxCoeff() + 1e-9) == 0.0);
}

TEST_CASE("1-D log-concave MLE: location equivariance") {
  Rng rng(321);
  int n = 60;
  Vector x(n);
  for (int i = 0; i < n; ++i) x[i] = rng.normal();
  auto f0 = logconcave_mle_1d(x);
  Vector shifted = x.array() + 2.5;
  auto f1 = logconcave_mle_1d(shifted);
  CHECK((f1.knots.array() - f0.knots.array() - 2.5).abs().maxCoeff() < 1e-12);
  CHECK((f1.log_f - f0.log_f).cwiseAbs().maxCoeff() < 1e-5);
}

TEST_CASE("1-D log-concave MLE: Hellinger accuracy at n=500 from uniform") {
  auto truth = make_uniform_interval(0.0, 1.0);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Matrix xs = truth->sample(500, seed + 100);
    auto fit = logconcave_mle_1d(xs.col(0));
    CHECK(fit.hellinger_sq_to(*truth) <= 0.05);
  }
}

TEST_CASE("1-D log-concave MLE: degenerate input") {
  CHECK_THROWS_AS(logconcave_mle_1d(vec({1.0, 1.0, 1.0})), DegenerateSampleError);
  CHECK_THROWS_AS(logconcave_mle_1d(vec({1.0})), DegenerateSampleError);
}

TEST_CASE("tournament: single candidate and witness TV identity") {
  std::vector<DensityPtr> one = {make_uniform_interval(0, 1)};
  auto net1 = make_tournament_net_1d(one);
  Matrix samples = one[0]->sample(100, 4);
  CHECK(tournament_estimate(samples, net1).index == 0);

  std::vector<DensityPtr> gs;
  for (int k = 0; k < 4; ++k) {
    Matrix a(1, 1);
    a << 1.0;
    Vector b(1);
    b << 0.7 * k;
    gs.push_back(std::make_shared<AffineTransformedDensity>(
        std::make_shared<GaussianDensity>(1), a, b));
  }
  auto net = make_tournament_net_1d(gs);
  // |P_i(A_ij) - P_j(A_ij)| must equal the pairwise TV.
  std::size_t w = 0;
  for (int i = 0; i < 4; ++i)
    for (int j = i + 1; j < 4; ++j, ++w) {
      double gap = std::fabs(net.witnesses[w].candidate_prob[i] -
                             net.witnesses[w].candidate_prob[j]);
      double tv = total_variation(*gs[i], *gs[j]).value;
      CHECK(gap == doctest::Approx(tv).epsilon(1e-6));
    }
}

TEST_CASE("tournament: two uniforms, binomial-tail oracle") {
  std::vector<DensityPtr> cands = {make_uniform_interval(0, 1),
                                   make_uniform_interval(0.5, 1.5)};
  auto net = make_tournament_net_1d(cands);
  int correct = 0;
  const int reps = 200;
  for (int rep = 0; rep < reps; ++rep) {
    Matrix xs = cands[0]->sample(200, 1000 + rep);
    auto res = tournament_estimate(xs, net);
    if (res.index == 0) ++correct;
    CHECK(res.scores[res.index] <= res.scores.minCoeff() + 1e-15);
  }
  // P(Bin(200, 1/2) < 50) ~ 5e-13, so misselection is essentially impossible.
  CHECK(correct >= static_cast<int>(0.99 * reps));
}

TEST_CASE("standardize: isotropic input stays isotropic (3m = 30000)") {
  GaussianDensity g3(3);
  Matrix xs = g3.sample(30000, 9);
  auto res = standardize(xs);
  CHECK(res.used == 30000);
  CHECK(res.standardized.rows() == 10000);

  Vector mean = res.standardized.colwise().mean().transpose();
  CHECK(mean.norm() <= 0.05);
  Matrix centered = res.standardized.rowwise() - mean.transpose();
  Matrix cov = centered.transpose() * centered / 10000.0;
  Eigen::SelfAdjointEigenSolver<Matrix> eig(cov - Matrix::Identity(3, 3));
  CHECK(eig.eigenvalues().cwiseAbs().maxCoeff() <= 0.05);
}

TEST_CASE("standardize: round trip and error paths") {
  Rng rng(15);
  Matrix xs(300, 2);
  for (int i = 0; i < 300; ++i) {
    Vector z = rng.normal_vec(2);
    xs(i, 0) = 2.0 * z[0] + 1.0;
    xs(i, 1) = -z[0] + 0.5 * z[1];
  }
  auto res = standardize(xs);
  for (int i = 0; i < 10; ++i) {
    Vector p = rng.normal_vec(2);
    Vector q = res.transform.invert(res.transform.apply(p));
    CHECK((p - q).norm() <= 1e-10);
  }

  Matrix flat(30, 2);
  for (int i = 0; i < 30; ++i) {
    flat(i, 0) = i;
    flat(i, 1) = 2.0 * i;  // rank-1 covariance
  }
  CHECK_THROWS_AS(standardize(flat), RankDeficiencyError);
}
