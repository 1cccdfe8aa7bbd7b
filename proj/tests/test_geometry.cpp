#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <vector>

#include "shapelab/geometry.hpp"
#include "shapelab/quadrature.hpp"
#include "shapelab/rng.hpp"

using namespace shapelab;

namespace {

Vector v2(double x, double y) {
  Vector v(2);
  v << x, y;
  return v;
}

Vector v3(double x, double y, double z) {
  Vector v(3);
  v << x, y, z;
  return v;
}

// Independent interval-measure helper (endpoint sweep), used as the oracle
// against IntervalSystem and the greedy postconditions.
double sweep_union(std::vector<Interval> iv) {
  if (iv.empty()) return 0;
  std::sort(iv.begin(), iv.end(), [](auto a, auto b) { return a.lo < b.lo; });
  double tot = 0, lo = iv[0].lo, hi = iv[0].hi;
  for (auto& p : iv) {
    if (p.lo > hi) {
      tot += hi - lo;
      lo = p.lo;
      hi = p.hi;
    } else
      hi = std::max(hi, p.hi);
  }
  return tot + (hi - lo);
}

double oracle_residual(const std::vector<Interval>& iv, int i,
                       const std::vector<int>& others) {
  std::vector<Interval> clipped;
  for (int j : others) {
    double lo = std::max(iv[i].lo, iv[j].lo), hi = std::min(iv[i].hi, iv[j].hi);
    if (hi > lo) clipped.push_back({lo, hi});
  }
  return (iv[i].hi - iv[i].lo) - sweep_union(clipped);
}

}  // namespace

TEST_CASE("ball volume closed forms and errors") {
  CHECK(ball_volume(2, 1.0) == doctest::Approx(M_PI).epsilon(1e-12));
  CHECK(ball_volume(1, 1.0) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(ball_volume(3, 1.0) == doctest::Approx(4.0 * M_PI / 3.0).epsilon(1e-12));
  CHECK(ball_volume(4, 1.0) == doctest::Approx(M_PI * M_PI / 2.0).epsilon(1e-12));
  CHECK(ball_volume(2, 3.0) == doctest::Approx(9.0 * M_PI).epsilon(1e-12));
  CHECK_THROWS_AS(ball_volume(0, 1.0), InvalidDimensionError);
  CHECK_THROWS_AS(ball_volume(2, -1.0), DomainError);
}

TEST_CASE("ball volume vs Monte-Carlo membership in d=4") {
  Rng rng(20240401);
  const long n = 10'000'000;
  long hits = 0;
  for (long i = 0; i < n; ++i) {
    double s = 0;
    for (int k = 0; k < 4; ++k) {
      double x = rng.uniform(-1.0, 1.0);
      s += x * x;
    }
    if (s <= 1.0) ++hits;
  }
  double est = 16.0 * hits / static_cast<double>(n);
  CHECK(std::fabs(est / ball_volume(4, 1.0) - 1.0) < 0.002);
}

TEST_CASE("ball volume cross-section recursion, d <= 12") {
  for (int d = 2; d <= 12; ++d) {
    double expo = 0.5 * (d - 1);
    auto f = [&](double s) { return std::pow(1.0 - s * s, expo); };
    double integral = integrate(f, -1.0, 1.0, 1e-14).value;
    double lhs = ball_volume(d, 1.0);
    double rhs = ball_volume(d - 1, 1.0) * integral;
    CHECK(std::fabs(lhs / rhs - 1.0) < 1e-10);
  }
}

TEST_CASE("surface-to-cross-section ratio sits between sqrt(d) and 3 sqrt(d)") {
  // vol(boundary B_d) = d vol(B_d); the ratio against vol(B_{d-1}) is the
  // quantity entering t_{d,N}.
  for (int d = 2; d <= 20; ++d) {
    double ratio = sphere_area(d) / ball_volume(d - 1, 1.0);
    CHECK(ratio >= 1.0 * std::sqrt(static_cast<double>(d)));
    CHECK(ratio <= 3.0 * std::sqrt(static_cast<double>(d)));
  }
  CHECK(sphere_area(3) == doctest::Approx(4.0 * M_PI).epsilon(1e-12));
}

TEST_CASE("cap volume: limits, quadrature, asymptotic regime") {
  CHECK(cap_volume(2, 1e-12) == doctest::Approx(M_PI / 2.0).epsilon(1e-6));
  // Closed form at d=3, t=0.5: pi * [ (s - s^3/3) ]_{0.5}^{1}.
  double exact3 = M_PI * ((1.0 - 1.0 / 3.0) - (0.5 - 0.125 / 3.0));
  CHECK(cap_volume(3, 0.5) == doctest::Approx(exact3).epsilon(1e-10));
  double ex = cap_volume(10, 0.9, CapVolumeMethod::exact);
  double as = cap_volume(10, 0.9, CapVolumeMethod::asymptotic);
  CHECK(std::fabs(as / ex - 1.0) <= 3.0 / 10.0);
  CHECK_THROWS_AS(cap_volume(3, 0.0), DomainError);
  CHECK_THROWS_AS(cap_volume(3, 1.0), DomainError);
}

TEST_CASE("cap volume at d=3 vs Monte-Carlo membership") {
  Rng rng(7);
  const long n = 10'000'000;
  long hits = 0;
  for (long i = 0; i < n; ++i) {
    Vector x = rng.ball_point(3);
    if (x[0] >= 0.5) ++hits;
  }
  double est = ball_volume(3, 1.0) * hits / static_cast<double>(n);
  CHECK(std::fabs(est / cap_volume(3, 0.5) - 1.0) < 0.005);
}

TEST_CASE("2-D hulls: exact extreme points and area") {
  auto tri = convex_hull({v2(0, 0), v2(1, 0), v2(0, 1)});
  CHECK(tri.vertices().size() == 3);
  CHECK(tri.volume() == doctest::Approx(0.5));

  auto sq = convex_hull({v2(0, 0), v2(1, 0), v2(1, 1), v2(0, 1), v2(0.5, 0.5)});
  CHECK(sq.vertices().size() == 4);  // interior point discarded
  CHECK(sq.volume() == doctest::Approx(1.0));

  // A point on an edge is not an extreme point either.
  auto sq2 = convex_hull({v2(0, 0), v2(1, 0), v2(1, 1), v2(0, 1), v2(0.5, 0.0)});
  CHECK(sq2.vertices().size() == 4);

  CHECK(sq.contains(v2(0.3, 0.7)));
  CHECK(!sq.contains(v2(1.2, 0.5)));
  CHECK(sq.contains(v2(0.0, 0.0)));

  CHECK_THROWS_AS(convex_hull({v2(0, 0), v2(1, 1), v2(2, 2)}), FlatHullError);
  try {
    convex_hull({v2(0, 0), v2(1, 1), v2(2, 2)});
  } catch (const FlatHullError& e) {
    CHECK(e.rank == 1);
  }
}

TEST_CASE("2-D hull of ball samples vs MC membership estimate") {
  Rng rng(42);
  std::vector<Vector> pts;
  for (int i = 0; i < 1000; ++i) pts.push_back(rng.ball_point(2));
  auto hull = convex_hull(pts);
  double frac_exact = hull.volume() / M_PI;

  Rng mc(43);
  const long m = 1'000'000;
  long hits = 0;
  for (long i = 0; i < m; ++i)
    if (hull.contains(mc.ball_point(2))) ++hits;
  double frac_mc = hits / static_cast<double>(m);
  double se = std::sqrt(frac_mc * (1 - frac_mc) / m);
  CHECK(std::fabs(frac_mc - frac_exact) < 3 * se + 1e-9);
}

TEST_CASE("3-D hulls: tetrahedron, cube, random ball points") {
  auto tet = convex_hull({v3(0, 0, 0), v3(1, 0, 0), v3(0, 1, 0), v3(0, 0, 1)});
  CHECK(tet.vertices().size() == 4);
  CHECK(tet.volume() == doctest::Approx(1.0 / 6.0).epsilon(1e-12));

  std::vector<Vector> cube;
  for (int a = 0; a <= 1; ++a)
    for (int b = 0; b <= 1; ++b)
      for (int c = 0; c <= 1; ++c) cube.push_back(v3(a, b, c));
  cube.push_back(v3(0.5, 0.5, 0.5));
  cube.push_back(v3(0.5, 0.5, 0.0));  // on a face
  auto ch = convex_hull(cube);
  CHECK(ch.vertices().size() == 8);
  CHECK(ch.volume() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(ch.contains(v3(0.99, 0.5, 0.5)));
  CHECK(!ch.contains(v3(1.01, 0.5, 0.5)));

  CHECK_THROWS_AS(convex_hull({v3(0, 0, 0), v3(1, 0, 0), v3(0, 1, 0),
                               v3(1, 1, 0), v3(0.3, 0.2, 0)}),
                  FlatHullError);

  Rng rng(11);
  std::vector<Vector> pts;
  for (int i = 0; i < 400; ++i) pts.push_back(rng.ball_point(3));
  auto hull = convex_hull(pts);
  CHECK(hull.volume() > 0.5 * ball_volume(3, 1.0));
  CHECK(hull.volume() < ball_volume(3, 1.0));
  Rng mc(12);
  const long m = 200'000;
  long hits = 0;
  for (long i = 0; i < m; ++i)
    if (hull.contains(mc.ball_point(3))) ++hits;
  double frac_mc = hits / static_cast<double>(m);
  double frac_exact = hull.volume() / ball_volume(3, 1.0);
  double se = std::sqrt(frac_mc * (1 - frac_mc) / m);
  CHECK(std::fabs(frac_mc - frac_exact) < 4 * se + 1e-9);
}

TEST_CASE("Frank-Wolfe hull membership agrees with exact 3-D hulls") {
  Rng rng(5);
  std::vector<Vector> pts;
  Matrix M(60, 3);
  for (int i = 0; i < 60; ++i) {
    pts.push_back(rng.ball_point(3));
    M.row(i) = pts.back().transpose();
  }
  auto hull = convex_hull(pts);
  int checked = 0;
  for (int i = 0; i < 300; ++i) {
    Vector q = rng.ball_point(3);
    // Frank-Wolfe resolves membership to roughly diam^2 / max_iter, so only
    // queries with a clear margin are checked against the exact hull.
    bool loose = hull.contains(q, 2e-3);
    bool tight = hull.contains(q, -2e-3);
    if (loose != tight) continue;
    CHECK(hull_contains(M, q, 1e-7, 2000) == tight);
    ++checked;
  }
  CHECK(checked > 200);

  // d=4 simplex sanity.
  Matrix S(5, 4);
  S.setZero();
  for (int i = 0; i < 4; ++i) S(i + 1, i) = 1.0;
  Vector center = Vector::Constant(4, 0.1);
  CHECK(hull_contains(S, center));
  Vector outside = Vector::Constant(4, 0.5);
  CHECK(!hull_contains(S, outside));
}

TEST_CASE("greedy disjointification: trivial regimes") {
  // Pairwise disjoint: c = 1, nothing dropped.
  std::vector<Interval> far;
  for (int k = 0; k < 8; ++k) far.push_back({2.0 * k, 2.0 * k + 1.0});
  auto out = greedy_disjointify(IntervalSystem(far));
  CHECK(out.kept.size() == 8);
  CHECK(out.c == doctest::Approx(1.0));

  // N identical copies: exactly one survivor.
  std::vector<Interval> same(6, Interval{0.0, 1.0});
  auto out2 = greedy_disjointify(IntervalSystem(same));
  CHECK(out2.kept.size() == 1);
  CHECK(out2.c == doctest::Approx(1.0 / 6.0));
}

TEST_CASE("greedy disjointification: staggered intervals match frozen oracle") {
  std::vector<Interval> iv;
  for (int k = 0; k <= 8; ++k) iv.push_back({k / 10.0, k / 10.0 + 0.2});
  auto out = greedy_disjointify(IntervalSystem(iv));
  CHECK(out.kept == std::vector<int>{0, 2, 4, 6, 8});
  // Postconditions against the independent sweep oracle.
  double v = 0.2, c = 1.0 / (9 * 0.2);
  CHECK(out.c == doctest::Approx(c));
  CHECK(static_cast<double>(out.kept.size()) >= 9 * c / 2 - 1e-12);
  for (int i : out.kept) {
    std::vector<int> others;
    for (int j : out.kept)
      if (j != i) others.push_back(j);
    CHECK(oracle_residual(iv, i, others) >= v * c / 2 - 1e-12);
  }
}

TEST_CASE("greedy disjointification: property check on random dyadic families") {
  Rng rng(99);
  for (int rep = 0; rep < 300; ++rep) {
    int n = 2 + rng.uniform_int(11);
    int len_ticks = 1 + rng.uniform_int(8);   // lengths k/16: exact doubles
    double v = len_ticks / 16.0;
    std::vector<Interval> iv;
    for (int i = 0; i < n; ++i) {
      double lo = rng.uniform_int(64) / 16.0;
      iv.push_back({lo, lo + v});
    }
    auto out = greedy_disjointify(IntervalSystem(iv));
    double c = sweep_union(iv) / (n * v);
    CHECK(out.c == doctest::Approx(c));
    CHECK(static_cast<double>(out.kept.size()) + 1e-9 >= n * c / 2);
    for (int i : out.kept) {
      std::vector<int> others;
      for (int j : out.kept)
        if (j != i) others.push_back(j);
      CHECK(oracle_residual(iv, i, others) + 1e-12 >= v * c / 2);
    }
  }
}

TEST_CASE("greedy disjointification: inconsistent oracle is rejected") {
  struct LyingOracle : SetVolumeOracle {
    int count() const override { return 3; }
    double volume(int) const override { return 1.0; }
    double residual(int, const std::vector<int>&) const override { return -0.5; }
    double union_volume() const override { return 3.0; }
  } lying;
  CHECK_THROWS_AS(greedy_disjointify(lying), OracleError);

  std::vector<Interval> uneven = {{0, 1}, {0, 2}};
  CHECK_THROWS_AS(greedy_disjointify(IntervalSystem(uneven)), OracleError);
}

TEST_CASE("cap packing: t formula and greedy guarantees at d=2") {
  auto pack = cap_packing(2, 100, 1);
  double expect_t = std::sqrt(1.0 - std::pow(2 * M_PI / (100 * 2.0), 2.0));
  CHECK(pack.t == doctest::Approx(expect_t).epsilon(1e-9));
  CHECK(pack.t == doctest::Approx(0.9995065).epsilon(1e-6));
  CHECK(pack.kept_count() >= 1);
  CHECK(pack.per_cap_volume ==
        doctest::Approx(std::acos(pack.t) - pack.t * std::sqrt(1 - pack.t * pack.t))
            .epsilon(1e-9));

  // Residual guarantee against the exact 2-D system.
  Cap2dExactSystem sys(pack.centers, pack.t);
  for (int i = 0; i < pack.kept_count(); ++i) {
    std::vector<int> others;
    for (int j = 0; j < pack.kept_count(); ++j)
      if (j != i) others.push_back(j);
    CHECK(sys.residual(i, others) >=
          0.5 * pack.c3 * pack.per_cap_volume - 1e-9);
  }

  // Union of kept caps: at most N v, at least K c3 v / 2.
  std::vector<int> all(pack.kept_count());
  for (int i = 0; i < pack.kept_count(); ++i) all[i] = i;
  double u = cap_union_area_2d(pack.centers, pack.t, all);
  CHECK(u <= 100 * pack.per_cap_volume + 1e-9);
  CHECK(u >= 0.5 * pack.kept_count() * pack.c3 * pack.per_cap_volume - 1e-9);
}

TEST_CASE("cap packing keeps a quarter of requested caps at d=2, N=100") {
  int min_kept = 1000;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto pack = cap_packing(2, 100, seed);
    min_kept = std::min(min_kept, pack.kept_count());
  }
  CHECK(min_kept >= 25);
}

TEST_CASE("cap packing: infeasible height reported") {
  CHECK_THROWS_AS(cap_packing(2, 2, 3), InfeasiblePackingError);
}

TEST_CASE("MC cap system agrees with the exact 2-D system") {
  Rng rng(17);
  std::vector<Vector> centers;
  for (int i = 0; i < 12; ++i) centers.push_back(rng.unit_vec(2));
  double t = 0.9;
  Cap2dExactSystem exact(centers, t);
  CapMcSystem mc(2, centers, t, 123, 100000);
  std::vector<int> others = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11};
  double re = exact.residual(0, others);
  double rm = mc.residual(0, others);
  double se = mc.volume(0) / std::sqrt(100000.0);  // generous binomial bound
  CHECK(std::fabs(re - rm) < 4 * se + 0.02 * mc.volume(0));
  CHECK(std::fabs(exact.union_volume() - mc.union_volume()) <
        0.05 * 12 * mc.volume(0));
}

TEST_CASE("antipodal ball packing: exact 1-D lattice") {
  auto pack = antipodal_ball_packing(1, 0.1, 9);
  int expect_min = static_cast<int>(std::floor((std::sqrt(2.0) - 0.2) / 0.2));
  CHECK(static_cast<int>(pack.centers.size()) >= expect_min);
  for (const auto& c : pack.centers) {
    CHECK(c[0] > 0.1);
    CHECK(c[0] < std::sqrt(2.0) - 0.1 + 1e-12);
  }
  auto all = pack.all_centers();
  for (std::size_t i = 0; i < all.size(); ++i)
    for (std::size_t j = i + 1; j < all.size(); ++j)
      CHECK((all[i] - all[j]).norm() >= 2 * 0.1 - 1e-12);
}

TEST_CASE("antipodal ball packing: d=2 greedy pass") {
  double delta = 0.05;
  auto pack = antipodal_ball_packing(2, delta, 4);
  auto all = pack.all_centers();
  double R = std::sqrt(4.0);
  for (const auto& c : all) CHECK(c.norm() + delta <= R + 1e-9);
  for (std::size_t i = 0; i < all.size(); ++i)
    for (std::size_t j = i + 1; j < all.size(); ++j)
      CHECK((all[i] - all[j]).norm() >= 2 * delta - 1e-12);
  // Record the empirical packing constant c from K = (0.5 c)^2 vol(B(R)) / vol(B(delta)).
  double K = static_cast<double>(pack.centers.size());
  double c_emp = 2.0 * std::sqrt(K * ball_volume(2, delta) / ball_volume(2, R));
  CHECK(K >= 1);
  CHECK(c_emp > 0.0);
  CHECK(c_emp <= 1.0);
  MESSAGE("antipodal packing d=2 delta=0.05: K=", K, " c_emp=", c_emp);
}

TEST_CASE("antipodal ball packing: invalid delta") {
  CHECK_THROWS_AS(antipodal_ball_packing(1, 0.5, 1), DomainError);
  CHECK_THROWS_AS(antipodal_ball_packing(1, -0.1, 1), DomainError);
}
