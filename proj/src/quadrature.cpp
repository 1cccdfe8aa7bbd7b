#include "shapelab/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

namespace shapelab {

namespace {

struct AdaptiveState {
  const std::function<double(double)>* f;
  long evals = 0;
  long max_evals = 0;
  bool budget_hit = false;

  double eval(double x) {
    ++evals;
    return (*f)(x);
  }
};

// Classic adaptive Simpson with error sharing. Depth cap guards against
// pathological integrands; the budget turns into a flagged partial result.
double simpson_rec(AdaptiveState& st, double a, double b, double fa, double fm,
                   double fb, double whole, double tol, int depth,
                   double& err_accum) {
  if (st.evals + 2 > st.max_evals) {
    st.budget_hit = true;
    err_accum += tol;
    return whole;
  }
  double m = 0.5 * (a + b);
  double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  double flm = st.eval(lm), frm = st.eval(rm);
  double h = b - a;
  double left = h / 12.0 * (fa + 4 * flm + fm);
  double right = h / 12.0 * (fm + 4 * frm + fb);
  double delta = left + right - whole;
  if (depth <= 0) {
    st.budget_hit = true;  // depth exhaustion flagged like a budget issue
    err_accum += std::fabs(delta);
    return left + right + delta / 15.0;
  }
  if (std::fabs(delta) <= 15.0 * tol) {
    err_accum += std::fabs(delta) / 15.0;
    return left + right + delta / 15.0;
  }
  double lv = simpson_rec(st, a, m, fa, flm, fm, left, tol * 0.5, depth - 1, err_accum);
  double rv = simpson_rec(st, m, b, fm, frm, fb, right, tol * 0.5, depth - 1, err_accum);
  return lv + rv;
}

double simpson_piece(AdaptiveState& st, double a, double b, double tol,
                     double& err_accum) {
  if (!(b > a)) return 0.0;
  double fa = st.eval(a);
  double fb = st.eval(b);
  double m = 0.5 * (a + b);
  double fm = st.eval(m);
  double whole = (b - a) / 6.0 * (fa + 4 * fm + fb);
  return simpson_rec(st, a, b, fa, fm, fb, whole, tol, 48, err_accum);
}

}  // namespace

QuadResult integrate(const std::function<double(double)>& f, double a, double b,
                     double tol_abs, long max_evals,
                     const std::vector<double>& breakpoints) {
  QuadResult out;
  if (!(b > a)) return out;

  std::vector<double> cuts;
  cuts.push_back(a);
  for (double c : breakpoints)
    if (c > a && c < b) cuts.push_back(c);
  cuts.push_back(b);
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  AdaptiveState st;
  st.f = &f;
  st.max_evals = max_evals;
  double err = 0.0;
  double total = 0.0;
  double piece_tol = tol_abs / static_cast<double>(cuts.size() - 1);
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i)
    total += simpson_piece(st, cuts[i], cuts[i + 1], piece_tol, err);

  out.value = total;
  out.abs_err = err;
  out.evals = st.evals;
  out.converged = !st.budget_hit;
  return out;
}

namespace {

// Nodes/weights generated once by Newton iteration on Legendre polynomials.
void legendre_rule(int n, std::vector<double>& x, std::vector<double>& w) {
  x.assign(n, 0.0);
  w.assign(n, 0.0);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double z = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p1 = 1.0, p2 = 0.0;
      for (int j = 0; j < n; ++j) {
        double p3 = p2;
        p2 = p1;
        p1 = ((2.0 * j + 1.0) * z * p2 - j * p3) / (j + 1.0);
      }
      pp = n * (z * p1 - p2) / (z * z - 1.0);
      double z1 = z;
      z = z1 - p1 / pp;
      if (std::fabs(z - z1) < 1e-15) break;
    }
    x[i] = -z;
    x[n - 1 - i] = z;
    w[i] = 2.0 / ((1.0 - z * z) * pp * pp);
    w[n - 1 - i] = w[i];
  }
}

const std::pair<std::vector<double>, std::vector<double>>& rule_cache(int n) {
  static std::map<int, std::pair<std::vector<double>, std::vector<double>>> cache;
  auto it = cache.find(n);
  if (it == cache.end()) {
    std::vector<double> x, w;
    legendre_rule(n, x, w);
    it = cache.emplace(n, std::make_pair(std::move(x), std::move(w))).first;
  }
  return it->second;
}

}  // namespace

const std::vector<double>& gauss_nodes(int n) { return rule_cache(n).first; }
const std::vector<double>& gauss_weights(int n) { return rule_cache(n).second; }

}  // namespace shapelab
