#include <algorithm>
#include <cmath>
#include <limits>

#include "shapelab/estimators.hpp"
#include "shapelab/quadrature.hpp"

namespace shapelab {

namespace {

// Segment kernels for piecewise-linear exponents, with precomputed e^phi.
//   J0 = int_0^1 e^{(1-t)a + t b} dt,  J1 = int_0^1 (1-t) e^{(1-t)a + t b} dt.
double kernel_j0(double ea, double eb, double u) {
  if (std::fabs(u) < 1e-5)
    return ea * (1.0 + 0.5 * u + u * u / 6.0 + u * u * u / 24.0);
  return (eb - ea) / u;
}

double kernel_j1(double ea, double eb, double u) {
  if (std::fabs(u) < 1e-4)
    return ea * (0.5 + u / 6.0 + u * u / 24.0 + u * u * u / 120.0);
  return (eb - ea * (1.0 + u)) / (u * u);
}

struct MleState {
  double z = 0.0;      // int e^phi
  Vector weight;       // d/dphi_a of int e^phi
};

MleState evaluate(const Vector& knots, const Vector& phi) {
  const int m = static_cast<int>(knots.size());
  MleState st;
  st.weight = Vector::Zero(m);
  Vector e(m);
  for (int a = 0; a < m; ++a) e[a] = std::exp(phi[a]);
  for (int a = 0; a + 1 < m; ++a) {
    double len = knots[a + 1] - knots[a];
    double u = phi[a + 1] - phi[a];
    st.z += len * kernel_j0(e[a], e[a + 1], u);
    st.weight[a] += len * kernel_j1(e[a], e[a + 1], u);
    st.weight[a + 1] += len * kernel_j1(e[a + 1], e[a], -u);
  }
  return st;
}

// Pool-adjacent-violators projection onto nonincreasing sequences.
void pava_antitonic(Vector& s) {
  const int m = static_cast<int>(s.size());
  if (m <= 1) return;
  std::vector<double> val(m);
  std::vector<int> cnt(m);
  int top = 0;
  for (int i = 0; i < m; ++i) {
    val[top] = s[i];
    cnt[top] = 1;
    ++top;
    while (top >= 2 && val[top - 2] < val[top - 1]) {
      double merged = (val[top - 2] * cnt[top - 2] + val[top - 1] * cnt[top - 1]) /
                      (cnt[top - 2] + cnt[top - 1]);
      cnt[top - 2] += cnt[top - 1];
      val[top - 2] = merged;
      --top;
    }
  }
  int pos = 0;
  for (int b = 0; b < top; ++b)
    for (int k = 0; k < cnt[b]; ++k) s[pos++] = val[b];
}

struct Theta {
  double phi0;
  Vector s;  // m-1 slopes, constrained nonincreasing
};

Vector theta_to_phi(const Vector& knots, const Theta& th) {
  const int m = static_cast<int>(knots.size());
  Vector phi(m);
  phi[0] = th.phi0;
  for (int a = 0; a + 1 < m; ++a)
    phi[a + 1] = phi[a] + th.s[a] * (knots[a + 1] - knots[a]);
  return phi;
}

}  // namespace

Mle1d logconcave_mle_1d(const Vector& x, const Mle1dOptions& opts) {
  const int n = static_cast<int>(x.size());
  if (n < 2) throw DegenerateSampleError("logconcave_mle_1d: need n >= 2");
  std::vector<double> sorted(x.data(), x.data() + n);
  std::sort(sorted.begin(), sorted.end());
  if (sorted.front() == sorted.back())
    throw DegenerateSampleError("logconcave_mle_1d: all samples equal");

  // Distinct knots with multiplicities.
  std::vector<double> kv;
  std::vector<double> wv;
  for (double v : sorted) {
    if (!kv.empty() && v == kv.back())
      wv.back() += 1.0;
    else {
      kv.push_back(v);
      wv.push_back(1.0);
    }
  }
  const int m = static_cast<int>(kv.size());
  Vector knots = Eigen::Map<Vector>(kv.data(), m);
  Vector w = Eigen::Map<Vector>(wv.data(), m) / static_cast<double>(n);

  // Objective psi(phi) = sum w_a phi_a - log int e^phi; invariant under
  // adding constants, so exact normalization is free at the end.
  auto psi_grad = [&](const Vector& phi, Vector* grad) {
    MleState st = evaluate(knots, phi);
    double val = w.dot(phi) - std::log(st.z);
    if (grad) *grad = w - st.weight / st.z;
    return val;
  };

  // Start from the Gaussian fit through the sample moments.
  double mu = 0, var = 0;
  for (double v : sorted) mu += v;
  mu /= n;
  for (double v : sorted) var += (v - mu) * (v - mu);
  var = std::max(var / n, 1e-12);
  Theta th;
  Vector phi0(m);
  for (int a = 0; a < m; ++a)
    phi0[a] = -0.5 * std::log(2 * M_PI * var) - 0.5 * (knots[a] - mu) * (knots[a] - mu) / var;
  th.phi0 = phi0[0];
  th.s.resize(m - 1);
  for (int a = 0; a + 1 < m; ++a)
    th.s[a] = (phi0[a + 1] - phi0[a]) / (knots[a + 1] - knots[a]);
  pava_antitonic(th.s);

  // FISTA ascent in (phi_1, slopes) with PAVA as the projection.
  Theta cur = th, prev = th;
  double t_prev = 1.0;
  double step = 1.0;
  Vector phi = theta_to_phi(knots, cur);
  double f_cur = psi_grad(phi, nullptr);
  int it = 0;
  int stall = 0;
  double best = f_cur;
  for (; it < opts.max_iterations; ++it) {
    double t_cur = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t_prev * t_prev));
    double beta = (t_prev - 1.0) / t_cur;
    Theta y;
    y.phi0 = cur.phi0 + beta * (cur.phi0 - prev.phi0);
    y.s = cur.s + beta * (cur.s - prev.s);
    pava_antitonic(y.s);

    Vector phi_y = theta_to_phi(knots, y);
    Vector grad_phi;
    double f_y = psi_grad(phi_y, &grad_phi);

    // Chain rule into theta coordinates.
    double g0 = grad_phi.sum();
    Vector gs(m - 1);
    double suffix = 0;
    for (int a = m - 1; a >= 1; --a) {
      suffix += grad_phi[a];
      gs[a - 1] = suffix * (knots[a] - knots[a - 1]);
    }

    Theta next;
    double f_next = 0;
    for (;;) {
      next.phi0 = y.phi0 + step * g0;
      next.s = y.s + step * gs;
      pava_antitonic(next.s);
      Vector phi_n = theta_to_phi(knots, next);
      f_next = psi_grad(phi_n, nullptr);
      double d2 = (next.s - y.s).squaredNorm() +
                  (next.phi0 - y.phi0) * (next.phi0 - y.phi0);
      double lin = g0 * (next.phi0 - y.phi0) + gs.dot(next.s - y.s);
      if (f_next >= f_y + lin - d2 / (2 * step) - 1e-13 * (1 + std::fabs(f_y)))
        break;
      step *= 0.5;
      if (step < 1e-13) break;
    }

    double align = g0 * (next.phi0 - cur.phi0) + gs.dot(next.s - cur.s);
    prev = cur;
    cur = next;
    t_prev = (align < 0) ? 1.0 : t_cur;
    step = std::min(step * 1.1, 64.0);

    if (f_next > best + opts.tol * (1.0 + std::fabs(best))) {
      best = f_next;
      stall = 0;
    } else {
      best = std::max(best, f_next);
      if (++stall > 60) {
        ++it;
        break;
      }
    }
  }

  Mle1d out;
  out.knots = knots;
  Vector phi_fin = theta_to_phi(knots, cur);
  MleState st = evaluate(knots, phi_fin);
  out.log_f = phi_fin.array() - std::log(st.z);
  out.objective = w.dot(out.log_f);
  out.iterations = it;
  out.converged = it < opts.max_iterations;
  return out;
}

double Mle1d::log_eval(double x) const {
  const int m = static_cast<int>(knots.size());
  if (x < knots[0] || x > knots[m - 1])
    return -std::numeric_limits<double>::infinity();
  int lo = 0, hi = m - 1;
  while (hi - lo > 1) {
    int mid = (lo + hi) / 2;
    if (knots[mid] <= x)
      lo = mid;
    else
      hi = mid;
  }
  double len = knots[hi] - knots[lo];
  if (len <= 0) return log_f[lo];
  double t = (x - knots[lo]) / len;
  return (1 - t) * log_f[lo] + t * log_f[hi];
}

double Mle1d::eval(double x) const {
  double l = log_eval(x);
  return std::isinf(l) ? 0.0 : std::exp(l);
}

double Mle1d::integral() const {
  double z = 0;
  for (int a = 0; a + 1 < knots.size(); ++a) {
    double u = log_f[a + 1] - log_f[a];
    z += (knots[a + 1] - knots[a]) *
         kernel_j0(std::exp(log_f[a]), std::exp(log_f[a + 1]), u);
  }
  return z;
}

double Mle1d::mean() const {
  double acc = 0;
  for (int a = 0; a + 1 < knots.size(); ++a) {
    double len = knots[a + 1] - knots[a];
    double u = log_f[a + 1] - log_f[a];
    double ea = std::exp(log_f[a]), eb = std::exp(log_f[a + 1]);
    // int_seg x e^phi = len (z_a J0 + len J1(right-first)).
    acc += len * (knots[a] * kernel_j0(ea, eb, u) + len * kernel_j1(eb, ea, -u));
  }
  return acc;
}

double Mle1d::hellinger_sq_to(const Density& ref) const {
  double lo = std::min(knots[0], -ref.support_radius());
  double hi = std::max(knots[knots.size() - 1], ref.support_radius());
  std::vector<double> cuts(knots.data(), knots.data() + knots.size());
  for (double b : ref.breakpoints_1d()) cuts.push_back(b);
  auto f = [&](double x) {
    Vector v(1);
    v << x;
    double s = std::sqrt(eval(x)) - std::sqrt(ref.eval(v));
    return 0.5 * s * s;
  };
  return integrate(f, lo, hi, 1e-9, 4'000'000, cuts).value;
}

}  // namespace shapelab
