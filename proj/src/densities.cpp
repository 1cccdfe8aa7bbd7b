#include "shapelab/densities.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Dense>

#include "shapelab/quadrature.hpp"
#include "shapelab/rng.hpp"

namespace shapelab {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double log_gaussian(const Vector& x) {
  return -0.5 * x.squaredNorm() - 0.5 * x.size() * std::log(2.0 * M_PI);
}

}  // namespace

double Density::eval(const Vector& x) const {
  double l = log_eval(x);
  return std::isinf(l) && l < 0 ? 0.0 : std::exp(l);
}

// ---------------------------------------------------------------------------
// Gaussian / uniform variants.

GaussianDensity::GaussianDensity(int d)
    : Density(d, std::sqrt(static_cast<double>(d)) + 9.0, true) {
  if (d < 1) throw InvalidDimensionError("GaussianDensity: d >= 1");
}

double GaussianDensity::log_eval(const Vector& x) const { return log_gaussian(x); }

Matrix GaussianDensity::sample(long n, std::uint64_t seed) const {
  Rng rng(derive_stream(seed, 0x6a55));
  Matrix out(n, dim_);
  for (long i = 0; i < n; ++i)
    for (int j = 0; j < dim_; ++j) out(i, j) = rng.normal();
  return out;
}

UniformBallDensity::UniformBallDensity(int d, double radius)
    : Density(d, radius, true), radius_(radius) {
  if (d < 1) throw InvalidDimensionError("UniformBallDensity: d >= 1");
  if (!(radius > 0)) throw DomainError("UniformBallDensity: radius > 0");
  log_density_ = -std::log(ball_volume(d, radius));
}

double UniformBallDensity::log_eval(const Vector& x) const {
  return x.norm() <= radius_ ? log_density_ : kNegInf;
}

Matrix UniformBallDensity::sample(long n, std::uint64_t seed) const {
  Rng rng(derive_stream(seed, 0xba11));
  Matrix out(n, dim_);
  for (long i = 0; i < n; ++i) out.row(i) = rng.ball_point(dim_, radius_).transpose();
  return out;
}

UniformBodyDensity::UniformBodyDensity(ConvexBody body)
    : Density(body.dim(), 0.0, true), body_(std::move(body)) {
  if (body_.volume() <= 0) throw InvalidFamilyError("UniformBodyDensity: flat body");
  center_ = Vector::Zero(dim_);
  for (const auto& v : body_.vertices()) center_ += v;
  center_ /= static_cast<double>(body_.vertices().size());
  ball_radius_ = 0.0;
  for (const auto& v : body_.vertices())
    ball_radius_ = std::max(ball_radius_, (v - center_).norm());
  support_radius_ = center_.norm() + ball_radius_;
  log_density_ = -std::log(body_.volume());
}

double UniformBodyDensity::log_eval(const Vector& x) const {
  return body_.contains(x) ? log_density_ : kNegInf;
}

Matrix UniformBodyDensity::sample(long n, std::uint64_t seed) const {
  Rng rng(derive_stream(seed, 0xb0d7));
  Matrix out(n, dim_);
  long attempts = 0;
  for (long i = 0; i < n; ++i) {
    for (;;) {
      ++attempts;
      if (attempts > 2'000'000 + 64 * n)
        throw EnvelopeError("UniformBodyDensity: rejection rate too low");
      Vector x = center_ + rng.ball_point(dim_, ball_radius_);
      if (body_.contains(x)) {
        out.row(i) = x.transpose();
        break;
      }
    }
  }
  return out;
}

std::vector<double> UniformBodyDensity::breakpoints_1d() const {
  if (dim_ != 1) return {};
  return {body_.vertices()[0][0], body_.vertices()[1][0]};
}

DensityPtr make_uniform_interval(double a, double b) {
  Vector va(1), vb(1);
  va << a;
  vb << b;
  return std::make_shared<UniformBodyDensity>(convex_hull({va, vb}));
}

// ---------------------------------------------------------------------------
// Cap family.

namespace {

// Volume of the union of the caps listed in `subset`.
double caps_union_volume(const CapPacking& pack, const std::vector<int>& subset,
                         std::uint64_t seed) {
  if (subset.empty()) return 0.0;
  if (pack.dim == 1) {
    std::vector<Interval> iv;
    for (int i : subset) {
      if (pack.centers[i][0] > 0)
        iv.push_back({pack.t, 1.0});
      else
        iv.push_back({-1.0, -pack.t});
    }
    return IntervalSystem(iv).union_volume();
  }
  if (pack.dim == 2) return cap_union_area_2d(pack.centers, pack.t, subset);
  std::vector<Vector> centers;
  for (int i : subset) centers.push_back(pack.centers[i]);
  CapMcSystem sys(pack.dim, centers, pack.t, derive_stream(seed, 0xcafd), 200000);
  return sys.union_volume();
}

}  // namespace

CapFamilyDensity::CapFamilyDensity(CapPacking packing, std::vector<int> alpha,
                                   std::uint64_t seed)
    : Density(packing.dim, 1.0, false),
      packing_(std::move(packing)),
      alpha_(std::move(alpha)) {
  if (static_cast<int>(alpha_.size()) != packing_.kept_count())
    throw InvalidFamilyError("CapFamilyDensity: alpha length != kept cap count");
  std::vector<int> deselected;
  for (int i = 0; i < packing_.kept_count(); ++i)
    if (!alpha_[i]) deselected.push_back(i);
  double ball = ball_volume(packing_.dim, 1.0);
  double removed = caps_union_volume(packing_, deselected, seed);
  support_volume_ = ball - removed;
  c_alpha_ = removed / ball;
  if (support_volume_ <= 1e-12 * ball)
    throw InvalidFamilyError("CapFamilyDensity: empty support");
  log_density_ = -std::log(support_volume_);
  // Uniform on the full ball (all caps selected) is the only log-concave case.
  log_concave_ = std::all_of(alpha_.begin(), alpha_.end(), [](int a) { return a != 0; });
}

bool CapFamilyDensity::in_support(const Vector& x) const {
  if (x.norm() > 1.0) return false;
  for (int i = 0; i < packing_.kept_count(); ++i)
    if (!alpha_[i] && packing_.centers[i].dot(x) >= packing_.t) return false;
  return true;
}

double CapFamilyDensity::log_eval(const Vector& x) const {
  return in_support(x) ? log_density_ : kNegInf;
}

Matrix CapFamilyDensity::sample(long n, std::uint64_t seed) const {
  Rng rng(derive_stream(seed, 0xca95));
  Matrix out(n, dim_);
  long attempts = 0;
  for (long i = 0; i < n; ++i) {
    for (;;) {
      ++attempts;
      if (attempts > 2'000'000 + 64 * n)
        throw EnvelopeError("CapFamilyDensity: rejection rate too low");
      Vector x = rng.ball_point(dim_);
      if (in_support(x)) {
        out.row(i) = x.transpose();
        break;
      }
    }
  }
  return out;
}

std::vector<double> CapFamilyDensity::breakpoints_1d() const {
  if (dim_ != 1) return {};
  return {-1.0, -packing_.t, packing_.t, 1.0};
}

CapFamilyDensity make_cap_family(CapPacking packing, std::vector<int> alpha,
                                 std::uint64_t seed) {
  return CapFamilyDensity(std::move(packing), std::move(alpha), seed);
}

// ---------------------------------------------------------------------------
// Bump family.

namespace {

double bump_g(double r, double delta) {
  return r <= delta ? 0.25 * (delta - r) * (delta - r) : 0.0;
}

// Integral over B(center, delta) of phi(g(|x-center|)) gamma(x) dx.
// d=1: direct quadrature. d=2: radial quadrature with the Bessel identity
// int_0^{2pi} exp(-r rho cos t) dt = 2 pi I_0(r rho). d>=3: Monte-Carlo.
double bump_ball_integral(const Vector& center, double delta,
                          const std::function<double(double)>& phi,
                          long mc_budget, std::uint64_t seed) {
  int d = static_cast<int>(center.size());
  if (d == 1) {
    double c = center[0];
    auto f = [&](double x) {
      Vector v(1);
      v << x;
      return phi(bump_g(std::fabs(x - c), delta)) * std::exp(log_gaussian(v));
    };
    return integrate(f, c - delta, c + delta, 1e-13, 200000).value;
  }
  if (d == 2) {
    double rho = center.norm();
    auto f = [&](double r) {
      double angular = std::exp(-0.5 * (rho * rho + r * r)) *
                       std::cyl_bessel_i(0.0, r * rho);
      return phi(bump_g(r, delta)) * angular * r;
    };
    // The 1/(2 pi) of gamma cancels against the angular 2 pi I_0.
    return integrate(f, 0.0, delta, 1e-13, 200000).value;
  }
  Rng rng(derive_stream(seed, 0xb317));
  double vol = ball_volume(d, delta);
  double acc = 0.0;
  for (long k = 0; k < mc_budget; ++k) {
    Vector x = center + rng.ball_point(d, delta);
    acc += phi(bump_g((x - center).norm(), delta)) * std::exp(log_gaussian(x));
  }
  return vol * acc / static_cast<double>(mc_budget);
}

}  // namespace

BumpFamilyDensity::BumpFamilyDensity(int d, double delta,
                                     std::vector<Vector> centers,
                                     std::vector<int> alpha,
                                     bool validate_spacing, long mc_budget,
                                     std::uint64_t seed)
    : Density(d, std::sqrt(static_cast<double>(d)) + 9.0 + delta, true),
      delta_(delta),
      centers_(std::move(centers)),
      alpha_(std::move(alpha)) {
  if (alpha_.size() != centers_.size())
    throw InvalidFamilyError("BumpFamilyDensity: alpha length != center count");
  if (!(delta_ > 0)) throw DomainError("BumpFamilyDensity: delta > 0");

  double min_dist = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < centers_.size(); ++i)
    for (std::size_t j = i + 1; j < centers_.size(); ++j)
      min_dist = std::min(min_dist, (active_center(static_cast<int>(i)) -
                                     active_center(static_cast<int>(j)))
                                        .norm());
  // Exactly-touching bumps (the 1-D lattice case) are the valid limit: the
  // overlap has measure zero and the log-density stays concave.
  spacing_valid_ = centers_.size() < 2 || min_dist >= 2 * delta_ * (1.0 - 1e-12);
  log_concave_ = spacing_valid_;
  if (validate_spacing && !spacing_valid_)
    throw InvalidFamilyError("BumpFamilyDensity: active centers closer than 2 delta");

  if (spacing_valid_) {
    double extra = 0.0;
    auto phi = [](double g) { return std::expm1(g); };
    for (std::size_t i = 0; i < centers_.size(); ++i)
      extra += bump_ball_integral(active_center(static_cast<int>(i)), delta_, phi,
                                  mc_budget, derive_stream(seed, 0x6e, i));
    normalizer_ = 1.0 + extra;
  } else if (d == 1) {
    double R = support_radius_;
    std::vector<double> cuts;
    for (std::size_t i = 0; i < centers_.size(); ++i) {
      double c = active_center(static_cast<int>(i))[0];
      cuts.push_back(c - delta_);
      cuts.push_back(c + delta_);
    }
    auto f = [&](double x) {
      Vector v(1);
      v << x;
      return std::exp(log_gaussian(v) + sum_bumps(v));
    };
    normalizer_ = integrate(f, -R, R, 1e-12, 2'000'000, cuts).value;
  } else {
    Rng rng(derive_stream(seed, 0x6e0));
    double acc = 0.0;
    for (long k = 0; k < mc_budget; ++k) {
      Vector x = rng.normal_vec(d);
      acc += std::exp(sum_bumps(x));
    }
    normalizer_ = acc / static_cast<double>(mc_budget);
  }
}

Vector BumpFamilyDensity::active_center(int i) const {
  return alpha_[i] ? centers_[i] : Vector(-centers_[i]);
}

double BumpFamilyDensity::sum_bumps(const Vector& x) const {
  double s = 0.0;
  for (std::size_t i = 0; i < centers_.size(); ++i) {
    double r = (x - active_center(static_cast<int>(i))).norm();
    if (r <= delta_) s += bump_g(r, delta_);
  }
  return s;
}

double BumpFamilyDensity::log_eval(const Vector& x) const {
  return log_gaussian(x) + sum_bumps(x) - std::log(normalizer_);
}

Matrix BumpFamilyDensity::sample(long n, std::uint64_t seed) const {
  Rng rng(derive_stream(seed, 0x6e5a));
  // Envelope: each sample point lies in at most one bump when spacing is
  // valid, so exp(sum g) <= exp(delta^2/4).
  double log_env = (spacing_valid_ ? 1.0 : static_cast<double>(alpha_.size())) *
                   0.25 * delta_ * delta_;
  Matrix out(n, dim_);
  long attempts = 0;
  for (long i = 0; i < n; ++i) {
    for (;;) {
      ++attempts;
      if (attempts > 2'000'000 + 64 * n)
        throw EnvelopeError("BumpFamilyDensity: rejection rate too low");
      Vector x = rng.normal_vec(dim_);
      double log_acc = sum_bumps(x) - log_env;
      if (std::log(std::max(rng.uniform(), 1e-300)) < log_acc) {
        out.row(i) = x.transpose();
        break;
      }
    }
  }
  return out;
}

std::vector<double> BumpFamilyDensity::breakpoints_1d() const {
  if (dim_ != 1) return {};
  std::vector<double> cuts;
  for (std::size_t i = 0; i < centers_.size(); ++i) {
    double c = active_center(static_cast<int>(i))[0];
    cuts.push_back(c - delta_);
    cuts.push_back(c);
    cuts.push_back(c + delta_);
  }
  return cuts;
}

BumpFamilyDensity make_bump_family(int d, double delta, int k_requested,
                                   std::vector<int> alpha, std::uint64_t seed,
                                   double validity_c) {
  AntipodalPacking pack =
      antipodal_ball_packing(d, delta, seed, k_requested, validity_c);
  if (static_cast<int>(alpha.size()) != static_cast<int>(pack.centers.size()))
    throw InvalidFamilyError(
        "make_bump_family: alpha length must equal the placed pair count (" +
        std::to_string(pack.centers.size()) + ")");
  return BumpFamilyDensity(d, delta, pack.centers, std::move(alpha), true,
                           400000, seed);
}

// ---------------------------------------------------------------------------
// Affine image.

AffineTransformedDensity::AffineTransformedDensity(DensityPtr base, Matrix a,
                                                   Vector b)
    : Density(base->dim(), 0.0, base->is_log_concave()),
      base_(std::move(base)),
      a_(std::move(a)),
      b_(std::move(b)) {
  Eigen::FullPivLU<Matrix> lu(a_);
  if (!lu.isInvertible())
    throw RankDeficiencyError("AffineTransformedDensity: singular matrix",
                              static_cast<int>(lu.rank()));
  a_inv_ = lu.inverse();
  log_det_ = std::log(std::fabs(lu.determinant()));
  double smax = a_.jacobiSvd().singularValues()[0];
  support_radius_ = smax * base_->support_radius() + b_.norm();
}

double AffineTransformedDensity::log_eval(const Vector& x) const {
  return base_->log_eval(a_inv_ * (x - b_)) - log_det_;
}

Matrix AffineTransformedDensity::sample(long n, std::uint64_t seed) const {
  Matrix base = base_->sample(n, seed);
  Matrix out(n, dim_);
  for (long i = 0; i < n; ++i)
    out.row(i) = (a_ * base.row(i).transpose() + b_).transpose();
  return out;
}

// ---------------------------------------------------------------------------
// Noise model.

double NoiseSpec::sample(Rng& rng) const {
  switch (kind) {
    case NoiseKind::gaussian:
      return scale * rng.normal();
    case NoiseKind::laplace: {
      double u = rng.uniform() - 0.5;
      return -scale * (u < 0 ? -1.0 : 1.0) * std::log(1.0 - 2.0 * std::fabs(u));
    }
    default:
      throw UsageError("NoiseSpec: unknown kind");
  }
}

double NoiseSpec::tail_prob(double t) const {
  if (t <= 0) return 1.0;
  switch (kind) {
    case NoiseKind::gaussian:
      return std::erfc(t / (scale * std::sqrt(2.0)));
    case NoiseKind::laplace:
      return std::exp(-t / scale);
    default:
      throw UsageError("NoiseSpec: unknown kind");
  }
}

double NoiseSpec::tail_integral() const {
  double upper = scale * (kind == NoiseKind::gaussian ? 14.0 : 80.0);
  auto f = [&](double t) { return std::sqrt(tail_prob(t)); };
  return integrate(f, 0.0, upper, 1e-10).value;
}

double NoiseSpec::abs_moment(double order) const {
  double upper = scale * (kind == NoiseKind::gaussian ? 14.0 : 120.0);
  // E|xi|^p = int_0^inf p t^{p-1} P(|xi|>t) dt.
  auto f = [&](double t) {
    return order * std::pow(t, order - 1.0) * tail_prob(t);
  };
  return integrate(f, 0.0, upper, 1e-10).value;
}

NoiseSpec make_noise(NoiseKind kind, double scale) {
  NoiseSpec n;
  n.kind = kind;
  n.scale = scale;
  n.moment_order = 2.5;
  n.moment_bound = 1.25 * std::max(n.abs_moment(2.5), n.tail_integral());
  return n;
}

// ---------------------------------------------------------------------------
// Tail envelopes.

double TailEnvelope::m_r(double r, int d) const {
  return std::exp(-c_a * r + c_b) * d * ball_volume(d, 1.0);
}

TailEnvelope envelope_for(const Density& density) {
  int d = density.dim();
  TailEnvelope env;
  if (auto* g = dynamic_cast<const GaussianDensity*>(&density)) {
    (void)g;
    env.c_a = 1.0;
    env.c_b = 0.5 - 0.5 * d * std::log(2.0 * M_PI);
    return env;
  }
  if (auto* b = dynamic_cast<const BumpFamilyDensity*>(&density)) {
    env.c_a = 1.0;
    env.c_b = 0.5 + 0.25 * b->delta() * b->delta() - 0.5 * d * std::log(2.0 * M_PI);
    return env;
  }
  if (auto* c = dynamic_cast<const CapFamilyDensity*>(&density)) {
    env.c_a = 1.0;
    env.c_b = -std::log(c->normalizer()) + 1.0;
    return env;
  }
  if (auto* u = dynamic_cast<const UniformBallDensity*>(&density)) {
    env.c_a = 1.0;
    env.c_b = -std::log(ball_volume(d, u->radius())) + u->radius();
    return env;
  }
  if (auto* u = dynamic_cast<const UniformBodyDensity*>(&density)) {
    env.c_a = 1.0;
    env.c_b = -std::log(u->body().volume()) + density.support_radius();
    return env;
  }
  throw DomainError("envelope_for: no envelope rule for this density type");
}

bool envelope_dominates(const TailEnvelope& env, const Density& density,
                        long n_points, std::uint64_t seed) {
  Matrix pts = density.sample(n_points, derive_stream(seed, 0xe17));
  for (long i = 0; i < n_points; ++i) {
    Vector x = pts.row(i).transpose();
    double bound = -env.c_a * x.norm() + env.c_b;
    if (density.log_eval(x) > bound + 1e-9) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Distances.

namespace {

struct PairIntegrand {
  const Density* p;
  const Density* q;
  bool hellinger;

  double operator()(const Vector& x) const {
    double fp = p->eval(x), fq = q->eval(x);
    if (hellinger) {
      double s = std::sqrt(fp) - std::sqrt(fq);
      return 0.5 * s * s;
    }
    return 0.5 * std::fabs(fp - fq);
  }
};

std::optional<DistanceResult> same_geometry_cap_distance(
    const CapFamilyDensity& p, const CapFamilyDensity& q, bool hellinger,
    std::uint64_t seed) {
  const CapPacking& pp = p.packing();
  const CapPacking& qp = q.packing();
  if (pp.dim != qp.dim || pp.t != qp.t ||
      pp.centers.size() != qp.centers.size())
    return std::nullopt;
  for (std::size_t i = 0; i < pp.centers.size(); ++i)
    if (pp.centers[i] != qp.centers[i]) return std::nullopt;
  if (pp.dim > 2) return std::nullopt;  // exact unions only for d <= 2

  std::vector<int> desel_union;
  for (int i = 0; i < pp.kept_count(); ++i)
    if (!p.alpha()[i] || !q.alpha()[i]) desel_union.push_back(i);
  double ball = ball_volume(pp.dim, 1.0);
  double vol_inter = ball - caps_union_volume(pp, desel_union, seed);
  double va = p.normalizer(), vb = q.normalizer();

  DistanceResult out;
  out.std_err = 1e-10;
  if (hellinger) {
    double h = std::sqrt(1.0 / va) - std::sqrt(1.0 / vb);
    out.value = 0.5 * (vol_inter * h * h + (va - vol_inter) / va +
                       (vb - vol_inter) / vb);
  } else {
    out.value = 0.5 * (vol_inter * std::fabs(1.0 / va - 1.0 / vb) +
                       (va - vol_inter) / va + (vb - vol_inter) / vb);
  }
  return out;
}

std::optional<DistanceResult> same_geometry_bump_distance(
    const BumpFamilyDensity& p, const BumpFamilyDensity& q, bool hellinger,
    std::uint64_t seed) {
  if (p.delta() != q.delta() || p.centers().size() != q.centers().size())
    return std::nullopt;
  for (std::size_t i = 0; i < p.centers().size(); ++i)
    if (p.centers()[i] != q.centers()[i]) return std::nullopt;
  if (!p.spacing_valid() || !q.spacing_valid()) return std::nullopt;
  if (p.dim() > 2) return std::nullopt;

  double delta = p.delta();
  double c_norm = 0.5 * (p.normalizer() + q.normalizer());
  std::function<double(double)> phi;
  if (hellinger)
    phi = [](double g) {
      double s = std::expm1(0.5 * g);
      return s * s;
    };
  else
    phi = [](double g) { return std::expm1(g); };

  double acc = 0.0;
  for (std::size_t i = 0; i < p.centers().size(); ++i) {
    if (p.alpha()[i] == q.alpha()[i]) continue;
    // The pair differs on B(x_i, delta) and B(-x_i, delta); by the symmetry
    // of gamma both balls contribute the same amount.
    double ti = bump_ball_integral(p.centers()[i], delta, phi, 400000,
                                   derive_stream(seed, 0xd1f, i));
    acc += 2.0 * ti;
  }
  DistanceResult out;
  out.value = 0.5 * acc / c_norm;
  out.std_err = 1e-9;
  return out;
}

DistanceResult quadrature_distance_1d(const Density& p, const Density& q,
                                      bool hellinger, long budget) {
  double R = std::max(p.support_radius(), q.support_radius());
  PairIntegrand fi{&p, &q, hellinger};
  auto f = [&](double x) {
    Vector v(1);
    v << x;
    return fi(v);
  };
  std::vector<double> cuts = p.breakpoints_1d();
  for (double c : q.breakpoints_1d()) cuts.push_back(c);
  QuadResult qr = integrate(f, -R, R, 1e-8, budget, cuts);
  return {qr.value, qr.abs_err, qr.converged};
}

DistanceResult quadrature_distance_2d(const Density& p, const Density& q,
                                      bool hellinger, long budget) {
  double R = std::max(p.support_radius(), q.support_radius());
  PairIntegrand fi{&p, &q, hellinger};
  long used = 0;
  bool ok = true;
  auto inner = [&](double x) {
    auto g = [&](double y) {
      Vector v(2);
      v << x, y;
      return fi(v);
    };
    QuadResult r = integrate(g, -R, R, 1e-7 / (2 * R), budget / 400);
    used += r.evals;
    ok = ok && r.converged;
    return r.value;
  };
  QuadResult outer = integrate(inner, -R, R, 1e-6, 4000);
  ok = ok && outer.converged && used < budget;
  return {outer.value, outer.abs_err, ok};
}

DistanceResult mc_distance(const Density& p, const Density& q, bool hellinger,
                           long budget, std::uint64_t seed) {
  long m = std::max<long>(budget / 2, 1);
  Matrix xs_p = p.sample(m, derive_stream(seed, 0xd15, 1));
  Matrix xs_q = q.sample(m, derive_stream(seed, 0xd15, 2));
  PairIntegrand fi{&p, &q, hellinger};
  double sum = 0.0, sumsq = 0.0;
  long n_tot = 2 * m;
  auto accum = [&](const Matrix& xs) {
    for (long i = 0; i < xs.rows(); ++i) {
      Vector x = xs.row(i).transpose();
      double mix = 0.5 * (p.eval(x) + q.eval(x));
      double w = mix > 0 ? fi(x) / mix : 0.0;
      sum += w;
      sumsq += w * w;
    }
  };
  accum(xs_p);
  accum(xs_q);
  double mean = sum / n_tot;
  double var = std::max(0.0, sumsq / n_tot - mean * mean);
  return {mean, std::sqrt(var / n_tot), true};
}

DistanceResult distance_impl(const Density& p, const Density& q,
                             DistanceMethod method, long budget,
                             std::uint64_t seed, bool hellinger) {
  if (p.dim() != q.dim())
    throw DomainError("distance: densities must share a dimension");
  if (method == DistanceMethod::mc) return mc_distance(p, q, hellinger, budget, seed);

  if (auto* cp = dynamic_cast<const CapFamilyDensity*>(&p))
    if (auto* cq = dynamic_cast<const CapFamilyDensity*>(&q))
      if (auto r = same_geometry_cap_distance(*cp, *cq, hellinger, seed)) return *r;
  if (auto* bp = dynamic_cast<const BumpFamilyDensity*>(&p))
    if (auto* bq = dynamic_cast<const BumpFamilyDensity*>(&q))
      if (auto r = same_geometry_bump_distance(*bp, *bq, hellinger, seed)) return *r;

  if (p.dim() == 1) return quadrature_distance_1d(p, q, hellinger, budget);
  if (p.dim() == 2) return quadrature_distance_2d(p, q, hellinger, budget);
  throw DomainError("distance: quadrature mode supports d <= 2; use mc");
}

}  // namespace

DistanceResult hellinger_sq(const Density& p, const Density& q,
                            DistanceMethod method, long budget,
                            std::uint64_t seed) {
  return distance_impl(p, q, method, budget, seed, true);
}

DistanceResult total_variation(const Density& p, const Density& q,
                               DistanceMethod method, long budget,
                               std::uint64_t seed) {
  return distance_impl(p, q, method, budget, seed, false);
}

// ---------------------------------------------------------------------------
// Log-concavity probe.

LogConcavityReport verify_log_concave(const Density& density, int n_lines,
                                      int n_points, std::uint64_t seed) {
  LogConcavityReport rep;
  for (int line = 0; line < n_lines; ++line) {
    Matrix ends = density.sample(2, derive_stream(seed, 0x11e, line));
    Vector a = ends.row(0).transpose(), b = ends.row(1).transpose();
    if ((b - a).norm() < 1e-12) continue;
    std::vector<double> phi(n_points);
    for (int k = 0; k < n_points; ++k) {
      double t = static_cast<double>(k) / (n_points - 1);
      phi[k] = density.log_eval(a + t * (b - a));
    }
    bool seen_finite = false, seen_gap_after_finite = false;
    for (int k = 0; k < n_points; ++k) {
      bool fin = std::isfinite(phi[k]);
      if (fin && seen_gap_after_finite) rep.support_nonconvex = true;
      if (!fin && seen_finite) seen_gap_after_finite = true;
      if (fin) seen_finite = true;
    }
    for (int k = 1; k + 1 < n_points; ++k) {
      if (!std::isfinite(phi[k - 1]) || !std::isfinite(phi[k]) ||
          !std::isfinite(phi[k + 1]))
        continue;
      double second = phi[k - 1] - 2.0 * phi[k] + phi[k + 1];
      rep.max_violation = std::max(rep.max_violation, second);
    }
    ++rep.lines_checked;
  }
  return rep;
}

std::pair<double, double> mc_density_integral(const Density& density, long budget,
                                              std::uint64_t seed) {
  Rng rng(derive_stream(seed, 0x171));
  double R = density.support_radius();
  double vol = ball_volume(density.dim(), R);
  double sum = 0, sumsq = 0;
  for (long i = 0; i < budget; ++i) {
    double f = density.eval(rng.ball_point(density.dim(), R));
    sum += f;
    sumsq += f * f;
  }
  double mean = sum / budget;
  double var = std::max(0.0, sumsq / budget - mean * mean);
  return {vol * mean, vol * std::sqrt(var / budget)};
}

}  // namespace shapelab
