#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "shapelab/common.hpp"
#include "shapelab/errors.hpp"
#include "shapelab/geometry.hpp"
#include "shapelab/rng.hpp"

namespace shapelab {

// Evaluable, sampleable probability density. Immutable after construction;
// samplers are pure functions of (n, seed).
class Density {
 public:
  virtual ~Density() = default;

  int dim() const { return dim_; }
  // Radius R with P(|X| > R) <= 1e-12.
  double support_radius() const { return support_radius_; }
  bool is_log_concave() const { return log_concave_; }

  virtual double log_eval(const Vector& x) const = 0;  // -inf outside support
  double eval(const Vector& x) const;

  virtual Matrix sample(long n, std::uint64_t seed) const = 0;

  // 1-D kink/jump locations, used as quadrature breakpoints.
  virtual std::vector<double> breakpoints_1d() const { return {}; }

 protected:
  Density(int d, double support_radius, bool log_concave)
      : dim_(d), support_radius_(support_radius), log_concave_(log_concave) {}

  int dim_;
  double support_radius_;
  bool log_concave_;
};

using DensityPtr = std::shared_ptr<const Density>;

// Standard isotropic Gaussian.
class GaussianDensity final : public Density {
 public:
  explicit GaussianDensity(int d);
  double log_eval(const Vector& x) const override;
  Matrix sample(long n, std::uint64_t seed) const override;
};

class UniformBallDensity final : public Density {
 public:
  explicit UniformBallDensity(int d, double radius = 1.0);
  double log_eval(const Vector& x) const override;
  Matrix sample(long n, std::uint64_t seed) const override;
  double radius() const { return radius_; }

 private:
  double radius_;
  double log_density_;
};

// Uniform over a vertex-represented convex body (d <= 3); samples by
// rejection from the circumscribed ball around the body centroid.
class UniformBodyDensity final : public Density {
 public:
  explicit UniformBodyDensity(ConvexBody body);
  double log_eval(const Vector& x) const override;
  Matrix sample(long n, std::uint64_t seed) const override;
  const ConvexBody& body() const { return body_; }
  std::vector<double> breakpoints_1d() const override;

 private:
  ConvexBody body_;
  Vector center_;
  double ball_radius_;
  double log_density_;
};

DensityPtr make_uniform_interval(double a, double b);

// Uniform over P_{d,N} plus the alpha-selected caps; equivalently B_d minus
// the deselected caps.
class CapFamilyDensity final : public Density {
 public:
  CapFamilyDensity(CapPacking packing, std::vector<int> alpha,
                   std::uint64_t seed = 0);
  double log_eval(const Vector& x) const override;
  Matrix sample(long n, std::uint64_t seed) const override;
  std::vector<double> breakpoints_1d() const override;

  const CapPacking& packing() const { return packing_; }
  const std::vector<int>& alpha() const { return alpha_; }
  double normalizer() const { return support_volume_; }  // (1 - C_alpha) vol(B_d)
  double c_alpha() const { return c_alpha_; }

 private:
  bool in_support(const Vector& x) const;

  CapPacking packing_;
  std::vector<int> alpha_;
  double support_volume_;
  double c_alpha_;
  double log_density_;
};

CapFamilyDensity make_cap_family(CapPacking packing, std::vector<int> alpha,
                                 std::uint64_t seed = 0);

// Gaussian perturbed by quadratic bumps g(x) = (delta - |x-c|)^2 / 4 at one
// center of each antipodal pair, the side picked by the alpha bits.
class BumpFamilyDensity final : public Density {
 public:
  BumpFamilyDensity(int d, double delta, std::vector<Vector> centers,
                    std::vector<int> alpha, bool validate_spacing = true,
                    long mc_budget = 400000, std::uint64_t seed = 0);
  double log_eval(const Vector& x) const override;
  Matrix sample(long n, std::uint64_t seed) const override;
  std::vector<double> breakpoints_1d() const override;

  double delta() const { return delta_; }
  const std::vector<Vector>& centers() const { return centers_; }
  const std::vector<int>& alpha() const { return alpha_; }
  double normalizer() const { return normalizer_; }  // C_{d,delta}
  bool spacing_valid() const { return spacing_valid_; }
  Vector active_center(int i) const;

 private:
  double sum_bumps(const Vector& x) const;

  double delta_;
  std::vector<Vector> centers_;  // positive representatives
  std::vector<int> alpha_;
  double normalizer_;
  bool spacing_valid_;
};

// Places centers via antipodal_ball_packing and normalizes by quadrature
// (d <= 2) or Monte-Carlo (d >= 3).
BumpFamilyDensity make_bump_family(int d, double delta, int k_requested,
                                   std::vector<int> alpha, std::uint64_t seed,
                                   double validity_c = 1.0);

// Affine image y = A x + b of a base density.
class AffineTransformedDensity final : public Density {
 public:
  AffineTransformedDensity(DensityPtr base, Matrix a, Vector b);
  double log_eval(const Vector& x) const override;
  Matrix sample(long n, std::uint64_t seed) const override;

 private:
  DensityPtr base_;
  Matrix a_, a_inv_;
  Vector b_;
  double log_det_;
};

// ---------------------------------------------------------------------------
// Noise model for the regression experiments.

enum class NoiseKind { gaussian, laplace, student_t };

struct NoiseSpec {
  NoiseKind kind = NoiseKind::gaussian;
  double scale = 1.0;
  double nu = 5.0;           // student_t only
  double moment_order = 2.5; // the 2+eps moment that is bounded
  double moment_bound = 0.0; // L; defaulted by make_noise

  double sample(Rng& rng) const;
  double tail_prob(double t) const;          // P(|xi| > t)
  double tail_integral() const;              // C_xi = int_0^inf sqrt(P(|xi|>t)) dt
  double abs_moment(double order) const;     // E |xi|^order (numeric)
};

NoiseSpec make_noise(NoiseKind kind, double scale);

// ---------------------------------------------------------------------------
// Exponential tail envelope f(x) <= exp(-c_a |x| + c_b).

struct TailEnvelope {
  double c_a = 0.0;
  double c_b = 0.0;

  // M_r(f) = sup_{|x| >= r} f(x) * d * vol(B_d), bounded via the envelope.
  double m_r(double r, int d) const;
};

TailEnvelope envelope_for(const Density& density);
// Checks domination at n random points drawn from the density.
bool envelope_dominates(const TailEnvelope& env, const Density& density,
                        long n_points, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Statistical distances.

enum class DistanceMethod { quadrature, mc };

struct DistanceResult {
  double value = 0.0;
  double std_err = 0.0;  // MC standard error, or quadrature error estimate
  bool converged = true; // false when the budget ran out first
};

DistanceResult hellinger_sq(const Density& p, const Density& q,
                            DistanceMethod method = DistanceMethod::quadrature,
                            long budget = 1'000'000, std::uint64_t seed = 0);
DistanceResult total_variation(const Density& p, const Density& q,
                               DistanceMethod method = DistanceMethod::quadrature,
                               long budget = 1'000'000, std::uint64_t seed = 0);

// ---------------------------------------------------------------------------
// Log-concavity verification along random segments.

struct LogConcavityReport {
  double max_violation = 0.0;  // largest positive discretized 2nd difference
  bool support_nonconvex = false;
  int lines_checked = 0;
};

LogConcavityReport verify_log_concave(const Density& density, int n_lines,
                                      int n_points, std::uint64_t seed);

// Monte-Carlo integral of `eval` over the support ball (test oracle for the
// normalization invariant). Returns (estimate, standard error).
std::pair<double, double> mc_density_integral(const Density& density, long budget,
                                              std::uint64_t seed);

}  // namespace shapelab
