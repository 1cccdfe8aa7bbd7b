#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "shapelab/common.hpp"
#include "shapelab/errors.hpp"

namespace shapelab {

// vol(B_d(r)) = pi^{d/2} r^d / Gamma(d/2+1), computed through log-gamma.
double ball_volume(int d, double r = 1.0);

// Surface measure vol(boundary of B_d) = d * vol(B_d).
double sphere_area(int d);

enum class CapVolumeMethod { exact, asymptotic };

// Volume of the spherical cap {x in B_d : x0.x >= t}, t in (0,1).
// Exact mode integrates the (d-1)-ball cross sections; asymptotic mode uses
// the thin-cap formula vol(B_{d-1}) (1-t^2)^{(d+1)/2} / (t (d-1)).
double cap_volume(int d, double t, CapVolumeMethod method = CapVolumeMethod::exact);

// Cap of the unit ball: {x in B_d : center.x >= t}.
struct Cap {
  Vector center;
  double t;

  Cap(Vector c, double t_in);
  bool contains(const Vector& x) const;
};

// Vertex-represented convex polytope, d <= 3. Vertices are exact extreme
// points. 2-D vertices are stored in counter-clockwise order.
class ConvexBody {
 public:
  int dim() const { return dim_; }
  const std::vector<Vector>& vertices() const { return verts_; }
  double volume() const { return volume_; }
  bool contains(const Vector& x, double tol = 1e-12) const;

 private:
  friend ConvexBody convex_hull(const std::vector<Vector>& pts);
  int dim_ = 0;
  std::vector<Vector> verts_;
  std::vector<std::array<int, 3>> facets_;  // 3-D only, outward-oriented
  std::vector<Vector> normals_;             // 3-D facet unit normals
  std::vector<double> offsets_;             // normal.x <= offset on the body
  Vector interior_;                         // centroid, used for 2-D queries
  double volume_ = 0.0;
};

// Exact hull for d in {1,2,3}. Throws FlatHullError (with the affine rank)
// on affinely degenerate input and InvalidDimensionError for d > 3.
ConvexBody convex_hull(const std::vector<Vector>& pts);

// Affine rank of a point set (dimension of its affine span).
int affine_rank(const std::vector<Vector>& pts, double tol = 1e-9);

// Membership of q in conv(rows of pts) for any d, via Frank-Wolfe iterations
// on the squared distance with a separating-hyperplane certificate for the
// outside case. Used where exact hulls are unavailable (d >= 4). Resolution
// is limited to about diam^2 / max_iter near the boundary; unresolved
// boundary queries count as inside.
bool hull_contains(const Matrix& pts, const Vector& q, double tol = 1e-7,
                   int max_iter = 2000);

// ---------------------------------------------------------------------------
// Greedy disjointification (the thinning pass behind the cap packings).

// A family of equal-volume sets with volume oracles. residual(i, others) is
// vol(S_i \ union of S_j, j in others); implementations may be exact or MC.
struct SetVolumeOracle {
  virtual ~SetVolumeOracle() = default;
  virtual int count() const = 0;
  virtual double volume(int i) const = 0;
  virtual double residual(int i, const std::vector<int>& others) const = 0;
  virtual double union_volume() const = 0;
};

struct GreedyOutcome {
  std::vector<int> kept;
  double v = 0.0;          // common per-set volume
  double c = 0.0;          // union fraction: vol(union) / (N v)
  double threshold = 0.0;  // v c / 2, the drop criterion
};

// Single pass in index order over the current list: drop set i when its
// volume outside the union of the other current members falls below v c / 2.
// Postconditions: |kept| >= N c / 2 and every kept residual >= v c / 2.
GreedyOutcome greedy_disjointify(const SetVolumeOracle& sys,
                                 std::optional<double> c_override = std::nullopt);

struct Interval {
  double lo, hi;
};

// Exact 1-D set system over intervals (the greedy-pass oracle for tests).
class IntervalSystem final : public SetVolumeOracle {
 public:
  explicit IntervalSystem(std::vector<Interval> iv);
  int count() const override { return static_cast<int>(iv_.size()); }
  double volume(int i) const override;
  double residual(int i, const std::vector<int>& others) const override;
  double union_volume() const override;

 private:
  std::vector<Interval> iv_;
};

// Monte-Carlo cap system: per-set samples are derived deterministically from
// (seed, set index), so repeated residual queries are consistent.
class CapMcSystem final : public SetVolumeOracle {
 public:
  CapMcSystem(int d, std::vector<Vector> centers, double t, std::uint64_t seed,
              long budget = 100000);
  int count() const override { return static_cast<int>(centers_.size()); }
  double volume(int) const override { return cap_vol_; }
  double residual(int i, const std::vector<int>& others) const override;
  double union_volume() const override;

  // Uniform sample inside cap i (used by tests as an oracle as well).
  Matrix cap_samples(int i, long m) const;

 private:
  int d_;
  std::vector<Vector> centers_;
  double t_;
  std::uint64_t seed_;
  long budget_;
  double cap_vol_;
  std::vector<std::vector<int>> neighbors_;  // caps that can intersect
};

// Exact d=2 analogue via the angular reduction: at angle theta a cap covers
// the radial interval [t / cos(theta - theta_j), 1].
class Cap2dExactSystem final : public SetVolumeOracle {
 public:
  Cap2dExactSystem(std::vector<Vector> centers, double t);
  int count() const override { return static_cast<int>(angles_.size()); }
  double volume(int) const override { return cap_vol_; }
  double residual(int i, const std::vector<int>& others) const override;
  double union_volume() const override;

 private:
  std::vector<double> angles_;
  double t_, w_;  // w = acos(t), angular half-width
  double cap_vol_;
};

// Exact area of the union of caps {i in subset} of the unit disk.
double cap_union_area_2d(const std::vector<Vector>& centers, double t,
                         const std::vector<int>& subset);

// ---------------------------------------------------------------------------
// Packings.

struct CapPacking {
  int dim = 0;
  int n_requested = 0;
  double t = 0.0;
  std::vector<Vector> centers;  // kept caps
  double per_cap_volume = 0.0;
  double c3 = 0.0;  // union fraction reported by the greedy step

  int kept_count() const { return static_cast<int>(centers.size()); }
};

// Draws n uniform sphere points, sets t = t_{d,n} from the surface/cross-
// section ratio, and thins overlapping caps greedily. d >= 2.
CapPacking cap_packing(int d, int n, std::uint64_t seed, long mc_budget = 100000);

struct AntipodalPacking {
  int dim = 0;
  double delta = 0.0;
  std::vector<Vector> centers;  // positive representatives x_i; -x_i implied

  std::vector<Vector> all_centers() const;
};

// Disjoint radius-delta balls inside B_d(sqrt(2d)), placed on one side
// (first coordinate >= delta) and mirrored. d=1 uses an exact lattice.
// max_pairs = 0 means "as many as the greedy pass finds".
AntipodalPacking antipodal_ball_packing(int d, double delta, std::uint64_t seed,
                                        int max_pairs = 0,
                                        double validity_c = 1.0);

}  // namespace shapelab
