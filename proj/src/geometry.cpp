#include "shapelab/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <utility>

#include <Eigen/Dense>

#include "shapelab/quadrature.hpp"
#include "shapelab/rng.hpp"

namespace shapelab {

double ball_volume(int d, double r) {
  if (d < 1) throw InvalidDimensionError("ball_volume: dimension must be >= 1");
  if (r < 0) throw DomainError("ball_volume: negative radius");
  if (r == 0) return 0.0;
  double logv = 0.5 * d * std::log(M_PI) + d * std::log(r) - std::lgamma(0.5 * d + 1.0);
  return std::exp(logv);
}

double sphere_area(int d) { return d * ball_volume(d, 1.0); }

double cap_volume(int d, double t, CapVolumeMethod method) {
  if (d < 1) throw InvalidDimensionError("cap_volume: dimension must be >= 1");
  if (!(t > 0.0 && t < 1.0)) throw DomainError("cap_volume: t must lie in (0,1)");
  double cross = (d >= 2) ? ball_volume(d - 1, 1.0) : 1.0;
  if (method == CapVolumeMethod::asymptotic) {
    if (d < 2) throw DomainError("cap_volume: asymptotic form needs d >= 2");
    return cross * std::pow(1.0 - t * t, 0.5 * (d + 1)) / (t * (d - 1));
  }
  double expo = 0.5 * (d - 1);
  auto f = [&](double s) { return std::pow(std::max(0.0, 1.0 - s * s), expo); };
  QuadResult q = integrate(f, t, 1.0, 1e-13, 400000);
  return cross * q.value;
}

Cap::Cap(Vector c, double t_in) : center(std::move(c)), t(t_in) {
  if (std::fabs(center.norm() - 1.0) > 1e-12)
    throw DomainError("Cap: center must be a unit vector");
  if (!(t > 0.0 && t < 1.0)) throw DomainError("Cap: t must lie in (0,1)");
}

bool Cap::contains(const Vector& x) const {
  return x.squaredNorm() <= 1.0 + 1e-12 && center.dot(x) >= t;
}

// ---------------------------------------------------------------------------
// Hulls.

int affine_rank(const std::vector<Vector>& pts, double tol) {
  if (pts.empty()) return -1;
  int d = static_cast<int>(pts[0].size());
  int n = static_cast<int>(pts.size());
  if (n == 1) return 0;
  Matrix M(n - 1, d);
  for (int i = 1; i < n; ++i) M.row(i - 1) = (pts[i] - pts[0]).transpose();
  Eigen::JacobiSVD<Matrix> svd(M);
  const auto& sv = svd.singularValues();
  if (sv.size() == 0) return 0;
  double cutoff = tol * std::max(1.0, sv[0]);
  int r = 0;
  for (int i = 0; i < sv.size(); ++i)
    if (sv[i] > cutoff) ++r;
  return r;
}

namespace {

double cross2(const Vector& o, const Vector& a, const Vector& b) {
  return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
}

// Strict monotone chain: collinear points are dropped, so every returned
// vertex is an extreme point. Output is counter-clockwise.
std::vector<Vector> hull_2d(std::vector<Vector> pts) {
  std::sort(pts.begin(), pts.end(), [](const Vector& a, const Vector& b) {
    return a[0] < b[0] || (a[0] == b[0] && a[1] < b[1]);
  });
  pts.erase(std::unique(pts.begin(), pts.end(),
                        [](const Vector& a, const Vector& b) {
                          return a[0] == b[0] && a[1] == b[1];
                        }),
            pts.end());
  int n = static_cast<int>(pts.size());
  std::vector<Vector> h(2 * n);
  int k = 0;
  for (int i = 0; i < n; ++i) {
    while (k >= 2 && cross2(h[k - 2], h[k - 1], pts[i]) <= 0) --k;
    h[k++] = pts[i];
  }
  int lower = k + 1;
  for (int i = n - 2; i >= 0; --i) {
    while (k >= lower && cross2(h[k - 2], h[k - 1], pts[i]) <= 0) --k;
    h[k++] = pts[i];
  }
  h.resize(k - 1);
  return h;
}

struct Facet {
  std::array<int, 3> v;
  Vector normal;  // not normalized during construction
  double offset;
  bool alive = true;
};

double tetra_signed_vol(const Vector& a, const Vector& b, const Vector& c,
                        const Vector& d) {
  Eigen::Vector3d u = (b - a).head<3>(), v = (c - a).head<3>(), w = (d - a).head<3>();
  return u.cross(v).dot(w) / 6.0;
}

}  // namespace

ConvexBody convex_hull(const std::vector<Vector>& pts) {
  if (pts.empty()) throw FlatHullError("convex_hull: empty input", -1);
  int d = static_cast<int>(pts[0].size());
  if (d < 1 || d > 3)
    throw InvalidDimensionError("convex_hull: exact hulls support d <= 3 only");
  int rank = affine_rank(pts);
  if (rank < d)
    throw FlatHullError("convex_hull: affinely degenerate input (rank " +
                            std::to_string(rank) + ")",
                        rank);

  ConvexBody body;
  body.dim_ = d;

  if (d == 1) {
    double lo = pts[0][0], hi = pts[0][0];
    for (const auto& p : pts) {
      lo = std::min(lo, p[0]);
      hi = std::max(hi, p[0]);
    }
    Vector a(1), b(1);
    a[0] = lo;
    b[0] = hi;
    body.verts_ = {a, b};
    body.volume_ = hi - lo;
    body.interior_ = 0.5 * (a + b);
    return body;
  }

  if (d == 2) {
    body.verts_ = hull_2d(pts);
    int m = static_cast<int>(body.verts_.size());
    double area = 0.0;
    Vector c = Vector::Zero(2);
    for (int i = 0; i < m; ++i) {
      const Vector& a = body.verts_[i];
      const Vector& b = body.verts_[(i + 1) % m];
      area += a[0] * b[1] - b[0] * a[1];
      c += a;
    }
    body.volume_ = 0.5 * area;  // CCW -> positive
    body.interior_ = c / m;
    return body;
  }

  // d == 3: incremental hull with horizon re-triangulation.
  std::vector<Vector> P = pts;
  double scale = 0.0;
  for (const auto& p : P) scale = std::max(scale, p.lpNorm<Eigen::Infinity>());
  double eps = 1e-12 * (1.0 + scale);

  // Seed tetrahedron from extreme points (lexicographic minimum is always a
  // hull vertex, the rest maximize distance to the growing affine span).
  int i0 = 0;
  for (int i = 1; i < (int)P.size(); ++i)
    if (std::lexicographical_compare(P[i].data(), P[i].data() + 3, P[i0].data(),
                                     P[i0].data() + 3))
      i0 = i;
  int i1 = -1;
  double best = -1;
  for (int i = 0; i < (int)P.size(); ++i) {
    double v = (P[i] - P[i0]).squaredNorm();
    if (v > best) {
      best = v;
      i1 = i;
    }
  }
  Vector e0 = P[i1] - P[i0];
  int i2 = -1;
  best = -1;
  for (int i = 0; i < (int)P.size(); ++i) {
    Eigen::Vector3d c = e0.head<3>().cross((P[i] - P[i0]).head<3>());
    double v = c.squaredNorm();
    if (v > best) {
      best = v;
      i2 = i;
    }
  }
  Eigen::Vector3d nrm = e0.head<3>().cross((P[i2] - P[i0]).head<3>());
  int i3 = -1;
  best = -1;
  for (int i = 0; i < (int)P.size(); ++i) {
    double v = std::fabs(nrm.dot((P[i] - P[i0]).head<3>()));
    if (v > best) {
      best = v;
      i3 = i;
    }
  }

  std::vector<Facet> facets;
  auto make_facet = [&](int a, int b, int c, int opposite) {
    Facet f;
    f.v = {a, b, c};
    Eigen::Vector3d n = (P[b] - P[a]).head<3>().cross((P[c] - P[a]).head<3>());
    if (n.dot((P[opposite] - P[a]).head<3>()) > 0) {
      std::swap(f.v[1], f.v[2]);
      n = -n;
    }
    f.normal = Vector(3);
    f.normal << n[0], n[1], n[2];
    f.offset = f.normal.dot(P[f.v[0]]);
    return f;
  };
  facets.push_back(make_facet(i0, i1, i2, i3));
  facets.push_back(make_facet(i0, i1, i3, i2));
  facets.push_back(make_facet(i0, i2, i3, i1));
  facets.push_back(make_facet(i1, i2, i3, i0));

  std::vector<int> visible;
  for (int p = 0; p < (int)P.size(); ++p) {
    if (p == i0 || p == i1 || p == i2 || p == i3) continue;
    visible.clear();
    for (int f = 0; f < (int)facets.size(); ++f) {
      if (!facets[f].alive) continue;
      double norm_f = facets[f].normal.norm();
      if (facets[f].normal.dot(P[p]) - facets[f].offset > eps * std::max(1.0, norm_f))
        visible.push_back(f);
    }
    if (visible.empty()) continue;  // interior or on the surface

    // Horizon: oriented edges of visible facets whose reverse edge is not
    // itself part of a visible facet.
    std::set<std::pair<int, int>> vis_edges;
    for (int f : visible) {
      const auto& v = facets[f].v;
      vis_edges.emplace(v[0], v[1]);
      vis_edges.emplace(v[1], v[2]);
      vis_edges.emplace(v[2], v[0]);
    }
    std::vector<std::pair<int, int>> horizon;
    for (const auto& e : vis_edges)
      if (!vis_edges.count({e.second, e.first})) horizon.push_back(e);
    for (int f : visible) facets[f].alive = false;
    for (const auto& e : horizon) {
      Facet f;
      f.v = {e.first, e.second, p};
      Eigen::Vector3d n =
          (P[e.second] - P[e.first]).head<3>().cross((P[p] - P[e.first]).head<3>());
      f.normal = Vector(3);
      f.normal << n[0], n[1], n[2];
      f.offset = f.normal.dot(P[e.first]);
      facets.push_back(f);
    }
  }

  // Compact to live facets / referenced vertices.
  std::map<int, int> remap;
  for (const auto& f : facets) {
    if (!f.alive) continue;
    for (int v : f.v)
      if (!remap.count(v)) {
        int id = static_cast<int>(remap.size());
        remap[v] = id;
      }
  }
  body.verts_.resize(remap.size());
  for (const auto& [orig, id] : remap) body.verts_[id] = P[orig];
  Vector centroid = Vector::Zero(3);
  for (const auto& v : body.verts_) centroid += v;
  centroid /= static_cast<double>(body.verts_.size());
  body.interior_ = centroid;

  double vol = 0.0;
  for (const auto& f : facets) {
    if (!f.alive) continue;
    std::array<int, 3> t = {remap[f.v[0]], remap[f.v[1]], remap[f.v[2]]};
    double sv = tetra_signed_vol(centroid, body.verts_[t[0]], body.verts_[t[1]],
                                 body.verts_[t[2]]);
    if (sv < 0) {
      std::swap(t[1], t[2]);
      sv = -sv;
    }
    vol += sv;
    Eigen::Vector3d n = (body.verts_[t[1]] - body.verts_[t[0]])
                            .head<3>()
                            .cross((body.verts_[t[2]] - body.verts_[t[0]]).head<3>());
    Vector nn(3);
    nn << n[0], n[1], n[2];
    double nl = nn.norm();
    if (nl > 0) nn /= nl;
    body.facets_.push_back(t);
    body.normals_.push_back(nn);
    body.offsets_.push_back(nn.dot(body.verts_[t[0]]));
  }
  body.volume_ = vol;
  return body;
}

bool ConvexBody::contains(const Vector& x, double tol) const {
  if (dim_ == 1) return x[0] >= verts_[0][0] - tol && x[0] <= verts_[1][0] + tol;
  if (dim_ == 2) {
    int m = static_cast<int>(verts_.size());
    if (m < 3) return false;
    const Vector& v0 = verts_[0];
    // Binary search for the fan wedge around v0, then one edge test.
    if (cross2(v0, verts_[1], x) < -tol) return false;
    if (cross2(v0, verts_[m - 1], x) > tol) return false;
    int lo = 1, hi = m - 1;
    while (hi - lo > 1) {
      int mid = (lo + hi) / 2;
      if (cross2(v0, verts_[mid], x) >= 0)
        lo = mid;
      else
        hi = mid;
    }
    return cross2(verts_[lo], verts_[hi], x) >= -tol;
  }
  for (std::size_t f = 0; f < facets_.size(); ++f)
    if (normals_[f].dot(x) > offsets_[f] + tol) return false;
  return true;
}

bool hull_contains(const Matrix& pts, const Vector& q, double tol, int max_iter) {
  const int n = static_cast<int>(pts.rows());
  if (n == 0) return false;
  int best = 0;
  double bd = (pts.row(0).transpose() - q).squaredNorm();
  for (int i = 1; i < n; ++i) {
    double v = (pts.row(i).transpose() - q).squaredNorm();
    if (v < bd) {
      bd = v;
      best = i;
    }
  }
  Vector z = pts.row(best).transpose();
  double scale = 1.0 + q.norm();
  for (int it = 0; it < max_iter; ++it) {
    Vector g = q - z;
    if (g.squaredNorm() <= tol * tol) return true;
    int idx = 0;
    double mv = pts.row(0) * g;
    for (int i = 1; i < n; ++i) {
      double v = pts.row(i) * g;
      if (v > mv) {
        mv = v;
        idx = i;
      }
    }
    if (mv < g.dot(q) - 1e-12 * scale) return false;  // separating hyperplane
    Vector s = pts.row(idx).transpose();
    Vector dir = s - z;
    double gd = g.dot(dir);
    if (gd <= 1e-15) return false;  // z is the projection, still far from q
    double step = std::min(1.0, gd / dir.squaredNorm());
    z += step * dir;
  }
  return true;  // unresolved boundary case counted as inside
}

// ---------------------------------------------------------------------------
// Greedy disjointification.

GreedyOutcome greedy_disjointify(const SetVolumeOracle& sys,
                                 std::optional<double> c_override) {
  const int n = sys.count();
  if (n == 0) throw OracleError("greedy_disjointify: empty system");
  GreedyOutcome out;
  out.v = sys.volume(0);
  for (int i = 1; i < n; ++i) {
    double vi = sys.volume(i);
    if (std::fabs(vi - out.v) > 1e-9 * std::max(out.v, 1e-300))
      throw OracleError("greedy_disjointify: set volumes are not all equal");
  }
  out.c = c_override ? *c_override : sys.union_volume() / (n * out.v);
  out.threshold = 0.5 * out.v * out.c;

  std::vector<int> current(n);
  for (int i = 0; i < n; ++i) current[i] = i;
  std::vector<char> dropped(n, 0);
  std::vector<int> others;
  others.reserve(n);
  for (int i = 0; i < n; ++i) {
    others.clear();
    for (int j : current)
      if (j != i && !dropped[j]) others.push_back(j);
    double r = sys.residual(i, others);
    if (r < -1e-7 * std::max(out.v, 1e-300))
      throw OracleError("greedy_disjointify: oracle reported negative residual");
    if (r < out.threshold) dropped[i] = 1;
  }
  for (int i = 0; i < n; ++i)
    if (!dropped[i]) out.kept.push_back(i);
  return out;
}

IntervalSystem::IntervalSystem(std::vector<Interval> iv) : iv_(std::move(iv)) {
  for (const auto& v : iv_)
    if (!(v.hi >= v.lo)) throw OracleError("IntervalSystem: inverted interval");
}

double IntervalSystem::volume(int i) const { return iv_[i].hi - iv_[i].lo; }

namespace {

double merged_length(std::vector<Interval>& parts) {
  if (parts.empty()) return 0.0;
  std::sort(parts.begin(), parts.end(),
            [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
  double total = 0.0, lo = parts[0].lo, hi = parts[0].hi;
  for (std::size_t k = 1; k < parts.size(); ++k) {
    if (parts[k].lo > hi) {
      total += hi - lo;
      lo = parts[k].lo;
      hi = parts[k].hi;
    } else {
      hi = std::max(hi, parts[k].hi);
    }
  }
  total += hi - lo;
  return total;
}

}  // namespace

double IntervalSystem::residual(int i, const std::vector<int>& others) const {
  const Interval& me = iv_[i];
  std::vector<Interval> clipped;
  for (int j : others) {
    double lo = std::max(me.lo, iv_[j].lo), hi = std::min(me.hi, iv_[j].hi);
    if (hi > lo) clipped.push_back({lo, hi});
  }
  return (me.hi - me.lo) - merged_length(clipped);
}

double IntervalSystem::union_volume() const {
  std::vector<Interval> all = iv_;
  return merged_length(all);
}

// ---------------------------------------------------------------------------
// Cap systems.

namespace {

// Householder map taking e1 to `c` (both unit). Applied to (s, y) it yields a
// point with norm preserved and inner product s against c.
Vector cap_point_from_frame(const Vector& c, double s, const Vector& y) {
  int d = static_cast<int>(c.size());
  Vector p(d);
  p[0] = s;
  for (int i = 1; i < d; ++i) p[i] = y[i - 1];
  Vector v = -c;
  v[0] += 1.0;  // e1 - c
  double vv = v.squaredNorm();
  if (vv < 1e-24) return p;
  return p - (2.0 * v.dot(p) / vv) * v;
}

}  // namespace

CapMcSystem::CapMcSystem(int d, std::vector<Vector> centers, double t,
                         std::uint64_t seed, long budget)
    : d_(d), centers_(std::move(centers)), t_(t), seed_(seed), budget_(budget) {
  cap_vol_ = cap_volume(d_, t_, CapVolumeMethod::exact);
  double cos2w = 2 * t_ * t_ - 1;  // caps intersect iff angle < 2 acos(t)
  neighbors_.resize(centers_.size());
  for (std::size_t i = 0; i < centers_.size(); ++i)
    for (std::size_t j = 0; j < centers_.size(); ++j)
      if (j != i && centers_[i].dot(centers_[j]) > cos2w)
        neighbors_[i].push_back(static_cast<int>(j));
}

Matrix CapMcSystem::cap_samples(int i, long m) const {
  Rng rng(derive_stream(seed_, 0x5afe, static_cast<std::uint64_t>(i)));
  Matrix out(m, d_);
  double expo = 0.5 * (d_ - 1);
  double peak = std::pow(1.0 - t_ * t_, expo);
  for (long k = 0; k < m; ++k) {
    double s;
    for (;;) {
      s = rng.uniform(t_, 1.0);
      double acc = (d_ == 1) ? 1.0 : std::pow(1.0 - s * s, expo) / peak;
      if (rng.uniform() < acc) break;
    }
    if (d_ == 1) {
      out(k, 0) = s * centers_[i][0];
    } else {
      double rad = std::sqrt(std::max(0.0, 1.0 - s * s)) *
                   std::pow(rng.uniform(), 1.0 / (d_ - 1));
      Vector y = (d_ == 2) ? Vector::Constant(1, rng.uniform() < 0.5 ? -rad : rad)
                           : Vector(rad * rng.unit_vec(d_ - 1));
      out.row(k) = cap_point_from_frame(centers_[i], s, y).transpose();
    }
  }
  return out;
}

double CapMcSystem::residual(int i, const std::vector<int>& others) const {
  std::vector<int> active;
  for (int j : others)
    for (int nb : neighbors_[i])
      if (nb == j) {
        active.push_back(j);
        break;
      }
  if (active.empty()) return cap_vol_;
  Matrix pts = cap_samples(i, budget_);
  long outside = 0;
  for (long k = 0; k < budget_; ++k) {
    bool covered = false;
    for (int j : active) {
      if (centers_[j].dot(pts.row(k).transpose()) >= t_) {
        covered = true;
        break;
      }
    }
    if (!covered) ++outside;
  }
  return cap_vol_ * static_cast<double>(outside) / static_cast<double>(budget_);
}

double CapMcSystem::union_volume() const {
  // vol(union) = sum_i vol(S_i \ union_{j<i} S_j), each term by MC.
  double total = 0.0;
  std::vector<int> prior;
  for (int i = 0; i < count(); ++i) {
    total += residual(i, prior);
    prior.push_back(i);
  }
  return total;
}

Cap2dExactSystem::Cap2dExactSystem(std::vector<Vector> centers, double t) : t_(t) {
  w_ = std::acos(t);
  for (const auto& c : centers) angles_.push_back(std::atan2(c[1], c[0]));
  cap_vol_ = std::acos(t) - t * std::sqrt(1.0 - t * t);
}

namespace {

double ang_diff(double a, double b) {
  double d = std::remainder(a - b, 2.0 * M_PI);
  return d;
}

}  // namespace

double Cap2dExactSystem::residual(int i, const std::vector<int>& others) const {
  double ti = angles_[i];
  auto integrand = [&](double th) {
    double di = std::fabs(ang_diff(th, ti));
    if (di >= w_) return 0.0;
    double ai = t_ / std::cos(di);
    double m = 1.0;
    for (int j : others) {
      double dj = std::fabs(ang_diff(th, angles_[j]));
      if (dj < w_) m = std::min(m, t_ / std::cos(dj));
    }
    double val = m * m - ai * ai;
    return val > 0 ? 0.5 * val : 0.0;
  };
  std::vector<double> cuts;
  for (int j : others) {
    double rel = ang_diff(angles_[j], ti);
    cuts.push_back(rel - w_);
    cuts.push_back(rel + w_);
  }
  // Integrate in the frame centred at ti.
  auto f = [&](double u) { return integrand(ti + u); };
  return integrate(f, -w_, w_, 1e-12, 600000, cuts).value;
}

double Cap2dExactSystem::union_volume() const {
  std::vector<Vector> cs;
  for (double a : angles_) {
    Vector v(2);
    v << std::cos(a), std::sin(a);
    cs.push_back(v);
  }
  std::vector<int> all(angles_.size());
  for (std::size_t i = 0; i < angles_.size(); ++i) all[i] = static_cast<int>(i);
  return cap_union_area_2d(cs, t_, all);
}

double cap_union_area_2d(const std::vector<Vector>& centers, double t,
                         const std::vector<int>& subset) {
  if (subset.empty()) return 0.0;
  double w = std::acos(t);
  std::vector<double> ang;
  for (int j : subset) ang.push_back(std::atan2(centers[j][1], centers[j][0]));
  auto f = [&](double th) {
    double m = std::numeric_limits<double>::infinity();
    for (double a : ang) {
      double dj = std::fabs(ang_diff(th, a));
      if (dj < w) m = std::min(m, t / std::cos(dj));
    }
    if (!(m < 1.0)) return 0.0;
    return 0.5 * (1.0 - m * m);
  };
  std::vector<double> cuts;
  for (double a : ang) {
    for (double e : {a - w, a + w}) {
      double r = std::remainder(e, 2.0 * M_PI);
      if (r < 0) r += 2.0 * M_PI;
      cuts.push_back(r);
    }
  }
  return integrate(f, 0.0, 2.0 * M_PI, 1e-12, 2000000, cuts).value;
}

// ---------------------------------------------------------------------------
// Packings.

CapPacking cap_packing(int d, int n, std::uint64_t seed, long mc_budget) {
  if (d < 2) throw InvalidDimensionError("cap_packing: requires d >= 2");
  if (n < 2) throw DomainError("cap_packing: requires n >= 2");
  double ratio = sphere_area(d) / (n * ball_volume(d - 1, 1.0));
  double inner = std::pow(ratio, 2.0 / (d - 1));
  if (inner >= 1.0)
    throw InfeasiblePackingError(
        "cap_packing: n too small for a valid cap height at this dimension");
  double t = std::sqrt(1.0 - inner);

  Rng rng(derive_stream(seed, 0xCA9));
  std::vector<Vector> centers;
  centers.reserve(n);
  for (int i = 0; i < n; ++i) centers.push_back(rng.unit_vec(d));

  GreedyOutcome out;
  if (d == 2) {
    Cap2dExactSystem sys(centers, t);
    out = greedy_disjointify(sys);
  } else {
    CapMcSystem sys(d, centers, t, derive_stream(seed, 0xCA9, 1), mc_budget);
    out = greedy_disjointify(sys);
  }
  if (out.kept.empty())
    throw InfeasiblePackingError("cap_packing: greedy pass kept no caps");

  CapPacking pack;
  pack.dim = d;
  pack.n_requested = n;
  pack.t = t;
  for (int i : out.kept) pack.centers.push_back(centers[i]);
  pack.per_cap_volume = cap_volume(d, t, CapVolumeMethod::exact);
  pack.c3 = out.c;
  return pack;
}

std::vector<Vector> AntipodalPacking::all_centers() const {
  std::vector<Vector> out = centers;
  for (const auto& c : centers) out.push_back(-c);
  return out;
}

AntipodalPacking antipodal_ball_packing(int d, double delta, std::uint64_t seed,
                                        int max_pairs, double validity_c) {
  if (d < 1) throw InvalidDimensionError("antipodal_ball_packing: d >= 1");
  double bound = std::exp(-validity_c * d);
  if (!(delta > 0.0 && delta < bound))
    throw DomainError("antipodal_ball_packing: delta outside (0, exp(-c d))");
  double R = std::sqrt(2.0 * d);

  AntipodalPacking pack;
  pack.dim = d;
  pack.delta = delta;

  if (d == 1) {
    // Exact lattice on one side: centers 2 delta, 4 delta, ...
    int K = static_cast<int>(std::floor((R - delta) / (2.0 * delta)));
    if (max_pairs > 0) K = std::min(K, max_pairs);
    if (K < 1)
      throw InfeasiblePackingError("antipodal_ball_packing: no ball fits");
    for (int k = 1; k <= K; ++k) {
      Vector c(1);
      c[0] = 2.0 * delta * k;
      pack.centers.push_back(c);
    }
    return pack;
  }

  double rmax = R - delta;
  double capacity = ball_volume(d, rmax) * 0.5 / ball_volume(d, 2.0 * delta);
  int target = max_pairs > 0 ? max_pairs
                             : std::max(1, static_cast<int>(0.7 * capacity));
  long attempts = std::max<long>(4000, 60L * target);
  Rng rng(derive_stream(seed, 0xBA11));
  for (long a = 0; a < attempts && (int)pack.centers.size() < target; ++a) {
    Vector x = rng.ball_point(d, rmax);
    if (x[0] < delta) continue;  // keep the mirror sides disjoint
    bool ok = true;
    for (const auto& c : pack.centers) {
      if ((x - c).norm() < 2.0 * delta) {
        ok = false;
        break;
      }
    }
    if (ok) pack.centers.push_back(x);
  }
  if (pack.centers.empty())
    throw InfeasiblePackingError("antipodal_ball_packing: no ball placed");
  return pack;
}

}  // namespace shapelab
