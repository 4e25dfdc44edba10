#include "qgeom/extrinsic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <queue>

#include "qgeom/invariants.hpp"
#include "qgeom/local_geom.hpp"

namespace qgeom {

AmbientGeometry ambient_geometry(const AmbientChartPoint& p) {
  const auto n = p.z.size();
  if (n < 1) throw Error(ErrorKind::InvalidArgument, "chart point needs at least one coordinate");
  for (Eigen::Index i = 0; i < n; ++i)
    if (!std::isfinite(p.z(i).real()) || !std::isfinite(p.z(i).imag()))
      throw Error(ErrorKind::InvalidArgument, "chart coordinates must be finite");
  const double K = 1.0 + p.z.squaredNorm();
  AmbientGeometry out;
  out.g = CMat::Identity(n, n) / K - p.z.conjugate() * p.z.transpose() / (K * K);
  out.omega = cplx(0.0, -1.0) * out.g;
  return out;
}

StateVector ambient_geodesic(const StateVector& a, const StateVector& b, double t) {
  const cplx ab = overlap(a, b);
  if (std::abs(ab) <= tol().orthogonal)
    throw Error(ErrorKind::AntipodalPair, "geodesic between orthogonal states is not unique");
  const cplx phase = std::polar(1.0, -std::arg(ab));
  return normalize(t * a.amplitudes() + (1.0 - t) * phase * b.amplitudes());
}

namespace {

double segment_length(const StateFamily& family, const RVec& p, const RVec& q) {
  const RVec mid = 0.5 * (p + q);
  const RVec dp = q - p;
  return std::sqrt(std::max(0.0, dp.dot(qgt(family, mid).g * dp)));
}

double polyline_length(const StateFamily& family, const std::vector<RVec>& pts) {
  double L = 0.0;
  for (size_t i = 0; i + 1 < pts.size(); ++i) L += segment_length(family, pts[i], pts[i + 1]);
  return L;
}

std::vector<RVec> resample(const std::vector<RVec>& pts, int m) {
  std::vector<double> cum(pts.size(), 0.0);
  for (size_t i = 1; i < pts.size(); ++i) cum[i] = cum[i - 1] + (pts[i] - pts[i - 1]).norm();
  const double total = cum.back();
  std::vector<RVec> out;
  out.reserve(static_cast<size_t>(m));
  size_t seg = 0;
  for (int j = 0; j < m; ++j) {
    const double s = total * j / (m - 1);
    while (seg + 2 < pts.size() && cum[seg + 1] < s) ++seg;
    const double len = cum[seg + 1] - cum[seg];
    const double w = len > 0 ? std::clamp((s - cum[seg]) / len, 0.0, 1.0) : 0.0;
    out.push_back((1.0 - w) * pts[seg] + w * pts[seg + 1]);
  }
  out.front() = pts.front();
  out.back() = pts.back();
  return out;
}

// Gauss-Seidel sweeps on the discrete energy with frozen midpoint metrics.
void smooth_path(const StateFamily& family, std::vector<RVec>& p, double scale) {
  const size_t m = p.size();
  for (int sweep = 0; sweep < 2000; ++sweep) {
    double moved = 0.0;
    for (size_t i = 1; i + 1 < m; ++i) {
      const RMat G1 = qgt(family, 0.5 * (p[i - 1] + p[i])).g;
      const RMat G2 = qgt(family, 0.5 * (p[i] + p[i + 1])).g;
      const RMat S = G1 + G2;
      Eigen::LDLT<RMat> ldlt(S);
      if (ldlt.info() != Eigen::Success || S.determinant() <= 1e-300) continue;
      const RVec np = ldlt.solve(G1 * p[i - 1] + G2 * p[i + 1]);
      moved = std::max(moved, (np - p[i]).norm());
      p[i] = np;
    }
    if (moved < 1e-11 * scale) break;
  }
}

}  // namespace

double intrinsic_distance(const StateFamily& family, const RVec& x, const RVec& y,
                          const IntrinsicOptions& opt) {
  const int d = family.param_dim();
  if (x.size() != d || y.size() != d) throw Error(ErrorKind::DimensionMismatch, "point dimension mismatch");
  if ((x - y).norm() == 0.0) return 0.0;
  if (opt.resolution < 3) throw Error(ErrorKind::InvalidArgument, "resolution must be at least 3");
  if (d == 1) {
    // Simpson along the segment
    const int n = 2 * opt.resolution;
    double acc = 0.0;
    for (int i = 0; i <= n; ++i) {
      const RVec p = x + (y - x) * (static_cast<double>(i) / n);
      const double w = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
      acc += w * std::sqrt(std::max(0.0, qgt(family, p).g(0, 0)));
    }
    return acc * std::abs(y(0) - x(0)) / (3.0 * n);
  }
  if (d != 2) throw Error(ErrorKind::InvalidArgument, "intrinsic distance supports d = 1 or 2");

  RVec lo(2), hi(2);
  if (opt.lo && opt.hi) {
    lo = *opt.lo;
    hi = *opt.hi;
  } else {
    const RVec span = (x - y).cwiseAbs();
    const double smax = span.maxCoeff();
    for (int a = 0; a < 2; ++a) {
      const double s = std::max(span(a), smax);
      lo(a) = std::min(x(a), y(a)) - opt.pad * s;
      hi(a) = std::max(x(a), y(a)) + opt.pad * s;
    }
  }
  const int N = opt.resolution;
  const int R = 2 * N - 1;
  const RVec hstep = (hi - lo) / (N - 1);
  const auto rpos = [&](int i, int j) {
    RVec p(2);
    p << lo(0) + 0.5 * hstep(0) * i, lo(1) + 0.5 * hstep(1) * j;
    return p;
  };
  std::vector<Eigen::Matrix2d> G(static_cast<size_t>(R) * R);
  std::vector<char> ok(static_cast<size_t>(R) * R, 1);
  for (int i = 0; i < R; ++i)
    for (int j = 0; j < R; ++j) {
      const size_t id = static_cast<size_t>(i) * R + j;
      try {
        G[id] = qgt(family, rpos(i, j)).g;
        if (!G[id].allFinite()) ok[id] = 0;
      } catch (const Error&) {
        ok[id] = 0;
      }
    }

  const auto node_of = [&](const RVec& p) {
    const int i = std::clamp(static_cast<int>(std::lround((p(0) - lo(0)) / hstep(0))), 0, N - 1);
    const int j = std::clamp(static_cast<int>(std::lround((p(1) - lo(1)) / hstep(1))), 0, N - 1);
    return i * N + j;
  };
  const int src = node_of(x), dst = node_of(y);
  std::vector<double> dist(static_cast<size_t>(N) * N, std::numeric_limits<double>::infinity());
  std::vector<int> prev(static_cast<size_t>(N) * N, -1);
  using Item = std::pair<double, int>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
  dist[static_cast<size_t>(src)] = 0.0;
  pq.push({0.0, src});
  const int di[8] = {1, -1, 0, 0, 1, 1, -1, -1};
  const int dj[8] = {0, 0, 1, -1, 1, -1, 1, -1};
  while (!pq.empty()) {
    const auto [du, u] = pq.top();
    pq.pop();
    if (du > dist[static_cast<size_t>(u)]) continue;
    if (u == dst) break;
    const int ui = u / N, uj = u % N;
    for (int e = 0; e < 8; ++e) {
      const int vi = ui + di[e], vj = uj + dj[e];
      if (vi < 0 || vj < 0 || vi >= N || vj >= N) continue;
      const size_t mid = static_cast<size_t>(ui + vi) * R + (uj + vj);
      if (!ok[mid]) continue;
      Eigen::Vector2d dp(di[e] * hstep(0), dj[e] * hstep(1));
      const double w = std::sqrt(std::max(0.0, dp.dot(G[mid] * dp)));
      const int v = vi * N + vj;
      if (du + w < dist[static_cast<size_t>(v)]) {
        dist[static_cast<size_t>(v)] = du + w;
        prev[static_cast<size_t>(v)] = u;
        pq.push({du + w, v});
      }
    }
  }
  if (!std::isfinite(dist[static_cast<size_t>(dst)]))
    throw Error(ErrorKind::DisconnectedRegion, "endpoints are not connected on the sampled grid");

  std::vector<RVec> path;
  for (int v = dst; v != -1; v = prev[static_cast<size_t>(v)]) path.push_back(rpos(2 * (v / N), 2 * (v % N)));
  std::reverse(path.begin(), path.end());
  path.front() = x;
  path.back() = y;
  if (path.size() < 2) path = {x, y};
  double graph_len;
  try {
    graph_len = polyline_length(family, path);
  } catch (const Error&) {
    graph_len = dist[static_cast<size_t>(dst)];
  }

  double best = graph_len;
  try {
    const double scale = (hi - lo).norm();
    std::vector<RVec> p = resample(path, 17);
    for (int m : {17, 33, 65, 129}) {
      if (static_cast<int>(p.size()) != m) p = resample(p, m);
      smooth_path(family, p, scale);
    }
    best = std::min(best, polyline_length(family, p));
  } catch (const Error&) {
    // smoothing left the valid chart; keep the graph length
  }
  return best;
}

namespace {

struct MetricJet {
  RMat g;
  std::vector<RMat> dg;  // dg[k] = d_k g
  double gzz2 = 0.0;     // d^2/ds^2 [u^T g(x + s u) u]
};

MetricJet metric_jet(const StateFamily& family, const RVec& x, const RVec& u, double h) {
  const int d = family.param_dim();
  const Stencil& s1 = central_stencil(1);
  const Stencil& s2 = central_stencil(2);
  MetricJet j;
  j.g = qgt(family, x).g;
  j.dg.assign(static_cast<size_t>(d), RMat::Zero(d, d));
  for (int k = 0; k < d; ++k)
    for (size_t i = 0; i < s1.offsets.size(); ++i) {
      if (s1.offsets[i] == 0) continue;
      RVec p = x;
      p(k) += s1.offsets[i] * h;
      j.dg[static_cast<size_t>(k)] += s1.weights[i] * qgt(family, p).g / h;
    }
  for (size_t i = 0; i < s2.offsets.size(); ++i) {
    const RVec p = x + s2.offsets[i] * h * u;
    j.gzz2 += s2.weights[i] * u.dot(qgt(family, p).g * u) / (h * h);
  }
  return j;
}

}  // namespace

double intrinsic_distance_series(const StateFamily& family, const RVec& x, const RVec& z, double h) {
  const double L = z.norm();
  if (L == 0.0) return 0.0;
  const RVec u = z / L;
  const int d = family.param_dim();
  const MetricJet j = metric_jet(family, x, u, h);
  RMat dgu = RMat::Zero(d, d);
  for (int k = 0; k < d; ++k) dgu += u(k) * j.dg[static_cast<size_t>(k)];
  const double s2 = u.dot(j.g * u);
  const double s3 = 0.5 * u.dot(dgu * u);
  RVec gam(d);  // Gamma_{m,ij} u^i u^j
  for (int m = 0; m < d; ++m) gam(m) = (dgu * u)(m) - 0.5 * u.dot(j.dg[static_cast<size_t>(m)] * u);
  const double s4 = (j.gzz2 - 0.5 * gam.dot(j.g.ldlt().solve(gam))) / 6.0;
  return s2 * L * L + s3 * L * L * L + s4 * L * L * L * L;
}

double second_fundamental_norm2(const StateFamily& family, const RVec& x, const RVec& z, double h) {
  if (!family.has_vectors())
    throw Error(ErrorKind::VectorsUnavailable, "second fundamental form needs state vectors");
  family.check_derivative_point(x);
  const int d = family.param_dim();
  const Stencil& s1 = central_stencil(1);
  const Stencil& s2 = central_stencil(2);
  const CVec psi = family.state(x).amplitudes();
  const auto n = psi.size();
  CVec d1 = CVec::Zero(n), d2 = CVec::Zero(n);
  for (size_t i = 0; i < s2.offsets.size(); ++i) {
    const CVec v = family.state(x + s2.offsets[i] * h * z).amplitudes();
    d1 += s1.weights[i] * v / h;
    d2 += s2.weights[i] * v / (h * h);
  }
  const auto perp = [&](const CVec& v) -> CVec { return v - psi * psi.dot(v); };
  const CVec a = perp(d2) - 2.0 * psi.dot(d1) * perp(d1);
  std::vector<CVec> e(static_cast<size_t>(d));
  for (int k = 0; k < d; ++k) {
    CVec acc = CVec::Zero(n);
    for (size_t i = 0; i < s1.offsets.size(); ++i) {
      if (s1.offsets[i] == 0) continue;
      RVec p = x;
      p(k) += s1.offsets[i] * h;
      acc += s1.weights[i] * family.state(p).amplitudes() / h;
    }
    e[static_cast<size_t>(k)] = perp(acc);
  }
  RMat g(d, d);
  RVec c(d);
  for (int k = 0; k < d; ++k) {
    c(k) = e[static_cast<size_t>(k)].dot(a).real();
    for (int l = 0; l < d; ++l) g(k, l) = e[static_cast<size_t>(k)].dot(e[static_cast<size_t>(l)]).real();
  }
  return a.squaredNorm() - c.dot(g.ldlt().solve(c));
}

DeltaL2Check delta_L2_check(const StateFamily& family, const RVec& x, const RVec& z,
                            std::vector<double> eps) {
  DeltaL2Check out;
  out.eps = std::move(eps);
  for (double e : out.eps) {
    const double dl = distances(family, x, x + e * z).d;
    const double dn2 = intrinsic_distance_series(family, x, e * z);
    out.ratio.push_back((dn2 - dl * dl) / std::pow(e, 4));
  }
  out.predicted = second_fundamental_norm2(family, x, z) / 12.0;
  const double last = out.ratio.back();
  out.rel_error = std::abs(last - out.predicted) / std::max(std::abs(out.predicted), 1e-12);
  return out;
}

ChartCurve chart_curve(std::function<cplx(double)> f, double period) {
  ChartCurve c;
  c.f = f;
  c.hom = [f](double t) {
    Eigen::Vector2cd v;
    v << 1.0, f(t);
    return v;
  };
  c.period = period;
  return c;
}

ChartCurve homogeneous_curve(std::function<Eigen::Vector2cd(double)> hom, double period) {
  ChartCurve c;
  c.hom = hom;
  c.f = [hom](double t) {
    const Eigen::Vector2cd v = hom(t);
    return v(1) / v(0);
  };
  c.period = period;
  return c;
}

StateFamily curve_family(const ChartCurve& c) {
  auto hom = c.hom;
  std::optional<RVec> periods;
  if (c.period > 0) periods = RVec::Constant(1, c.period);
  return StateFamily::from_vectors(1, 1, [hom](const RVec& x) -> CVec { return hom(x(0)); }, periods);
}

cplx curve_d1(const ChartCurve& c, double t, double h) {
  if (c.df) return c.df(t);
  return (c.f(t - 2 * h) - 8.0 * c.f(t - h) + 8.0 * c.f(t + h) - c.f(t + 2 * h)) / (12.0 * h);
}

cplx curve_d2(const ChartCurve& c, double t, double h) {
  if (c.ddf) return c.ddf(t);
  return (-c.f(t - 2 * h) + 16.0 * c.f(t - h) - 30.0 * c.f(t) + 16.0 * c.f(t + h) - c.f(t + 2 * h)) /
         (12.0 * h * h);
}

double curve_speed(const ChartCurve& c, double t) {
  return std::abs(curve_d1(c, t)) / (1.0 + std::norm(c.f(t)));
}

CurveFrame curve_frame(const ChartCurve& c, double t) {
  const cplx f = c.f(t), f1 = curve_d1(c, t), f2 = curve_d2(c, t);
  const double K = 1.0 + std::norm(f);
  const double a1 = std::abs(f1);
  if (a1 <= 1e-12) throw Error(ErrorKind::StationaryPoint, "curve has a stationary point");
  const double s = a1 / K;
  const double ds = (std::conj(f1) * f2).real() / (a1 * K) - a1 * 2.0 * (std::conj(f) * f1).real() / (K * K);
  CurveFrame fr;
  fr.t = t;
  fr.f = f;
  fr.speed = s;
  fr.tangent = f1 / s;
  const cplx ftt = (f2 / s - f1 * ds / (s * s)) / s;
  fr.normal = ftt - 2.0 * std::conj(f) * fr.tangent * fr.tangent / K;
  return fr;
}

double frame_orthogonality(const CurveFrame& fr) {
  const double K = 1.0 + std::norm(fr.f);
  return (fr.normal * std::conj(fr.tangent)).real() / (K * K);
}

namespace {

// Use the chart with |f| <= 1 when a homogeneous form is available.
ChartCurve well_conditioned_chart(const ChartCurve& c, double t) {
  if (!c.hom || std::abs(c.f(t)) <= 1.0) return c;
  auto hom = c.hom;
  ChartCurve w;
  w.f = [hom](double u) {
    const Eigen::Vector2cd v = hom(u);
    return v(0) / v(1);
  };
  w.hom = [hom](double u) {
    const Eigen::Vector2cd v = hom(u);
    Eigen::Vector2cd r;
    r << v(1), v(0);
    return r;
  };
  w.period = c.period;
  return w;
}

double t_bracket(cplx f, cplx f1, cplx f2) {
  return (2.0 * f2 / f1 - 4.0 * std::conj(f) * f1 / (1.0 + std::norm(f))).imag();
}

}  // namespace

double curve_T(const ChartCurve& c, double t) {
  const ChartCurve w = well_conditioned_chart(c, t);
  const cplx f = w.f(t), f1 = curve_d1(w, t), f2 = curve_d2(w, t);
  if (std::abs(f1) <= 1e-12) throw Error(ErrorKind::StationaryPoint, "curve has a stationary point");
  const double s = std::abs(f1) / (1.0 + std::norm(f));
  return t_bracket(f, f1, f2) / s;
}

double curve_T_param(const ChartCurve& c, double t) {
  const ChartCurve w = well_conditioned_chart(c, t);
  const cplx f = w.f(t), f1 = curve_d1(w, t), f2 = curve_d2(w, t);
  if (std::abs(f1) <= 1e-12) throw Error(ErrorKind::StationaryPoint, "curve has a stationary point");
  const double s = std::abs(f1) / (1.0 + std::norm(f));
  return s * s * t_bracket(f, f1, f2);
}

double curve_T_sampled(const std::vector<cplx>& f, double dt, size_t i) {
  if (i < 2 || i + 2 >= f.size()) throw Error(ErrorKind::InvalidArgument, "sample index too close to the ends");
  const cplx f1 = (f[i - 2] - 8.0 * f[i - 1] + 8.0 * f[i + 1] - f[i + 2]) / (12.0 * dt);
  const cplx f2 = (-f[i - 2] + 16.0 * f[i - 1] - 30.0 * f[i] + 16.0 * f[i + 1] - f[i + 2]) / (12.0 * dt * dt);
  if (std::abs(f1) <= 1e-12) throw Error(ErrorKind::StationaryPoint, "curve has a stationary point");
  const double s = std::abs(f1) / (1.0 + std::norm(f[i]));
  return t_bracket(f[i], f1, f2) / s;
}

UnitSpeedMap::UnitSpeedMap(ChartCurve c, double t0, double t1, int table)
    : c_(std::move(c)), t0_(t0), t1_(t1) {
  if (!(t1 > t0) || table < 2) throw Error(ErrorKind::InvalidArgument, "unit-speed map needs t1 > t0");
  ts_.resize(static_cast<size_t>(table) + 1);
  ss_.resize(static_cast<size_t>(table) + 1);
  const double dt = (t1 - t0) / table;
  ts_[0] = t0;
  ss_[0] = 0.0;
  for (int i = 1; i <= table; ++i) {
    const double a = t0 + (i - 1) * dt, b = t0 + i * dt;
    const double sa = curve_speed(c_, a), sm = curve_speed(c_, 0.5 * (a + b)), sb = curve_speed(c_, b);
    if (sa <= 0 || sm <= 0 || sb <= 0) throw Error(ErrorKind::StationaryPoint, "curve has a stationary point");
    ts_[static_cast<size_t>(i)] = b;
    ss_[static_cast<size_t>(i)] = ss_[static_cast<size_t>(i - 1)] + dt * (sa + 4 * sm + sb) / 6.0;
  }
  length_ = ss_.back();
}

double UnitSpeedMap::arc(double t) const {
  // table value plus 5-point Gauss-Legendre on the partial cell
  const auto it = std::upper_bound(ts_.begin(), ts_.end(), t);
  size_t k = it == ts_.begin() ? 0 : static_cast<size_t>(it - ts_.begin()) - 1;
  k = std::min(k, ts_.size() - 2);
  const double a = ts_[k];
  static const double xg[5] = {0.0, -0.5384693101056831, 0.5384693101056831, -0.9061798459386640,
                               0.9061798459386640};
  static const double wg[5] = {0.5688888888888889, 0.4786286704993665, 0.4786286704993665,
                               0.2369268850561891, 0.2369268850561891};
  const double half = 0.5 * (t - a), mid = 0.5 * (t + a);
  double acc = 0.0;
  for (int i = 0; i < 5; ++i) acc += wg[i] * curve_speed(c_, mid + half * xg[i]);
  return ss_[k] + half * acc;
}

double UnitSpeedMap::param_at(double s) const {
  if (c_.period > 0 && std::abs((t1_ - t0_) - c_.period) < 1e-12) {
    const double turns = std::floor(s / length_);
    return param_at_wrapped(s - turns * length_) + turns * c_.period;
  }
  return param_at_wrapped(s);
}

double UnitSpeedMap::param_at_wrapped(double s) const {
  const auto it = std::upper_bound(ss_.begin(), ss_.end(), s);
  size_t k = it == ss_.begin() ? 0 : static_cast<size_t>(it - ss_.begin()) - 1;
  k = std::min(k, ss_.size() - 2);
  const double w = (s - ss_[k]) / (ss_[k + 1] - ss_[k]);
  double t = ts_[k] + w * (ts_[k + 1] - ts_[k]);
  for (int iter = 0; iter < 20; ++iter) {
    const double r = arc(t) - s;
    const double dt = r / curve_speed(c_, t);
    t -= dt;
    if (std::abs(r) < 1e-13) break;
  }
  return t;
}

ChartCurve UnitSpeedMap::curve() const {
  auto self = std::make_shared<UnitSpeedMap>(*this);
  ChartCurve out;
  out.f = [self](double s) { return self->c_.f(self->param_at(s)); };
  if (c_.hom) out.hom = [self](double s) { return self->c_.hom(self->param_at(s)); };
  const bool closed = c_.period > 0 && std::abs((t1_ - t0_) - c_.period) < 1e-12;
  out.period = closed ? length_ : 0.0;
  return out;
}

std::vector<CurveSample> reconstruct_curve(const std::function<double(double)>& T, double theta0,
                                           double dtheta0, double phi0, double t_end, double step) {
  if (std::abs(dtheta0) >= 1.0) throw Error(ErrorKind::SpeedSaturation, "|theta'| must be below 1");
  if (std::abs(std::sin(2 * theta0)) <= 1e-8) throw Error(ErrorKind::SingularLatitude, "sin 2theta vanishes");
  if (!(step > 0) || !(t_end > 0)) throw Error(ErrorKind::InvalidArgument, "step and span must be positive");
  using V3 = Eigen::Vector3d;  // theta, theta', phi
  const auto rhs = [&](double t, const V3& y) {
    const double w = 1.0 - y(1) * y(1);
    if (w <= 0) throw Error(ErrorKind::SpeedSaturation, "|theta'| reached 1");
    const double s2 = std::sin(2 * y(0));
    if (std::abs(s2) <= 1e-8) throw Error(ErrorKind::SingularLatitude, "sin 2theta crossed 0");
    const double sq = std::sqrt(w);
    V3 d;
    d << y(1), -T(t) * sq / 2.0 - 2.0 * (y(1) * y(1) - 1.0) * std::cos(2 * y(0)) / s2, 2.0 * sq / s2;
    return d;
  };
  const long nsteps = std::lround(t_end / step);
  std::vector<CurveSample> out;
  out.reserve(static_cast<size_t>(nsteps) + 1);
  V3 y(theta0, dtheta0, phi0);
  const auto push = [&](double t) {
    out.push_back({t, y(0), y(1), y(2), std::tan(y(0)) * std::polar(1.0, y(2))});
  };
  push(0.0);
  for (long i = 0; i < nsteps; ++i) {
    const double t = i * step;
    const V3 k1 = rhs(t, y);
    const V3 k2 = rhs(t + step / 2, y + step / 2 * k1);
    const V3 k3 = rhs(t + step / 2, y + step / 2 * k2);
    const V3 k4 = rhs(t + step, y + step * k3);
    y += step / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
    push((i + 1) * step);
  }
  return out;
}

SelfIntersection self_intersection(const ChartCurve& c, int samples) {
  if (!(c.period > 0)) throw Error(ErrorKind::InvalidArgument, "self-intersection needs a closed curve");
  if (samples < 8) throw Error(ErrorKind::InvalidArgument, "too few samples");
  const double dt = c.period / samples;
  double acc = 0.0;
  for (int j = 0; j < samples; ++j) {
    const double t = j * dt;
    const cplx z = c.f(t), z1 = curve_d1(c, t), z2 = curve_d2(c, t);
    const double n1 = std::norm(z1);
    if (n1 <= 1e-24) throw Error(ErrorKind::StationaryPoint, "curve has a stationary point");
    const cplx acc_v = z2 - 2.0 * std::conj(z) * z1 * z1 / (1.0 + std::norm(z));
    // sqrt(g) eps(v, nabla_v v) / |v|_g^2; the metric factors cancel.
    acc += (std::conj(z1) * acc_v).imag() / n1;
  }
  SelfIntersection si;
  si.raw = acc * dt;
  si.normalized = si.raw / (2.0 * kPi);
  return si;
}

}  // namespace qgeom
