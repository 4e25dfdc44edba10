#include "qgeom/connection.hpp"

#include <cmath>

#include "qgeom/invariants.hpp"

namespace qgeom {

LoopSample make_loop(std::vector<RVec> points) {
  if (points.size() < 3) throw Error(ErrorKind::InvalidArgument, "a loop needs at least 3 points");
  const auto d = points.front().size();
  for (const auto& p : points)
    if (p.size() != d) throw Error(ErrorKind::DimensionMismatch, "loop points differ in dimension");
  return LoopSample{std::move(points)};
}

LoopSample circle_loop(const RVec& center, double radius, int k, int axis_a, int axis_b) {
  std::vector<RVec> pts;
  pts.reserve(static_cast<size_t>(k));
  for (int i = 0; i < k; ++i) {
    const double t = 2.0 * kPi * i / k;
    RVec p = center;
    p(axis_a) += radius * std::cos(t);
    p(axis_b) += radius * std::sin(t);
    pts.push_back(p);
  }
  return make_loop(std::move(pts));
}

double berry_phase_overlap(const StateFamily& family, const LoopSample& loop) {
  const size_t k = loop.points.size();
  double phase = 0.0;
  for (size_t i = 0; i < k; ++i) {
    const cplx ov = family.overlap(loop.points[i], loop.points[(i + 1) % k]);
    if (std::norm(ov) <= tol().near_orthogonal)
      throw Error(ErrorKind::OrthogonalConsecutive, "consecutive loop points are orthogonal");
    phase -= std::arg(ov);
  }
  return phase;
}

double berry_phase_triangles(const StateFamily& family, const LoopSample& loop, const RVec& ref) {
  const size_t k = loop.points.size();
  double phase = 0.0;
  for (size_t i = 0; i < k; ++i) {
    const RVec& a = loop.points[i];
    const RVec& b = loop.points[(i + 1) % k];
    const cplx ra = family.overlap(ref, a);
    if (std::norm(ra) <= tol().near_orthogonal)
      throw Error(ErrorKind::OrthogonalReference, "reference point orthogonal to a loop point");
    const cplx p3 = ra * family.overlap(a, b) * family.overlap(b, ref);
    phase += bargmann_phase_of(p3);
  }
  return phase;
}

namespace {

// log P3(x, y, z) relative to its value at z = y; small near z = y.
cplx log_p3_ratio(const StateFamily& family, const RVec& x, const RVec& y, const RVec& z,
                  cplx xy, cplx base) {
  const cplx p3 = xy * family.overlap(y, z) * family.overlap(z, x);
  return std::log(p3 / base);
}

}  // namespace

ConnectionValue connection_form(const StateFamily& family, const RVec& x, const RVec& y, double h) {
  const int d = family.param_dim();
  const cplx xy = family.overlap(x, y);
  if (std::norm(xy) <= tol().near_orthogonal)
    throw Error(ErrorKind::NearOrthogonal, "connection requested at a point orthogonal to the reference");
  ConnectionValue cv;
  cv.complexified = CVec(d);
  if (family.has_gradient() && family.has_vectors()) {
    // calA = tr[P(x)P(y)dP(y)] / tr[P(x)P(y)] = <y|dy> + <dy|x>/<y|x>
    const StateVector sx = family.state(x), sy = family.state(y);
    const auto grad = family.gradient(y);
    const cplx yx = overlap(sy, sx);
    for (int a = 0; a < d; ++a) {
      const CVec& dy = grad[static_cast<size_t>(a)];
      cv.complexified(a) = sy.amplitudes().dot(dy) + dy.dot(sx.amplitudes()) / yx;
    }
  } else {
    family.check_derivative_point(y);
    const cplx base = std::norm(xy);
    const Stencil& st = central_stencil(1);
    for (int a = 0; a < d; ++a) {
      cplx acc = 0.0;
      for (size_t i = 0; i < st.offsets.size(); ++i) {
        if (st.weights[i] == 0.0 || st.offsets[i] == 0) continue;
        RVec z = y;
        z(a) += st.offsets[i] * h;
        acc += st.weights[i] * log_p3_ratio(family, x, y, z, xy, base);
      }
      cv.complexified(a) = acc / h;
    }
  }
  cv.u = cv.complexified.real();
  cv.a = -cv.complexified.imag();
  return cv;
}

double berry_phase_connection(const StateFamily& family, const LoopSample& loop, const RVec& X) {
  static const double node[4] = {-0.8611363115940526, -0.3399810435848563, 0.3399810435848563, 0.8611363115940526};
  static const double wgt[4] = {0.3478548451374538, 0.6521451548625461, 0.6521451548625461, 0.3478548451374538};
  const size_t k = loop.points.size();
  double total = 0.0;
  for (size_t i = 0; i < k; ++i) {
    const RVec& a = loop.points[i];
    const RVec& b = loop.points[(i + 1) % k];
    const RVec mid = (a + b) / 2, half = (b - a) / 2;
    for (int j = 0; j < 4; ++j) {
      try {
        total += wgt[j] * connection_form(family, X, mid + node[j] * half).a.dot(half);
      } catch (const Error& e) {
        if (e.kind() == ErrorKind::NearOrthogonal)
          throw Error(ErrorKind::PathSingularity, "loop passes through the antipode of the reference");
        throw;
      }
    }
  }
  return total;
}

double berry_phase_connection(const StateFamily& family, const ParamPath& closed, const RVec& X, int nodes) {
  if (nodes < 3) throw Error(ErrorKind::InvalidArgument, "need at least 3 nodes");
  const double hp = 1e-4;
  double total = 0.0;
  for (int i = 0; i < nodes; ++i) {
    const double t = double(i) / nodes;
    const RVec vel = (closed(t - 2 * hp) - 8.0 * closed(t - hp) + 8.0 * closed(t + hp) - closed(t + 2 * hp)) / (12.0 * hp);
    try {
      total += connection_form(family, X, closed(t)).a.dot(vel);
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::NearOrthogonal)
        throw Error(ErrorKind::PathSingularity, "loop passes through the antipode of the reference");
      throw;
    }
  }
  return total / nodes;
}

double gauge_shift_check(const StateFamily& family, const RVec& X1, const RVec& X2, const RVec& y,
                         double h) {
  const int d = family.param_dim();
  const RVec a1 = connection_form(family, X1, y, h).a;
  const RVec a2 = connection_form(family, X2, y, h).a;
  const Stencil& st = central_stencil(1);
  const double phi0 = bargmann_phase(family, X2, X1, y);
  RVec grad(d);
  for (int a = 0; a < d; ++a) {
    double acc = 0.0;
    for (size_t i = 0; i < st.offsets.size(); ++i) {
      if (st.offsets[i] == 0) continue;
      RVec z = y;
      z(a) += st.offsets[i] * h;
      acc += st.weights[i] * wrap_angle(bargmann_phase(family, X2, X1, z) - phi0);
    }
    grad(a) = acc / h;
  }
  return (a2 - a1 - grad).norm();
}

double phase_from_connection(const StateFamily& family, const RVec& x, const RVec& y, const RVec& z,
                             int resolution, const ParamPath& path) {
  if (resolution < 2) throw Error(ErrorKind::InvalidArgument, "resolution must be at least 2");
  if (resolution % 2) ++resolution;
  const ParamPath p = path ? path : ParamPath([&](double t) -> RVec { return x + t * (y - x); });
  const double dt = 1.0 / resolution;
  const double hp = 1e-5;
  double total = 0.0;
  for (int i = 0; i <= resolution; ++i) {
    const double t = i * dt;
    const RVec pt = p(t);
    RVec vel;
    if (!path) {
      vel = y - x;
    } else {
      const double t0 = std::clamp(t, 2 * hp, 1.0 - 2 * hp);
      vel = (p(t0 - 2 * hp) - 8.0 * p(t0 - hp) + 8.0 * p(t0 + hp) - p(t0 + 2 * hp)) / (12.0 * hp);
    }
    RVec az, ax;
    try {
      az = connection_form(family, z, pt).a;
      ax = connection_form(family, x, pt).a;
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::NearOrthogonal)
        throw Error(ErrorKind::PathSingularity, "path passes through a gauge singularity");
      throw;
    }
    const double w = (i == 0 || i == resolution) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    total += w * (az - ax).dot(vel);
  }
  return total * dt / 3.0;
}

RMat curvature_from_connection(const StateFamily& family, const RVec& X, const RVec& y, double h) {
  const int d = family.param_dim();
  RMat dA(d, d);  // dA(a, b) = d_a A_b
  const Stencil& st = central_stencil(1);
  for (int a = 0; a < d; ++a) {
    RVec acc = RVec::Zero(d);
    for (size_t i = 0; i < st.offsets.size(); ++i) {
      if (st.offsets[i] == 0) continue;
      RVec z = y;
      z(a) += st.offsets[i] * h;
      acc += st.weights[i] * connection_form(family, X, z).a;
    }
    dA.row(a) = acc.transpose() / h;
  }
  return -(dA - dA.transpose());
}

}  // namespace qgeom
