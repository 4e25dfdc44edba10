#include "qgeom/local_geom.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "qgeom/connection.hpp"
#include "qgeom/invariants.hpp"

namespace qgeom {

namespace {

struct Factor {
  int slot;  // 0 = bra argument, 1 = ket argument
  int axis;
  const Stencil* st;
};

std::vector<Factor> factors_for(const std::vector<int>& axes, int slot) {
  std::map<int, int> counts;
  for (int a : axes) ++counts[a];
  std::vector<Factor> out;
  for (const auto& [axis, n] : counts) out.push_back({slot, axis, &central_stencil(n)});
  return out;
}

void check_noise(double h, int total_order, double limit) {
  // roundoff of a tensor-product stencil: eps * (sum |w|)^order / h^order
  const double noise = 2.2e-16 * std::pow(1.5, total_order) / std::pow(h, total_order);
  if (!(h > 0.0) || noise > limit)
    throw Error(ErrorKind::StepTooSmall, "finite-difference step too small for the stencil noise floor");
}

}  // namespace

cplx log_overlap_derivative(const StateFamily& family, const RVec& x, const std::vector<int>& da,
                            const std::vector<int>& db, double h) {
  family.check_derivative_point(x);
  std::vector<Factor> fs = factors_for(da, 0);
  for (const auto& f : factors_for(db, 1)) fs.push_back(f);
  const int total = static_cast<int>(da.size() + db.size());
  const bool mixed = !da.empty() && !db.empty();
  std::vector<size_t> idx(fs.size(), 0);
  cplx acc = 0.0;
  while (true) {
    double w = 1.0;
    RVec a = x, b = x;
    for (size_t f = 0; f < fs.size(); ++f) {
      const Stencil& st = *fs[f].st;
      w *= st.weights[idx[f]];
      (fs[f].slot == 0 ? a : b)(fs[f].axis) += st.offsets[idx[f]] * h;
    }
    if (std::abs(w) > 1e-14) {
      // With derivatives in both slots, dividing by <a|x><x|b> leaves the
      // result unchanged and makes the argument gauge invariant and close to 1.
      const cplx ov = family.overlap(a, b);
      acc += w * std::log(mixed ? ov / (family.overlap(a, x) * family.overlap(x, b)) : ov);
    }
    size_t f = 0;
    for (; f < fs.size(); ++f) {
      if (++idx[f] < fs[f].st->offsets.size()) break;
      idx[f] = 0;
    }
    if (f == fs.size()) break;
  }
  return acc / std::pow(h, total);
}

CMat q1_tensor(const StateFamily& family, const RVec& x, double h) {
  const int d = family.param_dim();
  CMat q(d, d);
  if (family.has_gradient() && family.has_vectors()) {
    const CVec psi = family.state(x).amplitudes();
    const auto grad = family.gradient(x);
    for (int a = 0; a < d; ++a)
      for (int b = 0; b < d; ++b) {
        const CVec& ga = grad[static_cast<size_t>(a)];
        const CVec& gb = grad[static_cast<size_t>(b)];
        q(a, b) = ga.dot(gb) - ga.dot(psi) * psi.dot(gb);
      }
    return q;
  }
  check_noise(h, 2, 1e-6);
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b) q(a, b) = log_overlap_derivative(family, x, {a}, {b}, h);
  return q;
}

CTensor3 q2_tensor(const StateFamily& family, const RVec& x, double h) {
  const int d = family.param_dim();
  CTensor3 q(d);
  if (family.has_gradient() && family.has_vectors()) {
    // d_b d_c psi from the analytic gradient, then the kernel derivative
    // d_a(bra) d_b d_c(ket) log<psi|psi> assembled from overlaps.
    family.check_derivative_point(x);
    const CVec psi = family.state(x).amplitudes();
    const auto g = family.gradient(x);
    const double hg = 1e-3;
    const Stencil& st = central_stencil(1);
    std::vector<std::vector<CVec>> dd(static_cast<size_t>(d));
    for (int b = 0; b < d; ++b) {
      std::vector<CVec> acc(static_cast<size_t>(d), CVec::Zero(psi.size()));
      for (size_t i = 0; i < st.offsets.size(); ++i) {
        if (st.offsets[i] == 0) continue;
        RVec y = x;
        y(b) += st.offsets[i] * hg;
        const auto gy = family.gradient(y);
        for (int c = 0; c < d; ++c) acc[static_cast<size_t>(c)] += st.weights[i] * gy[static_cast<size_t>(c)] / hg;
      }
      dd[static_cast<size_t>(b)] = acc;
    }
    for (int a = 0; a < d; ++a)
      for (int b = 0; b < d; ++b)
        for (int c = b; c < d; ++c) {
          const CVec& ga = g[static_cast<size_t>(a)];
          const CVec& gb = g[static_cast<size_t>(b)];
          const CVec& gc = g[static_cast<size_t>(c)];
          const CVec bc = 0.5 * (dd[static_cast<size_t>(b)][static_cast<size_t>(c)] +
                                 dd[static_cast<size_t>(c)][static_cast<size_t>(b)]);
          const cplx Fa = ga.dot(psi), Fb = psi.dot(gb), Fc = psi.dot(gc);
          const cplx v = ga.dot(bc) - psi.dot(bc) * Fa - ga.dot(gb) * Fc - Fb * ga.dot(gc) + 2.0 * Fa * Fb * Fc;
          q(a, b, c) = v;
          q(a, c, b) = v;
        }
    return q;
  }
  check_noise(h, 3, 1e-6);
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b)
      for (int c = b; c < d; ++c) {
        const cplx v = log_overlap_derivative(family, x, {a}, {b, c}, h);
        q(a, b, c) = v;
        q(a, c, b) = v;
      }
  return q;
}

QGT qgt(const StateFamily& family, const RVec& x, double h) {
  const CMat q = q1_tensor(family, x, h);
  QGT out;
  out.g = 0.5 * (q.real() + q.real().transpose());
  out.omega = (q.imag() - q.imag().transpose());
  return out;
}

std::vector<RMat> omega_gradient(const StateFamily& family, const RVec& x, double h) {
  if (family.has_gradient()) h = std::min(h, 2e-3);  // omega is exact there
  const int d = family.param_dim();
  const Stencil& st = central_stencil(1);
  std::vector<RMat> out(static_cast<size_t>(d), RMat::Zero(d, d));
  for (int a = 0; a < d; ++a)
    for (size_t i = 0; i < st.offsets.size(); ++i) {
      if (st.offsets[i] == 0) continue;
      RVec y = x;
      y(a) += st.offsets[i] * h;
      out[static_cast<size_t>(a)] += st.weights[i] * qgt(family, y).omega / h;
    }
  return out;
}

RTensor3 metric_christoffel(const StateFamily& family, const RVec& x, double h) {
  if (family.has_gradient()) h = std::min(h, 2e-3);
  const int d = family.param_dim();
  const Stencil& st = central_stencil(1);
  std::vector<RMat> dg(static_cast<size_t>(d), RMat::Zero(d, d));
  for (int a = 0; a < d; ++a)
    for (size_t i = 0; i < st.offsets.size(); ++i) {
      if (st.offsets[i] == 0) continue;
      RVec y = x;
      y(a) += st.offsets[i] * h;
      dg[static_cast<size_t>(a)] += st.weights[i] * qgt(family, y).g / h;
    }
  RTensor3 G(d);
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b)
      for (int c = 0; c < d; ++c)
        G(a, b, c) = 0.5 * (dg[static_cast<size_t>(b)](a, c) + dg[static_cast<size_t>(c)](a, b) -
                            dg[static_cast<size_t>(a)](b, c));
  return G;
}

RTensor3 raise_first(const RMat& m, const RTensor3& t) {
  const int d = t.d;
  RTensor3 out(d);
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b)
      for (int c = 0; c < d; ++c) {
        double s = 0.0;
        for (int e = 0; e < d; ++e) s += m(a, e) * t(e, b, c);
        out(a, b, c) = s;
      }
  return out;
}

ConnectionTensors qgc(const StateFamily& family, const RVec& x, double h) {
  const CTensor3 q = q2_tensor(family, x, h);
  const int d = q.d;
  ConnectionTensors ct;
  ct.gamma = RTensor3(d);
  ct.gamma_tilde = RTensor3(d);
  for (size_t i = 0; i < q.v.size(); ++i) {
    ct.gamma.v[i] = q.v[i].real();
    ct.gamma_tilde.v[i] = 2.0 * q.v[i].imag();
  }
  return ct;
}

namespace {

RTensor3 t_from(const RTensor3& gt, const std::vector<RMat>& dw) {
  const int d = gt.d;
  RTensor3 T(d);
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b)
      for (int c = 0; c < d; ++c)
        T(a, b, c) = gt(c, a, b) - (dw[static_cast<size_t>(b)](c, a) + dw[static_cast<size_t>(a)](c, b)) / 3.0;
  return T;
}

}  // namespace

RTensor3 t_tensor(const StateFamily& family, const RVec& x, double h) {
  return connection_tensors(family, x, h).T;
}

ConnectionTensors connection_tensors(const StateFamily& family, const RVec& x, double h) {
  ConnectionTensors ct = qgc(family, x, h);
  const std::vector<RMat> dw = omega_gradient(family, x);
  ct.T = t_from(ct.gamma_tilde, dw);
  const RMat w = qgt(family, x).omega;
  const int d = w.rows();
  if (d % 2 == 0) {
    Eigen::FullPivLU<RMat> lu(w);
    if (lu.rank() == d && std::abs(w.determinant()) > 1e-10 * std::pow(std::max(w.norm(), 1e-300), d))
      ct.gamma_tilde_raised = raise_first(w.inverse(), ct.gamma_tilde);
  }
  return ct;
}

double symplectic_residual(const StateFamily& family, const RVec& x, double h) {
  const RTensor3 gt = qgc(family, x, h).gamma_tilde;
  const std::vector<RMat> dw = omega_gradient(family, x);
  const int d = gt.d;
  double r = 0.0;
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b)
      for (int c = 0; c < d; ++c)
        r = std::max(r, std::abs(dw[static_cast<size_t>(a)](b, c) + gt(c, b, a) - gt(b, c, a)));
  return r;
}

cplx QTensor::at(const std::vector<int>& idx) const {
  size_t flat = 0;
  for (int i : idx) flat = flat * static_cast<size_t>(d) + static_cast<size_t>(i);
  return v.at(flat);
}

namespace {

void multi_indices(int d, int maxdeg, std::vector<int>& cur, int pos, int left,
                   std::vector<std::vector<int>>& out) {
  if (pos == d) {
    out.push_back(cur);
    return;
  }
  for (int k = 0; k <= left; ++k) {
    cur[static_cast<size_t>(pos)] = k;
    multi_indices(d, maxdeg, cur, pos + 1, left - k, out);
  }
}

double factorial(int n) {
  double f = 1.0;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

}  // namespace

std::vector<QTensor> q_expansion(const StateFamily& family, const RVec& y, int order, double delta) {
  if (order < 1 || order > 4) throw Error(ErrorKind::InvalidArgument, "q_expansion order must be 1..4");
  const int d = family.param_dim();
  const int deg = order + 2;
  const int m = (deg + 1) / 2 + 1;
  std::vector<std::vector<int>> monos;
  std::vector<int> cur(static_cast<size_t>(d), 0);
  multi_indices(d, deg, cur, 0, deg, monos);

  std::vector<RVec> qs;
  std::vector<int> grid(static_cast<size_t>(d), -m);
  while (true) {
    RVec s(d);
    for (int i = 0; i < d; ++i) s(i) = grid[static_cast<size_t>(i)];
    qs.push_back(s);
    int i = 0;
    for (; i < d; ++i) {
      if (++grid[static_cast<size_t>(i)] <= m) break;
      grid[static_cast<size_t>(i)] = -m;
    }
    if (i == d) break;
  }

  const auto npts = static_cast<Eigen::Index>(qs.size());
  const auto nmono = static_cast<Eigen::Index>(monos.size());
  RMat V(npts, nmono);
  CMat rhs(npts, d);
  for (Eigen::Index p = 0; p < npts; ++p) {
    const RVec& s = qs[static_cast<size_t>(p)];
    for (Eigen::Index k = 0; k < nmono; ++k) {
      double v = 1.0;
      for (int i = 0; i < d; ++i) v *= std::pow(s(i), monos[static_cast<size_t>(k)][static_cast<size_t>(i)]);
      V(p, k) = v;
    }
    rhs.row(p) = connection_form(family, y + delta * s, y).complexified.transpose();
  }
  Eigen::JacobiSVD<RMat> svd(V, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const RVec sv = svd.singularValues();
  if (sv(sv.size() - 1) <= 0.0 || sv(0) / sv(sv.size() - 1) > 1e10)
    throw Error(ErrorKind::IllConditionedFit, "polynomial fit is ill-conditioned");
  const RMat cr = svd.solve(rhs.real());
  const RMat ci = svd.solve(rhs.imag());

  std::vector<QTensor> out;
  for (int n = 1; n <= order; ++n) {
    QTensor t;
    t.order = n;
    t.d = d;
    size_t total = static_cast<size_t>(d);
    for (int i = 0; i < n; ++i) total *= static_cast<size_t>(d);
    t.v.assign(total, 0.0);
    for (size_t flat = 0; flat < total; ++flat) {
      // decode (alpha, b1..bn)
      std::vector<int> idx(static_cast<size_t>(n + 1));
      size_t r = flat;
      for (int i = n; i >= 0; --i) {
        idx[static_cast<size_t>(i)] = static_cast<int>(r % static_cast<size_t>(d));
        r /= static_cast<size_t>(d);
      }
      std::vector<int> kappa(static_cast<size_t>(d), 0);
      for (int i = 1; i <= n; ++i) ++kappa[static_cast<size_t>(idx[static_cast<size_t>(i)])];
      const auto it = std::find(monos.begin(), monos.end(), kappa);
      const auto k = static_cast<Eigen::Index>(it - monos.begin());
      double fac = 1.0;
      for (int c : kappa) fac *= factorial(c);
      const int alpha = idx[0];
      t.v[flat] = cplx(cr(k, alpha), ci(k, alpha)) * fac / std::pow(delta, n);
    }
    out.push_back(std::move(t));
  }
  return out;
}

StateFamily holo_state_family(const HoloFamily& fam) {
  const int m = fam.m;
  const int n = static_cast<int>(fam.f.size());
  auto fs = fam.f;
  return StateFamily::from_vectors(2 * m, n, [fs, m](const RVec& x) {
    CVec y(m);
    for (int j = 0; j < m; ++j) y(j) = cplx(x(2 * j), x(2 * j + 1));
    CVec v(static_cast<Eigen::Index>(fs.size()) + 1);
    v(0) = 1.0;
    for (size_t i = 0; i < fs.size(); ++i) v(static_cast<Eigen::Index>(i) + 1) = fs[i](y);
    return v;
  });
}

CMat kaehler_hermitian_metric(const HoloFamily& fam, const CVec& y, double h) {
  const int m = fam.m;
  if (y.size() != m) throw Error(ErrorKind::DimensionMismatch, "holomorphic point has the wrong dimension");
  const auto logK = [&](const RVec& x) {
    CVec z(m);
    for (int j = 0; j < m; ++j) z(j) = cplx(x(2 * j), x(2 * j + 1));
    double K = 1.0;
    for (const auto& f : fam.f) K += std::norm(f(z));
    return std::log(K);
  };
  RVec x0(2 * m);
  for (int j = 0; j < m; ++j) {
    x0(2 * j) = y(j).real();
    x0(2 * j + 1) = y(j).imag();
  }
  const Stencil& s1 = central_stencil(1);
  const Stencil& s2 = central_stencil(2);
  const int dr = 2 * m;
  RMat H(dr, dr);
  for (int u = 0; u < dr; ++u)
    for (int v = u; v < dr; ++v) {
      double acc = 0.0;
      if (u == v) {
        for (size_t i = 0; i < s2.offsets.size(); ++i) {
          RVec x = x0;
          x(u) += s2.offsets[i] * h;
          acc += s2.weights[i] * logK(x);
        }
      } else {
        for (size_t i = 0; i < s1.offsets.size(); ++i)
          for (size_t j = 0; j < s1.offsets.size(); ++j) {
            if (s1.offsets[i] == 0 || s1.offsets[j] == 0) continue;
            RVec x = x0;
            x(u) += s1.offsets[i] * h;
            x(v) += s1.offsets[j] * h;
            acc += s1.weights[i] * s1.weights[j] * logK(x);
          }
      }
      H(u, v) = H(v, u) = acc / (h * h);
    }
  CMat g(m, m);
  for (int j = 0; j < m; ++j)
    for (int k = 0; k < m; ++k) {
      const int aj = 2 * j, bj = 2 * j + 1, ak = 2 * k, bk = 2 * k + 1;
      g(j, k) = 0.25 * cplx(H(aj, ak) + H(bj, bk), H(aj, bk) - H(bj, ak));
    }
  return g;
}

QGT kaehler_qgt(const HoloFamily& fam, const CVec& y, double h) {
  const CMat hm = kaehler_hermitian_metric(fam, y, h);
  const int m = fam.m;
  QGT out;
  out.g = RMat::Zero(2 * m, 2 * m);
  out.omega = RMat::Zero(2 * m, 2 * m);
  for (int j = 0; j < m; ++j)
    for (int k = 0; k < m; ++k) {
      const double re = hm(j, k).real(), im = hm(j, k).imag();
      const int aj = 2 * j, bj = 2 * j + 1, ak = 2 * k, bk = 2 * k + 1;
      out.g(aj, ak) = re;
      out.g(bj, bk) = re;
      out.g(aj, bk) = im;
      out.g(bj, ak) = -im;
      out.omega(aj, ak) = -2.0 * im;
      out.omega(bj, bk) = -2.0 * im;
      out.omega(aj, bk) = 2.0 * re;
      out.omega(bj, ak) = -2.0 * re;
    }
  return out;
}

double loglog_slope(const std::vector<double>& eps, const std::vector<double>& r) {
  const size_t n = eps.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (size_t i = 0; i < n; ++i) {
    const double lx = std::log(eps[i]);
    const double ly = std::log(std::max(std::abs(r[i]), 1e-300));
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

double triangle_expansion(const RMat& omega, const std::vector<RMat>& domega, const RTensor3& T,
                          const RVec& a, const RVec& b, TriangleTerms terms) {
  double phi = -0.5 * a.dot(omega * b);
  if (terms == TriangleTerms::Leading) return phi;
  double dwa = 0.0, dwb = 0.0;
  for (int i = 0; i < a.size(); ++i) {
    const double q = a.dot(domega[static_cast<size_t>(i)] * b);
    dwa += a(i) * q;
    dwb += b(i) * q;
  }
  phi -= (dwa + dwb) / 6.0;
  phi += 0.25 * (T.contract(a, a, b) - T.contract(a, b, b));
  return phi;
}

ExpansionCheck triangle_expansion_check(const StateFamily& family, const RVec& x, const RVec& z1,
                                        const RVec& z2, std::vector<double> eps, TriangleTerms terms) {
  const QGT q = qgt(family, x);
  std::vector<RMat> dw;
  RTensor3 T;
  if (terms == TriangleTerms::Full) {
    dw = omega_gradient(family, x);
    T = t_tensor(family, x);
  }
  ExpansionCheck ec;
  ec.eps = std::move(eps);
  for (double e : ec.eps) {
    const double exact = bargmann_phase(family, x, x + e * z1, x + e * z2);
    const double pred = triangle_expansion(q.omega, dw, T, e * z1, e * z2, terms);
    ec.exact.push_back(exact);
    ec.predicted.push_back(pred);
    ec.residual.push_back(exact - pred);
  }
  ec.slope = loglog_slope(ec.eps, ec.residual);
  return ec;
}

ExpansionCheck distance_expansion_check(const StateFamily& family, const RVec& x, const RVec& z,
                                        std::vector<double> eps, bool symmetric) {
  const QGT q = qgt(family, x);
  const double gzz = z.dot(q.g * z);
  const double gam = symmetric ? 0.0 : qgc(family, x).gamma.contract(z, z, z);
  ExpansionCheck ec;
  ec.eps = std::move(eps);
  for (double e : ec.eps) {
    const double dp = distances(family, x, x + e * z).d;
    double exact = dp * dp;
    if (symmetric) {
      const double dm = distances(family, x, x - e * z).d;
      exact = 0.5 * (exact + dm * dm);
    }
    const double pred = gzz * e * e + gam * e * e * e;
    ec.exact.push_back(exact);
    ec.predicted.push_back(pred);
    ec.residual.push_back(exact - pred);
  }
  ec.slope = loglog_slope(ec.eps, ec.residual);
  return ec;
}

}  // namespace qgeom
