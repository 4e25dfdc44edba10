#include "qgeom/band_obs.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <json.hpp>
#include <map>
#include <sstream>

#include "qgeom/connection.hpp"
#include "qgeom/local_geom.hpp"

namespace qgeom {

size_t BZGrid::flat(const std::vector<int>& idx) const {
  size_t f = 0;
  for (int a = 0; a < d; ++a) {
    const int N = sizes[a];
    f = f * static_cast<size_t>(N) + static_cast<size_t>(((idx[a] % N) + N) % N);
  }
  return f;
}

std::vector<int> BZGrid::unflat(size_t i) const {
  std::vector<int> idx(d);
  for (int a = d - 1; a >= 0; --a) {
    idx[a] = static_cast<int>(i % static_cast<size_t>(sizes[a]));
    i /= static_cast<size_t>(sizes[a]);
  }
  return idx;
}

RVec BZGrid::k_at(const std::vector<int>& idx) const {
  RVec k(d);
  for (int a = 0; a < d; ++a) k(a) = idx[a] * periods(a) / sizes[a];
  return k;
}

namespace {

size_t total(const std::vector<int>& sizes) {
  size_t t = 1;
  for (int s : sizes) t *= static_cast<size_t>(s);
  return t;
}

// Row-major iteration over a box of per-axis extents.
bool next_index(std::vector<int>& idx, const std::vector<int>& ext) {
  for (int a = static_cast<int>(idx.size()) - 1; a >= 0; --a) {
    if (++idx[a] < ext[a]) return true;
    idx[a] = 0;
  }
  return false;
}

double nearest_branch(double value, double ref) {
  return value - 2 * kPi * std::round((value - ref) / (2 * kPi));
}

double reduce_mod(double v, double q) { return v - q * std::floor(v / q + 0.5); }

}  // namespace

BZGrid make_grid(const StateFamily& family, std::vector<int> sizes, int band_index) {
  const int d = family.param_dim();
  if (static_cast<int>(sizes.size()) != d) throw Error(ErrorKind::DimensionMismatch, "grid rank differs from family dimension");
  for (int s : sizes)
    if (s < 2) throw Error(ErrorKind::InvalidArgument, "grid needs at least 2 nodes per axis");
  if (!family.periods()) throw Error(ErrorKind::NonPeriodicGrid, "family has no Brillouin-zone periods");
  if (!family.has_vectors()) throw Error(ErrorKind::VectorsUnavailable, "band grids need state vectors");

  BZGrid g;
  g.d = d;
  g.sizes = std::move(sizes);
  g.periods = *family.periods();
  g.band_index = band_index;
  g.family = family;
  const size_t N = total(g.sizes);
  g.states.reserve(N);
  for (size_t i = 0; i < N; ++i) g.states.push_back(family.state(g.k_at(g.unflat(i))));
  g.n = g.states.front().proj_dim();

  const size_t probes[] = {0, N / 3, (2 * N) / 3};
  for (size_t p : probes) {
    const double r = family.periodicity_residual(g.k_at(g.unflat(p)));
    if (r > tol().periodicity) {
      std::ostringstream os;
      os << "family is not periodic on the Brillouin zone (residual " << r << ")";
      throw Error(ErrorKind::NonPeriodicGrid, os.str());
    }
  }
  return g;
}

Polarization average_polarization(const BZGrid& grid) {
  Polarization P{RVec(grid.d), RVec(grid.d)};
  for (int a = 0; a < grid.d; ++a) {
    std::vector<int> ext = grid.sizes;
    ext[a] = 1;
    std::vector<int> idx(grid.d, 0);
    double acc = 0.0, prev = 0.0;
    int lines = 0;
    do {
      cplx w = 1.0;
      std::vector<int> j = idx;
      for (int s = 0; s < grid.sizes[a]; ++s) {
        std::vector<int> jn = j;
        ++jn[a];
        w *= overlap(grid.at(j), grid.at(jn));
        j = jn;
      }
      if (std::abs(w) <= tol().orthogonal)
        throw Error(ErrorKind::OrthogonalConsecutive, "Wilson line vanishes; grid too coarse");
      double gamma = -std::arg(w);
      if (lines > 0) gamma = nearest_branch(gamma, prev);
      prev = gamma;
      acc += gamma;
      ++lines;
    } while (next_index(idx, ext));
    const double L = grid.periods(a);
    P.quantum(a) = 2 * kPi / L;
    P.value(a) = reduce_mod(acc / lines / L, P.quantum(a));
  }
  return P;
}

namespace {

// mean log <u_k|u_{k+q}> with branch continuation along a spanning tree of
// the grid; `partner` returns the state at k+q for node i.
template <class Partner>
cplx mean_log_overlap(const BZGrid& grid, Partner partner) {
  const size_t N = grid.count();
  std::vector<double> im(N);
  cplx acc = 0.0;
  for (size_t i = 0; i < N; ++i) {
    const cplx ov = overlap(grid.states[i], partner(i));
    if (std::abs(ov) <= tol().overlap_collapse) {
      std::ostringstream os;
      os << "|<u_k|u_k+q>| = " << std::abs(ov) << " at node " << i;
      throw Error(ErrorKind::OverlapCollapse, os.str());
    }
    double ph = std::arg(ov);
    if (i > 0) {
      std::vector<int> idx = grid.unflat(i);
      int a = grid.d - 1;
      while (idx[a] == 0) --a;
      --idx[a];
      for (int b = a + 1; b < grid.d; ++b) idx[b] = 0;
      ph = nearest_branch(ph, im[grid.flat(idx)]);
    }
    im[i] = ph;
    acc += cplx(std::log(std::abs(ov)), ph);
  }
  return acc / static_cast<double>(N);
}

cplx checked_overlap(const StateVector& a, const StateVector& b) {
  const cplx ov = overlap(a, b);
  if (std::abs(ov) <= tol().overlap_collapse) {
    std::ostringstream os;
    os << "overlap collapsed to " << std::abs(ov);
    throw Error(ErrorKind::OverlapCollapse, os.str());
  }
  return ov;
}

// Sum of arg <u_j|u_{j+e_a}> over every a-link of the grid. Each line's sum
// is gauge invariant mod 2pi; lines are continued by nearest branch.
double link_phase_total(const BZGrid& grid, int a) {
  std::vector<int> ext = grid.sizes;
  ext[a] = 1;
  std::vector<int> idx(grid.d, 0);
  double acc = 0.0, prev = 0.0;
  int lines = 0;
  do {
    double line = 0.0;
    std::vector<int> j = idx;
    for (int s = 0; s < grid.sizes[a]; ++s) {
      std::vector<int> jn = j;
      ++jn[a];
      line += std::arg(checked_overlap(grid.at(j), grid.at(jn)));
      j = jn;
    }
    line = wrap_angle(line);
    if (lines > 0) line = nearest_branch(line, prev);
    prev = line;
    acc += line;
    ++lines;
  } while (next_index(idx, ext));
  return acc;
}

// Lattice shift: arg <u_k|u_{k+s}> is split into the closed-loop invariant
// <u_k|u_{k+s}> prod <u_{j+1}|u_j> along an axis-ordered path back to k,
// plus the link phases, whose grid total is s_a times the per-axis sum.
cplx log_c_shift(const BZGrid& grid, const std::vector<int>& shift) {
  const size_t N = grid.count();
  double re = 0.0, im = 0.0;
  for (size_t i = 0; i < N; ++i) {
    const std::vector<int> k = grid.unflat(i);
    std::vector<int> ks = k;
    for (int a = 0; a < grid.d; ++a) ks[a] += shift[a];
    cplx loop = checked_overlap(grid.at(k), grid.at(ks));
    re += std::log(std::abs(loop));
    std::vector<int> j = k;
    for (int a = 0; a < grid.d; ++a) {
      const int step = shift[a] > 0 ? 1 : -1;
      for (int s = 0; s != shift[a]; s += step) {
        std::vector<int> jn = j;
        jn[a] += step;
        loop *= checked_overlap(grid.at(jn), grid.at(j));
        j = jn;
      }
    }
    im += std::arg(loop);
  }
  for (int a = 0; a < grid.d; ++a)
    if (shift[a] != 0) im += shift[a] * link_phase_total(grid, a);
  return cplx(re, im) / static_cast<double>(N);
}

}  // namespace

cplx log_generating_function(const BZGrid& grid, const RVec& q) {
  if (q.size() != grid.d) throw Error(ErrorKind::DimensionMismatch, "q has the wrong dimension");
  if (grid.family) {
    const StateFamily& fam = *grid.family;
    return mean_log_overlap(grid, [&](size_t i) { return fam.state(grid.k_at(grid.unflat(i)) + q); });
  }
  std::vector<int> shift(grid.d);
  for (int a = 0; a < grid.d; ++a) {
    const double s = q(a) * grid.sizes[a] / grid.periods(a);
    if (std::abs(s - std::round(s)) > 1e-9)
      throw Error(ErrorKind::InvalidArgument, "a grid without family only accepts q on the grid lattice");
    shift[a] = static_cast<int>(std::lround(s));
  }
  return log_c_shift(grid, shift);
}

double CumulantReport::at(const std::vector<double>& v, const std::vector<int>& idx) const {
  size_t f = 0;
  for (int i : idx) f = f * static_cast<size_t>(d) + static_cast<size_t>(i);
  return v[f];
}

namespace {

std::vector<std::vector<int>> all_indices(int d, int order) {
  std::vector<std::vector<int>> out;
  std::vector<int> idx(order, 0), ext(order, d);
  do out.push_back(idx);
  while (next_index(idx, ext));
  return out;
}

double symmetry_residual_of(const std::vector<double>& v, int d, int order) {
  if (v.empty() || order < 2) return 0.0;
  double r = 0.0;
  for (const auto& idx : all_indices(d, order)) {
    std::vector<int> p = idx;
    std::sort(p.begin(), p.end());
    size_t f0 = 0, f1 = 0;
    for (int i = 0; i < order; ++i) {
      f0 = f0 * d + idx[i];
      f1 = f1 * d + p[i];
    }
    r = std::max(r, std::abs(v[f0] - v[f1]));
  }
  return r;
}

}  // namespace

CumulantReport cumulant(const BZGrid& grid, int order, double dq) {
  if (order < 1 || order > 3) throw Error(ErrorKind::InvalidArgument, "cumulant order must be 1, 2 or 3");
  const int d = grid.d;
  CumulantReport rep;
  rep.order = order;
  rep.d = d;

  if (order == 1) {
    const Polarization P = average_polarization(grid);
    rep.quantum = P.quantum(0);
    for (int a = 0; a < d; ++a) {
      // -Im log C(step e_a) / step; only the per-line link sums mod 2pi are
      // gauge invariant for a one-step shift.
      const double lines = static_cast<double>(grid.count()) / grid.sizes[a];
      const double acc = link_phase_total(grid, a);
      const double k1 = -acc / lines / grid.periods(a);
      rep.generating_function.push_back(reduce_mod(k1, P.quantum(a)));
      rep.q_integral.push_back(P.value(a));
    }
    return rep;
  }

  // kappa_n = Re[i^n d^n log C], tensor-product central stencils in q.
  std::map<std::vector<int>, cplx> cache;
  const auto lnC = [&](const std::vector<int>& off) {
    auto it = cache.find(off);
    if (it != cache.end()) return it->second;
    RVec q(d);
    for (int a = 0; a < d; ++a) q(a) = off[a] * dq;
    const cplx v = log_generating_function(grid, q);
    cache.emplace(off, v);
    return v;
  };
  const cplx in = std::pow(cplx(0, 1), order);
  for (const auto& idx : all_indices(d, order)) {
    std::vector<int> mult(d, 0);
    for (int i : idx) ++mult[i];
    std::vector<int> axes, ext;
    for (int a = 0; a < d; ++a)
      if (mult[a] > 0) {
        axes.push_back(a);
        ext.push_back(static_cast<int>(central_stencil(mult[a]).offsets.size()));
      }
    std::vector<int> pos(axes.size(), 0);
    cplx acc = 0.0;
    do {
      std::vector<int> off(d, 0);
      double w = 1.0;
      for (size_t j = 0; j < axes.size(); ++j) {
        const Stencil& st = central_stencil(mult[axes[j]]);
        off[axes[j]] = st.offsets[pos[j]];
        w *= st.weights[pos[j]];
      }
      if (std::abs(w) > 1e-14) acc += w * lnC(off);
    } while (next_index(pos, ext));
    rep.generating_function.push_back((in * acc / std::pow(dq, order)).real());
  }

  if (grid.family) {
    const StateFamily& fam = *grid.family;
    rep.q_integral.assign(rep.generating_function.size(), 0.0);
    for (size_t i = 0; i < grid.count(); ++i) {
      const RVec k = grid.k_at(grid.unflat(i));
      if (order == 2) {
        const RMat g = qgt(fam, k).g;
        for (int a = 0; a < d; ++a)
          for (int b = 0; b < d; ++b) rep.q_integral[a * d + b] += g(a, b);
      } else {
        const RTensor3 T = t_tensor(fam, k);
        for (size_t j = 0; j < T.v.size(); ++j) rep.q_integral[j] += -0.5 * T.v[j];
      }
    }
    for (double& v : rep.q_integral) v /= static_cast<double>(grid.count());
  }
  rep.symmetry_residual = std::max(symmetry_residual_of(rep.generating_function, d, order),
                                   symmetry_residual_of(rep.q_integral, d, order));
  return rep;
}

namespace {

struct ProjJet {
  CMat P;
  std::vector<CMat> dP;
};

ProjJet proj_jet(const StateFamily& fam, const RVec& k) {
  const int d = fam.param_dim();
  const CVec psi = fam.state(k).amplitudes();
  ProjJet j{psi * psi.adjoint(), {}};
  if (fam.has_gradient()) {
    const auto g = fam.gradient(k);
    for (int a = 0; a < d; ++a) j.dP.push_back(g[a] * psi.adjoint() + psi * g[a].adjoint());
    return j;
  }
  const double h = 1e-3;
  const Stencil& st = central_stencil(1);
  for (int a = 0; a < d; ++a) {
    CMat acc = CMat::Zero(psi.size(), psi.size());
    for (size_t s = 0; s < st.offsets.size(); ++s) {
      if (std::abs(st.weights[s]) < 1e-14) continue;
      RVec x = k;
      x(a) += st.offsets[s] * h;
      const CVec v = fam.state(x).amplitudes();
      acc += st.weights[s] * (v * v.adjoint());
    }
    j.dP.push_back(acc / h);
  }
  return j;
}

const cplx I(0.0, 1.0);

CMat sigma_A_with(const StateFamily& fam, const RVec& k, const RVec& q, const CMat& Q) {
  const int d = fam.param_dim();
  const RVec kp = k + q / 2, km = k - q / 2;
  const CVec Ap = connection_form(fam, kp, k).complexified;
  const CVec Am = connection_form(fam, km, k).complexified;
  const double Pp = std::norm(fam.overlap(k, kp)), Pm = std::norm(fam.overlap(k, km));
  CMat s(d, d);
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b)
      s(a, b) = I * (Pp * (Ap(a) * std::conj(Ap(b)) + std::conj(Q(a, b))) -
                     Pm * (std::conj(Am(a)) * Am(b) + Q(a, b)));
  return s;
}

}  // namespace

CMat sigma_integrand_projector(const StateFamily& fam, const RVec& k, const RVec& q) {
  const int d = fam.param_dim();
  const CVec psi = fam.state(k).amplitudes();
  const CMat P = psi * psi.adjoint();
  const ProjJet m = proj_jet(fam, k - q / 2), p = proj_jet(fam, k + q / 2);
  CMat s(d, d);
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b)
      s(a, b) = I * ((P * m.dP[b] * m.dP[a]).trace() - (P * p.dP[a] * p.dP[b]).trace());
  return s;
}

CMat sigma_integrand_projector_shifted(const StateFamily& fam, const RVec& k, const RVec& q) {
  const int d = fam.param_dim();
  const ProjJet j = proj_jet(fam, k);
  const CVec up = fam.state(k + q / 2).amplitudes(), um = fam.state(k - q / 2).amplitudes();
  const CMat Pp = up * up.adjoint(), Pm = um * um.adjoint();
  CMat s(d, d);
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b)
      s(a, b) = I * ((Pp * j.dP[b] * j.dP[a]).trace() - (Pm * j.dP[a] * j.dP[b]).trace());
  return s;
}

CMat sigma_integrand_A(const StateFamily& fam, const RVec& k, const RVec& q) {
  return sigma_A_with(fam, k, q, q1_tensor(fam, k));
}

void check_flat_band(const BZGrid& grid, const HamiltonianFn& H) {
  if (!H) throw Error(ErrorKind::BandStructureViolation, "no Hamiltonian supplied for the flat-band check");
  const double t = tol().flat_band;
  for (size_t i = 0; i < grid.count(); ++i) {
    const RVec k = grid.k_at(grid.unflat(i));
    const CMat h = H(k);
    const CVec& psi = grid.states[i].amplitudes();
    if (h.rows() != psi.size() || h.cols() != psi.size())
      throw Error(ErrorKind::BandStructureViolation, "Hamiltonian dimension differs from the band states");
    if ((h - h.adjoint()).norm() > t) throw Error(ErrorKind::BandStructureViolation, "Hamiltonian not Hermitian");
    const RVec ev = Eigen::SelfAdjointEigenSolver<CMat>(h, Eigen::EigenvaluesOnly).eigenvalues();
    bool ok = std::abs(ev(0)) <= t;
    for (int j = 1; j < ev.size(); ++j) ok = ok && std::abs(ev(j) - 1.0) <= t;
    const double e0 = psi.dot(h * psi).real();
    if (!ok || std::abs(e0) > t) {
      std::ostringstream os;
      os << "spectrum is not {0, 1, ..., 1} with the band at 0 at k = (" << k.transpose() << ")";
      throw Error(ErrorKind::BandStructureViolation, os.str());
    }
  }
}

std::vector<ConductivityResult> conductivity_q(const BZGrid& grid, const std::vector<RVec>& qs,
                                               const HamiltonianFn& H) {
  if (!grid.family) throw Error(ErrorKind::VectorsUnavailable, "conductivity needs the band family");
  check_flat_band(grid, H);
  const StateFamily& fam = *grid.family;
  const int d = grid.d;
  std::vector<CMat> Q(grid.count());
  for (size_t i = 0; i < grid.count(); ++i) Q[i] = q1_tensor(fam, grid.k_at(grid.unflat(i)));

  std::vector<ConductivityResult> out;
  for (const RVec& q : qs) {
    if (q.size() != d) throw Error(ErrorKind::DimensionMismatch, "q has the wrong dimension");
    ConductivityResult r{q, CMat::Zero(d, d), CMat::Zero(d, d), 0.0};
    for (size_t i = 0; i < grid.count(); ++i) {
      const RVec k = grid.k_at(grid.unflat(i));
      const CMat a = sigma_A_with(fam, k, q, Q[i]);
      const CMat s = sigma_integrand_projector_shifted(fam, k, q);
      r.sigma += a;
      r.sigma_projector += sigma_integrand_projector(fam, k, q);
      r.pointwise_residual = std::max(r.pointwise_residual, (a - s).cwiseAbs().maxCoeff());
    }
    r.sigma /= static_cast<double>(grid.count());
    r.sigma_projector /= static_cast<double>(grid.count());
    if (r.pointwise_residual > 1e-8) {
      std::ostringstream os;
      os << "calA-form and projector-form integrands differ by " << r.pointwise_residual;
      throw Error(ErrorKind::ContractViolation, os.str());
    }
    out.push_back(std::move(r));
  }
  return out;
}

double sigma_xy_expansion(const BZGrid& grid, double q) {
  if (!grid.family) throw Error(ErrorKind::VectorsUnavailable, "expansion needs the band family");
  if (grid.d != 2) throw Error(ErrorKind::DimensionMismatch, "sigma_xy needs a 2D zone");
  double acc = 0.0;
  for (size_t i = 0; i < grid.count(); ++i) {
    const QGT t = qgt(*grid.family, grid.k_at(grid.unflat(i)));
    acc += t.omega(0, 1) * (1.0 - t.g(0, 0) * q * q / 2);
  }
  return acc / static_cast<double>(grid.count());
}

RMat sigma_expansion_tensor(const BZGrid& grid, const RVec& q) {
  if (!grid.family) throw Error(ErrorKind::VectorsUnavailable, "expansion needs the band family");
  const int d = grid.d;
  RMat acc = RMat::Zero(d, d);
  for (size_t i = 0; i < grid.count(); ++i) {
    const QGT t = qgt(*grid.family, grid.k_at(grid.unflat(i)));
    const RMat& w = t.omega;
    const RMat& g = t.g;
    for (int a = 0; a < d; ++a)
      for (int b = 0; b < d; ++b) {
        double corr = 0.0;
        for (int c = 0; c < d; ++c)
          for (int e = 0; e < d; ++e)
            corr += (w(a, b) * g(c, e) + g(a, c) * w(b, e) + w(c, a) * g(b, e)) * q(c) * q(e);
        acc(a, b) += w(a, b) - corr / 4;
      }
  }
  return acc / static_cast<double>(grid.count());
}

namespace {

void put_le(std::string& buf, double x) {
  unsigned char b[8];
  std::memcpy(b, &x, 8);
  if constexpr (std::endian::native == std::endian::big) std::reverse(b, b + 8);
  buf.append(reinterpret_cast<const char*>(b), 8);
}

double get_le(const char* p) {
  unsigned char b[8];
  std::memcpy(b, p, 8);
  if constexpr (std::endian::native == std::endian::big) std::reverse(b, b + 8);
  double x;
  std::memcpy(&x, b, 8);
  return x;
}

}  // namespace

void save_bloch_grid(const BZGrid& grid, const std::string& path, Payload payload) {
  nlohmann::json hdr;
  hdr["d"] = grid.d;
  hdr["sizes"] = grid.sizes;
  hdr["n"] = grid.n;
  hdr["band_index"] = grid.band_index;
  hdr["periods"] = std::vector<double>(grid.periods.data(), grid.periods.data() + grid.d);
  hdr["payload"] = payload == Payload::Json ? "json" : "binary";

  std::vector<int> ext = grid.sizes;
  for (int& e : ext) ++e;
  std::vector<CVec> nodes;
  std::vector<int> idx(grid.d, 0);
  do {
    bool closure = false;
    for (int a = 0; a < grid.d; ++a) closure = closure || idx[a] == grid.sizes[a];
    if (closure && grid.family)
      nodes.push_back(grid.family->state(grid.k_at(idx)).amplitudes());
    else
      nodes.push_back(grid.at(idx).amplitudes());
  } while (next_index(idx, ext));

  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error(ErrorKind::InvalidArgument, "cannot write " + path);
  os << hdr.dump() << '\n';
  if (payload == Payload::Json) {
    nlohmann::json arr = nlohmann::json::array();
    for (const CVec& v : nodes) {
      nlohmann::json node = nlohmann::json::array();
      for (int i = 0; i < v.size(); ++i) node.push_back({v(i).real(), v(i).imag()});
      arr.push_back(node);
    }
    os << arr.dump() << '\n';
  } else {
    std::string buf;
    buf.reserve(nodes.size() * static_cast<size_t>(grid.n + 1) * 16);
    for (const CVec& v : nodes)
      for (int i = 0; i < v.size(); ++i) {
        put_le(buf, v(i).real());
        put_le(buf, v(i).imag());
      }
    os.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  }
  if (!os) throw Error(ErrorKind::InvalidArgument, "failed writing " + path);
}

BZGrid load_bloch_grid(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error(ErrorKind::FormatError, "cannot open Bloch grid file " + path);
  std::string line;
  if (!std::getline(is, line)) throw Error(ErrorKind::FormatError, "missing header line");
  const std::string rest((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());

  BZGrid g;
  std::vector<CVec> nodes;
  try {
    const auto hdr = nlohmann::json::parse(line);
    g.d = hdr.at("d").get<int>();
    g.sizes = hdr.at("sizes").get<std::vector<int>>();
    g.n = hdr.at("n").get<int>();
    g.band_index = hdr.value("band_index", 0);
    const auto per = hdr.contains("periods") ? hdr.at("periods").get<std::vector<double>>()
                                             : std::vector<double>(static_cast<size_t>(std::max(g.d, 0)), 2 * kPi);
    const std::string kind = hdr.value("payload", std::string("binary"));
    if (g.d < 1 || static_cast<int>(g.sizes.size()) != g.d || static_cast<int>(per.size()) != g.d || g.n < 1)
      throw Error(ErrorKind::FormatError, "inconsistent Bloch grid header");
    for (int s : g.sizes)
      if (s < 2) throw Error(ErrorKind::FormatError, "grid sizes must be at least 2");
    g.periods = Eigen::Map<const RVec>(per.data(), g.d);

    size_t count = 1;
    for (int s : g.sizes) count *= static_cast<size_t>(s + 1);
    const int m = g.n + 1;
    if (kind == "binary") {
      const size_t need = count * static_cast<size_t>(m) * 16;
      if (rest.size() != need) {
        std::ostringstream os;
        os << "binary payload has " << rest.size() << " bytes, expected " << need;
        throw Error(ErrorKind::FormatError, os.str());
      }
      const char* p = rest.data();
      for (size_t i = 0; i < count; ++i) {
        CVec v(m);
        for (int c = 0; c < m; ++c, p += 16) v(c) = cplx(get_le(p), get_le(p + 8));
        nodes.push_back(v);
      }
    } else if (kind == "json") {
      const auto arr = nlohmann::json::parse(rest);
      if (!arr.is_array() || arr.size() != count) throw Error(ErrorKind::FormatError, "JSON payload has the wrong node count");
      for (const auto& node : arr) {
        if (!node.is_array() || static_cast<int>(node.size()) != m)
          throw Error(ErrorKind::FormatError, "JSON node has the wrong number of amplitudes");
        CVec v(m);
        for (int c = 0; c < m; ++c) {
          const auto pr = node[static_cast<size_t>(c)].get<std::vector<double>>();
          if (pr.size() != 2) throw Error(ErrorKind::FormatError, "amplitudes are [re, im] pairs");
          v(c) = cplx(pr[0], pr[1]);
        }
        nodes.push_back(v);
      }
    } else {
      throw Error(ErrorKind::FormatError, "unknown payload kind " + kind);
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::FormatError, std::string("Bloch grid: ") + e.what());
  }

  for (size_t i = 0; i < nodes.size(); ++i)
    if (std::abs(nodes[i].norm() - 1.0) > 1e-10) {
      std::ostringstream os;
      os << "node " << i << " has norm " << nodes[i].norm();
      throw Error(ErrorKind::NormalizationViolation, os.str());
    }

  std::vector<int> ext = g.sizes;
  for (int& e : ext) ++e;
  std::vector<int> idx(g.d, 0);
  size_t i = 0;
  g.states.resize(total(g.sizes));
  std::vector<std::pair<size_t, size_t>> closures;
  do {
    bool closure = false;
    for (int a = 0; a < g.d; ++a) closure = closure || idx[a] == g.sizes[a];
    if (closure)
      closures.emplace_back(i, g.flat(idx));
    else
      g.states[g.flat(idx)] = normalize(nodes[i]);
    ++i;
  } while (next_index(idx, ext));
  for (const auto& [node, wrapped] : closures) {
    const double p2 = std::norm(g.states[wrapped].amplitudes().dot(nodes[node]));
    if (1.0 - p2 > tol().periodicity) {
      std::ostringstream os;
      os << "closure node " << node << " differs from its periodic image (1 - P2 = " << 1.0 - p2 << ")";
      throw Error(ErrorKind::PeriodicityViolation, os.str());
    }
  }
  return g;
}

}  // namespace qgeom
