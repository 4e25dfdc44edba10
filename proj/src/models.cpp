#include "qgeom/models.hpp"

#include <cmath>
#include <set>

namespace qgeom {

namespace spin_half {

StateFamily family() {
  const auto eval = [](const RVec& x) -> CVec {
    CVec v(2);
    v << 1.0, -cplx(x(0), x(1));
    return v;
  };
  const auto grad = [](const RVec& x) {
    const cplx z(x(0), x(1));
    const double N = std::sqrt(1.0 + std::norm(z));
    CVec psi(2);
    psi << 1.0, -z;
    std::vector<CVec> g(2, CVec(2));
    g[0] << 0.0, -1.0;
    g[1] << 0.0, cplx(0.0, -1.0);
    g[0] = g[0] / N - psi * (x(0) / (N * N * N));
    g[1] = g[1] / N - psi * (x(1) / (N * N * N));
    return g;
  };
  const auto guard = [](const RVec& x) {
    if (std::hypot(x(0), x(1)) > 1e6) throw Error(ErrorKind::PoleCoordinates, "zeta chart pole");
  };
  return StateFamily::from_vectors(2, 1, eval).with_gradient(grad).with_chart_guard(guard);
}

RVec point(cplx zeta) { return vec2(zeta.real(), zeta.imag()); }

double phi_closed(cplx z1, cplx z2, cplx z3) {
  const cplx p = (1.0 + std::conj(z1) * z2) * (1.0 + std::conj(z2) * z3) * (1.0 + std::conj(z3) * z1);
  const cplx phi = cplx(0.0, 1.0) * std::log(p / std::abs(p));
  return phi.real();
}

RVec a_origin(const RVec& r) {
  const double den = 1.0 + r.squaredNorm();
  return vec2(r(1) / den, -r(0) / den);
}

namespace {
RVec eps_dot(const RVec& v) { return vec2(-v(1), v(0)); }
}  // namespace

RVec a_general(const RVec& r1, const RVec& r2) {
  const double a2 = r1.squaredNorm(), b2 = r2.squaredNorm();
  const RVec t1 = -eps_dot(r2) / (1.0 + b2);
  const RVec t2 = eps_dot(r1 + a2 * r2) / (1.0 + 2.0 * r1.dot(r2) + a2 * b2);
  return t1 + t2;
}

cplx a_general_pole(cplx z1) { return -1.0 / std::conj(z1); }

}  // namespace spin_half

namespace spin_one {

StateFamily family() {
  const auto eval = [](const RVec& x) -> CVec {
    const double th = x(0), ph = x(1);
    CVec v(3);
    v << std::polar(std::pow(std::cos(th / 2), 2), 2 * ph), std::polar(std::sin(th) / std::sqrt(2.0), ph),
        std::pow(std::sin(th / 2), 2);
    return v;
  };
  const auto grad = [](const RVec& x) {
    const double th = x(0), ph = x(1);
    std::vector<CVec> g(2, CVec(3));
    g[0] << std::polar(-std::sin(th) / 2, 2 * ph), std::polar(std::cos(th) / std::sqrt(2.0), ph),
        std::sin(th) / 2;
    g[1] << cplx(0, 2) * std::polar(std::pow(std::cos(th / 2), 2), 2 * ph),
        cplx(0, 1) * std::polar(std::sin(th) / std::sqrt(2.0), ph), 0.0;
    return g;
  };
  const auto guard = [](const RVec& x) {
    if (std::abs(std::sin(x(0))) < 1e-6) throw Error(ErrorKind::PoleCoordinates, "theta at a pole");
  };
  return StateFamily::from_vectors(2, 2, eval).with_gradient(grad).with_chart_guard(guard);
}

CMat hamiltonian(double theta, double phi, double B) {
  const double bz = B * std::cos(theta);
  const cplx bp = std::polar(B * std::sin(theta), phi);  // Bx + i By
  const double r2 = std::sqrt(2.0);
  CMat H = CMat::Zero(3, 3);
  H(0, 0) = bz;
  H(0, 1) = bp / r2;
  H(1, 0) = std::conj(bp) / r2;
  H(1, 2) = bp / r2;
  H(2, 1) = std::conj(bp) / r2;
  H(2, 2) = -bz;
  return H;
}

RMat metric(double theta) {
  RMat g = RMat::Zero(2, 2);
  g(0, 0) = 0.5;
  g(1, 1) = 0.5 * std::pow(std::sin(theta), 2);
  return g;
}

double omega_theta_phi(double theta) { return -std::sin(theta); }

double l_ext(double l_int) { return std::acos(std::pow(std::cos(l_int / std::sqrt(2.0)), 2)); }

double alpha(double theta, double phi) {
  const double cot = 1.0 / std::tan(theta / 2);
  return 2.0 * std::atan2(std::sin(phi), cot * cot + std::cos(phi));
}

}  // namespace spin_one

namespace veronese {

namespace {

Eigen::Vector2cd factor(int n, double k) {
  Eigen::Vector2cd u;
  u << std::cos(k / 2), std::polar(std::sin(k / 2), n * k);
  return u;
}

Eigen::Vector2cd factor_d(int n, double k) {
  Eigen::Vector2cd u;
  u << -std::sin(k / 2) / 2, (std::cos(k / 2) / 2 + cplx(0, n) * std::sin(k / 2)) * std::polar(1.0, n * k);
  return u;
}

CVec kron(const Eigen::Vector2cd& a, const Eigen::Vector2cd& b) {
  CVec v(4);
  v << a(0) * b(0), a(1) * b(0), a(0) * b(1), a(1) * b(1);
  return v;
}

}  // namespace

StateFamily family(int n, int m) {
  const auto eval = [n, m](const RVec& k) -> CVec { return kron(factor(n, k(0)), factor(m, k(1))); };
  const auto grad = [n, m](const RVec& k) {
    return std::vector<CVec>{kron(factor_d(n, k(0)), factor(m, k(1))), kron(factor(n, k(0)), factor_d(m, k(1)))};
  };
  return StateFamily::from_vectors(2, 3, eval, RVec::Constant(2, 2 * kPi)).with_gradient(grad);
}

CMat projector_table(int n, int m, const RVec& k) {
  const double cx = std::cos(k(0) / 2), sx = std::sin(k(0) / 2);
  const double cy = std::cos(k(1) / 2), sy = std::sin(k(1) / 2);
  const double kx = k(0), ky = k(1);
  const auto e = [](double a) { return std::polar(1.0, a); };
  CMat H(4, 4);
  H(0, 0) = cx * cx * cy * cy;
  H(0, 1) = cx * cy * cy * sx * e(-kx * n);
  H(0, 2) = cx * cx * cy * sy * e(-ky * m);
  H(0, 3) = cx * cy * sx * sy * e(-kx * n - ky * m);
  H(1, 0) = cx * cy * cy * sx * e(kx * n);
  H(1, 1) = cy * cy * sx * sx;
  H(1, 2) = cx * cy * sx * sy * e(kx * n - ky * m);
  H(1, 3) = cy * sx * sx * sy * e(-ky * m);
  H(2, 0) = cx * cx * cy * sy * e(ky * m);
  H(2, 1) = cx * cy * sx * sy * e(ky * m - kx * n);
  H(2, 2) = cx * cx * sy * sy;
  H(2, 3) = cx * sx * sy * sy * e(-kx * n);
  H(3, 0) = cx * cy * sx * sy * e(kx * n + ky * m);
  H(3, 1) = cy * sx * sx * sy * e(ky * m);
  H(3, 2) = cx * sx * sy * sy * e(kx * n);
  H(3, 3) = sx * sx * sy * sy;
  return H;
}

CMat hamiltonian(int n, int m, const RVec& k) {
  const CVec psi = kron(factor(n, k(0)), factor(m, k(1)));
  return CMat::Identity(4, 4) - psi * psi.adjoint();
}

RMat metric(int n, int m, const RVec& k) {
  RMat g = RMat::Zero(2, 2);
  g(0, 0) = (1.0 + n * n * std::pow(std::sin(k(0)), 2)) / 4.0;
  g(1, 1) = (1.0 + m * m * std::pow(std::sin(k(1)), 2)) / 4.0;
  return g;
}

RMat metric_reference(int n, int m, const RVec& k) {
  RMat g = RMat::Zero(2, 2);
  g(0, 0) = 1.0 / (1.0 + n * n * std::pow(std::sin(k(0)), 2));
  g(1, 1) = 1.0 / (1.0 + m * m * std::pow(std::sin(k(1)), 2));
  return g;
}

double t_xxx(int n, double kx) {
  return n * std::cos(kx) / 2.0 * (2.0 + n * n * std::pow(std::sin(kx), 2));
}

double gamma_xxx_reference(int n, double kx) {
  const double s = std::sin(kx), c = std::cos(kx);
  return -n * n * s * c / std::pow(1.0 + n * n * s * s, 2);
}

}  // namespace veronese

namespace torus_cp3 {

StateFamily family(const ChartCurve& f, const ChartCurve& g) {
  auto hf = f.hom, hg = g.hom;
  std::optional<RVec> periods;
  if (f.period > 0 && g.period > 0) periods = vec2(f.period, g.period);
  return StateFamily::from_vectors(
      2, 3,
      [hf, hg](const RVec& x) -> CVec {
        const Eigen::Vector2cd a = hf(x(0)), b = hg(x(1));
        CVec v(4);
        v << a(0) * b(0), a(1) * b(0), a(0) * b(1), a(1) * b(1);
        return v;
      },
      periods);
}

double zak_phase(const ChartCurve& f, int samples) {
  if (!(f.period > 0)) throw Error(ErrorKind::InvalidArgument, "Zak phase needs a closed curve");
  const double dx = f.period / samples, h = 1e-4;
  double acc = 0.0;
  for (int i = 0; i < samples; ++i) {
    const double x = i * dx;
    const Eigen::Vector2cd u = f.hom(x);
    const Eigen::Vector2cd du = (f.hom(x - 2 * h) - 8.0 * f.hom(x - h) + 8.0 * f.hom(x + h) - f.hom(x + 2 * h)) / (12 * h);
    acc += u.dot(du).imag() / u.squaredNorm();
  }
  return -acc * dx;
}

double t_xxx(const ChartCurve& f, double x) { return curve_T_param(f, x); }

StateFamily unit_speed_family(const ChartCurve& f, const ChartCurve& g) {
  const UnitSpeedMap mf(f, 0.0, f.period), mg(g, 0.0, g.period);
  return family(mf.curve(), mg.curve());
}

}  // namespace torus_cp3

namespace lll {

cplx overlap(double B, const RVec& k, const RVec& q) {
  const double d2 = (k - q).squaredNorm();
  return std::exp(cplx(-d2 / (4 * B), (-k(0) * q(1) + q(0) * k(1)) / (2 * B)));
}

StateFamily family(double B) {
  if (!(B > 0)) throw Error(ErrorKind::InvalidArgument, "LLL field B must be positive");
  return StateFamily::from_kernel(2, [B](const RVec& k, const RVec& q) { return overlap(B, k, q); });
}

double d2(double B, const RVec& k, const RVec& p) { return 1.0 - std::exp(-(k - p).squaredNorm() / (2 * B)); }

double eps2(const RVec& a, const RVec& b) { return a(0) * b(1) - a(1) * b(0); }

double phi_closed(double B, const RVec& k, const RVec& q, const RVec& p) {
  return (eps2(k, q) + eps2(q, p) + eps2(p, k)) / (2 * B);
}

double metric_reference(double B) { return 1.0 / B; }

}  // namespace lll

namespace qwz {

StateFamily family(double M) {
  const auto eval = [M](const RVec& k) -> CVec {
    const double dx = std::sin(k(0)), dy = std::sin(k(1)), dz = M + std::cos(k(0)) + std::cos(k(1));
    const double d = std::sqrt(dx * dx + dy * dy + dz * dz);
    CVec a(2), b(2);
    a << cplx(dx, -dy), -(d + dz);
    b << d - dz, -cplx(dx, dy);
    return a.norm() >= b.norm() ? a : b;
  };
  return StateFamily::from_vectors(2, 1, eval, RVec::Constant(2, 2 * kPi));
}

}  // namespace qwz

ChartCurve figure8() {
  ChartCurve c = chart_curve([](double t) { return std::sin(t) * std::polar(1.0, t); }, 2 * kPi);
  c.df = [](double t) { return std::polar(1.0, 2 * t); };  // d/dt (e^{2it} - 1)/(2i)
  c.ddf = [](double t) { return cplx(0, 2) * std::polar(1.0, 2 * t); };
  return c;
}

ChartCurve chart_circle(double r) {
  ChartCurve c = chart_curve([r](double t) { return std::polar(r, t); }, 2 * kPi);
  c.df = [r](double t) { return cplx(0, 1) * std::polar(r, t); };
  c.ddf = [r](double t) { return -std::polar(r, t); };
  return c;
}

namespace {

double param(const std::map<std::string, std::string>& p, const std::string& key, double def) {
  const auto it = p.find(key);
  if (it == p.end()) return def;
  size_t used = 0;
  double v;
  try {
    v = std::stod(it->second, &used);
  } catch (const std::exception&) {
    throw Error(ErrorKind::InvalidArgument, "parameter " + key + " is not a number");
  }
  if (used != it->second.size()) throw Error(ErrorKind::InvalidArgument, "parameter " + key + " is not a number");
  return v;
}

int int_param(const std::map<std::string, std::string>& p, const std::string& key, int def) {
  const double v = param(p, key, def);
  if (v != std::round(v)) throw Error(ErrorKind::InvalidArgument, "parameter " + key + " must be an integer");
  return static_cast<int>(v);
}

void only_keys(const std::map<std::string, std::string>& p, std::set<std::string> allowed) {
  for (const auto& [k, v] : p)
    if (!allowed.count(k)) throw Error(ErrorKind::InvalidArgument, "unknown model parameter " + k);
}

}  // namespace

std::vector<std::string> model_names() { return {"spin_half", "spin_one", "veronese", "lll", "qwz"}; }

ModelInstance make_model(const std::string& name, const std::map<std::string, std::string>& params) {
  ModelInstance mi;
  mi.name = name;
  if (name == "spin_half") {
    only_keys(params, {});
    mi.family = spin_half::family();
    mi.lo = vec2(-2, -2);
    mi.hi = vec2(2, 2);
  } else if (name == "spin_one") {
    only_keys(params, {});
    mi.family = spin_one::family();
    mi.lo = vec2(0.05, 0.0);
    mi.hi = vec2(kPi - 0.05, 2 * kPi);
  } else if (name == "veronese") {
    only_keys(params, {"n", "m"});
    const int n = int_param(params, "n", 2), m = int_param(params, "m", 3);
    mi.params = {{"n", n}, {"m", m}};
    mi.family = veronese::family(n, m);
    mi.lo = vec2(0, 0);
    mi.hi = vec2(2 * kPi, 2 * kPi);
    mi.hamiltonian = [n, m](const RVec& k) { return veronese::hamiltonian(n, m, k); };
  } else if (name == "lll") {
    only_keys(params, {"B"});
    const double B = param(params, "B", 1.0);
    mi.params = {{"B", B}};
    mi.family = lll::family(B);
    mi.lo = vec2(-2, -2);
    mi.hi = vec2(2, 2);
  } else if (name == "qwz") {
    only_keys(params, {"M"});
    const double M = param(params, "M", 1.0);
    mi.params = {{"M", M}};
    mi.family = qwz::family(M);
    mi.lo = vec2(0, 0);
    mi.hi = vec2(2 * kPi, 2 * kPi);
    const StateFamily fam = mi.family;
    mi.hamiltonian = [fam](const RVec& k) {
      const CVec psi = fam.state(k).amplitudes();
      return CMat(CMat::Identity(2, 2) - psi * psi.adjoint());
    };
  } else {
    throw Error(ErrorKind::InvalidArgument, "unknown model " + name);
  }
  return mi;
}

}  // namespace qgeom
