#include <doctest.h>

#include "qgeom/invariants.hpp"
#include "qgeom/local_geom.hpp"
#include "qgeom/models.hpp"
#include "test_util.hpp"

using namespace qgeom;
using namespace testutil;

namespace {

// Projector-side oracle: P at x + s e_a + t e_b, differentiated by nested
// central differences. Gauge never enters.
CMat proj(const StateFamily& f, RVec x) { return projector_of(f.state(x)).matrix(); }

CMat dP(const StateFamily& f, const RVec& x, int a, double h = 1e-4) {
  const auto p = [&](double s) {
    RVec y = x;
    y(a) += s;
    return proj(f, y);
  };
  return d1(p, 0.0, h);
}

CMat ddP(const StateFamily& f, const RVec& x, int a, int b, double h = 1e-3) {
  const auto p = [&](double s) {
    RVec y = x;
    y(a) += s;
    return dP(f, y, b, h);
  };
  return d1(p, 0.0, h);
}

cplx q1_oracle(const StateFamily& f, const RVec& x, int a, int b) {
  return (proj(f, x) * dP(f, x, a) * dP(f, x, b)).trace();
}

cplx q2_oracle(const StateFamily& f, const RVec& x, int a, int b, int c) {
  return (proj(f, x) * dP(f, x, a) * ddP(f, x, b, c)).trace();
}

std::vector<std::pair<StateFamily, RVec>> samples() {
  return {{spin_half::family(), vec2(0.3, -0.7)},
          {spin_one::family(), vec2(1.1, 0.4)},
          {veronese::family(2, 3), vec2(0.9, 4.0)},
          {qwz::family(1.0), vec2(0.4, -1.2)},
          {lll::family(1.3), vec2(0.2, 0.5)}};
}

}  // namespace

TEST_CASE("Q1 matches the projector trace") {
  for (const auto& [f, x] : samples()) {
    if (f.proj_dim() < 0) continue;
    const CMat q = q1_tensor(f, x);
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b) CHECK(std::abs(q(a, b) - q1_oracle(f, x, a, b)) < 1e-8);
    const QGT t = qgt(f, x);
    CHECK((t.g - q.real()).cwiseAbs().maxCoeff() < 1e-14);
    CHECK((t.omega - 2 * q.imag()).cwiseAbs().maxCoeff() < 1e-14);
  }
}

TEST_CASE("Q2 matches the projector trace") {
  for (const auto& [f, x] : samples()) {
    if (f.proj_dim() < 0) continue;
    const CTensor3 q = q2_tensor(f, x);
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b)
        for (int c = 0; c < 2; ++c) CHECK(std::abs(q(a, b, c) - q2_oracle(f, x, a, b, c)) < 1e-6);
  }
}

TEST_CASE("spin-1 metric and curvature") {
  const StateFamily f = spin_one::family();
  for (double th : {0.3, 1.0, 2.2}) {
    const QGT t = qgt(f, vec2(th, 0.7));
    CHECK(t.g(0, 0) == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(t.g(1, 1) == doctest::Approx(0.5 * std::sin(th) * std::sin(th)).epsilon(1e-9));
    CHECK(std::abs(t.g(0, 1)) < 1e-10);
    CHECK(t.omega(0, 1) == doctest::Approx(-std::sin(th)).epsilon(1e-9));
  }
}

TEST_CASE("LLL metric and curvature from the closed-form kernel") {
  const double B = 1.7;
  const StateFamily f = lll::family(B);
  const RVec k = vec2(0.4, -0.2);
  const QGT t = qgt(f, k);
  // d^2(k, k + e) = 1 - exp(-|e|^2/2B) -> g = 1/(2B)
  CHECK(t.g(0, 0) == doctest::Approx(1 / (2 * B)).epsilon(1e-8));
  CHECK(t.g(1, 1) == doctest::Approx(1 / (2 * B)).epsilon(1e-8));
  // Phi(k, k+eps a, k+eps b) -> -(1/2) omega(a, b) eps^2
  const double eps = 1e-3;
  const double phi = lll::phi_closed(B, k, k + eps * vec2(1, 0), k + eps * vec2(0, 1));
  CHECK(t.omega(0, 1) == doctest::Approx(-2 * phi / (eps * eps)).epsilon(1e-6));
}

TEST_CASE("tensor symmetries") {
  for (const auto& [f, x] : samples()) {
    const QGT t = qgt(f, x);
    CHECK((t.g - t.g.transpose()).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((t.omega + t.omega.transpose()).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(t.g.selfadjointView<Eigen::Lower>().eigenvalues().minCoeff() > -1e-10);
    const ConnectionTensors c = connection_tensors(f, x);
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b)
        for (int e = 0; e < 2; ++e) {
          CHECK(std::abs(c.gamma(a, b, e) - c.gamma(a, e, b)) < 1e-7);
          CHECK(std::abs(c.gamma_tilde(a, b, e) - c.gamma_tilde(a, e, b)) < 1e-7);
        }
    CHECK(permutation_residual(c.T) < 1e-6);
    CHECK(symplectic_residual(f, x) < 1e-6);
  }
}

TEST_CASE("metric Christoffel symbols equal Re Q2") {
  for (const auto& [f, x] : samples()) {
    const RTensor3 mc = metric_christoffel(f, x);
    const ConnectionTensors c = qgc(f, x);
    for (size_t i = 0; i < mc.v.size(); ++i) CHECK(std::abs(mc.v[i] - c.gamma.v[i]) < 1e-6);
  }
}

TEST_CASE("spin-1/2 raised tensors agree") {
  const StateFamily f = spin_half::family();
  const RVec x = vec2(0.3, -0.7);
  const ConnectionTensors c = connection_tensors(f, x);
  REQUIRE(c.gamma_tilde_raised.has_value());
  const RTensor3 lc = raise_first(qgt(f, x).g.inverse(), c.gamma);
  for (size_t i = 0; i < lc.v.size(); ++i) CHECK(std::abs(lc.v[i] - c.gamma_tilde_raised->v[i]) < 1e-7);
}

TEST_CASE("Veronese T closed form") {
  for (int n : {1, 2, 3}) {
    const StateFamily f = veronese::family(n, 1);
    for (double kx : {0.2, 1.3, 2.9}) {
      const RTensor3 T = t_tensor(f, vec2(kx, 0.5));
      CHECK(T(0, 0, 0) == doctest::Approx(veronese::t_xxx(n, kx)).epsilon(1e-6));
      CHECK(std::abs(T(0, 0, 1)) < 1e-6);
      CHECK(std::abs(T(0, 1, 1)) < 1e-6);
    }
  }
}

TEST_CASE("Kaehler potential metric equals the QGT of the holomorphic family") {
  HoloFamily h;
  h.m = 1;
  h.f = {[](const CVec& y) { return y(0); }, [](const CVec& y) { return y(0) * y(0) * 0.5; }};
  CVec y(1);
  y(0) = cplx(0.3, -0.4);
  const QGT k = kaehler_qgt(h, y);
  const QGT q = qgt(holo_state_family(h), vec2(0.3, -0.4));
  CHECK((k.g - q.g).cwiseAbs().maxCoeff() < 1e-7);
  CHECK((k.omega - q.omega).cwiseAbs().maxCoeff() < 1e-7);
}

TEST_CASE("first q-expansion coefficient is Q1") {
  const StateFamily f = spin_one::family();
  const RVec y = vec2(1.0, 0.3);
  const auto qs = q_expansion(f, y, 2);
  REQUIRE(qs.size() == 2);
  const CMat q1 = q1_tensor(f, y);
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) CHECK(std::abs(qs[0].at({a, b}) - q1(a, b)) < 1e-6);
  CHECK(throws_kind(ErrorKind::InvalidArgument, [&] { q_expansion(f, y, 5); }));
}

TEST_CASE("expansion residual slopes") {
  const StateFamily f = spin_one::family();
  const RVec x = vec2(1.0, 0.3);
  const auto full = triangle_expansion_check(f, x, vec2(1, 0.2), vec2(-0.3, 1));
  CHECK(full.slope > 3.7);
  const auto lead = triangle_expansion_check(f, x, vec2(1, 0.2), vec2(-0.3, 1), {0.04, 0.02, 0.01},
                                             TriangleTerms::Leading);
  CHECK(lead.slope == doctest::Approx(3.0).epsilon(0.1));
  const auto dist = distance_expansion_check(f, x, vec2(0.6, 0.8));
  CHECK(dist.slope > 3.7);
  CHECK(loglog_slope({1, 2, 4}, {1, 8, 64}) == doctest::Approx(3.0));
}

TEST_CASE("steps below the noise floor are rejected") {
  const StateFamily f = spin_one::family();
  CHECK(throws_kind(ErrorKind::StepTooSmall, [&] { q2_tensor(StateFamily::from_kernel(2, [f](const RVec& a, const RVec& b) {
                                                  return overlap(f.state(a), f.state(b));
                                                }), vec2(1, 1), 1e-9); }));
}
