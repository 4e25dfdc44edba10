#include <doctest.h>

#include "qgeom/connection.hpp"
#include "qgeom/invariants.hpp"
#include "qgeom/local_geom.hpp"
#include "qgeom/models.hpp"
#include "test_util.hpp"

using namespace qgeom;
using namespace testutil;

TEST_CASE("spin-1/2 closed forms") {
  const StateFamily f = spin_half::family();
  const cplx z1(0.3, -0.2), z2(-0.8, 0.5), z3(0.1, 1.4);
  CHECK(std::abs(wrap_angle(spin_half::phi_closed(z1, z2, z3) -
                            bargmann_phase(f, spin_half::point(z1), spin_half::point(z2), spin_half::point(z3)))) < 1e-13);
  CHECK(std::abs(overlap(f.state(spin_half::point(z1)), f.state(spin_half::point(spin_half::a_general_pole(z1))))) < 1e-14);
  CHECK(throws_kind(ErrorKind::PoleCoordinates, [&] { qgt(f, vec2(2e6, 0)); }));
}

TEST_CASE("spin-1 states are extremal eigenvectors of B.S") {
  const StateFamily f = spin_one::family();
  for (double th : {0.4, 1.3, 2.6})
    for (double ph : {0.0, 1.1, 4.0}) {
      const CVec psi = f.state(vec2(th, ph)).amplitudes();
      const CMat H = spin_one::hamiltonian(th, ph, 1.3);
      const cplx e = psi.dot(H * psi);
      CHECK(std::abs(std::abs(e.real()) - 1.3) < 1e-12);
      CHECK((H * psi - e * psi).norm() < 1e-12);
    }
}

TEST_CASE("spin-1 triangle phase") {
  const StateFamily f = spin_one::family();
  for (double th : {0.5, 1.2, 2.0})
    for (double ph : {0.3, 1.7, -2.5}) {
      const double p = bargmann_phase(f, vec2(0, 0), vec2(th, 0), vec2(th, ph));
      CHECK(std::abs(wrap_angle(p - spin_one::alpha(th, ph))) < 1e-12);
    }
  CHECK(spin_one::metric(0.7)(1, 1) == doctest::Approx(0.5 * std::sin(0.7) * std::sin(0.7)));
  CHECK(spin_one::omega_theta_phi(0.7) == doctest::Approx(-std::sin(0.7)));
}

TEST_CASE("Veronese band") {
  for (int n : {1, 2}) {
    const StateFamily f = veronese::family(n, 3);
    for (const RVec& k : {vec2(0.3, 1.1), vec2(2.5, -0.4)}) {
      const CVec psi = f.state(k).amplitudes();
      const CMat P = psi * psi.adjoint();
      CHECK((veronese::projector_table(n, 3, k) - P).cwiseAbs().maxCoeff() < 1e-14);
      CHECK((veronese::hamiltonian(n, 3, k) * psi).norm() < 1e-14);
      const QGT t = qgt(f, k);
      CHECK((veronese::metric(n, 3, k) - t.g).cwiseAbs().maxCoeff() < 1e-9);
    }
    // periodic in both directions
    const RVec k = vec2(0.7, 0.2);
    CHECK(std::abs(std::abs(overlap(f.state(k), f.state(k + vec2(2 * kPi, 2 * kPi)))) - 1) < 1e-14);
  }
  // the reference Gamma is half the derivative of the reference metric
  const auto gp = [](double k) { return veronese::metric_reference(2, 1, vec2(k, 0))(0, 0); };
  CHECK(veronese::gamma_xxx_reference(2, 0.8) == doctest::Approx(0.5 * d1(gp, 0.8, 1e-4)).epsilon(1e-9));
}

TEST_CASE("torus family built from two curves") {
  const ChartCurve a = chart_circle(0.5), b = figure8();
  const StateFamily f = torus_cp3::family(a, b);
  CHECK(torus_cp3::t_xxx(a, 0.4) == doctest::Approx(curve_T_param(a, 0.4)));
  // Zak phase against a discrete overlap loop of the single-curve family
  const StateFamily one = curve_family(a);
  std::vector<RVec> pts;
  for (int i = 0; i < 4096; ++i) pts.push_back(RVec::Constant(1, 2 * kPi * i / 4096));
  const double loop = berry_phase_overlap(one, make_loop(pts));
  CHECK(std::abs(wrap_angle(torus_cp3::zak_phase(a) - loop)) < 1e-5);
  // a latitude circle of chart radius r encloses the cap 2 pi r^2/(1+r^2)
  CHECK(std::abs(std::abs(wrap_angle(loop)) - std::abs(wrap_angle(2 * kPi * 0.25 / 1.25))) < 1e-5);
  const StateFamily u = torus_cp3::unit_speed_family(a, b);
  const QGT t = qgt(u, vec2(0.3, 0.5));
  CHECK((t.g - RMat::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-5);
  CHECK(qgt(f, vec2(0.3, 0.5)).g(0, 1) == doctest::Approx(0.0).scale(1));
}

TEST_CASE("LLL kernel") {
  const double B = 0.8;
  const RVec k = vec2(0.1, 0.2), q = vec2(-0.3, 0.5), p = vec2(0.4, -0.1);
  CHECK(1 - std::norm(lll::overlap(B, k, q)) == doctest::Approx(lll::d2(B, k, q)).epsilon(1e-14));
  CHECK(std::abs(lll::overlap(B, k, q) - std::conj(lll::overlap(B, q, k))) < 1e-15);
  const StateFamily f = lll::family(B);
  const double phi = lll::phi_closed(B, k, q, p);
  CHECK(std::abs(wrap_angle(phi - bargmann_phase(f, k, q, p))) < 1e-13);
  // area law
  CHECK(std::abs(phi) == doctest::Approx(std::abs(lll::eps2(q - k, p - k)) / (2 * B)).epsilon(1e-12));
  CHECK(lll::metric_reference(B) == doctest::Approx(1 / B));
  CHECK(throws_kind(ErrorKind::InvalidArgument, [] { lll::family(0.0); }));
}

TEST_CASE("QWZ lower band") {
  const double M = 1.0;
  const StateFamily f = qwz::family(M);
  for (const RVec& k : {vec2(0.3, 1.1), vec2(2.5, -0.4), vec2(3.0, 3.1), vec2(0.0, 0.1)}) {
    const double dx = std::sin(k(0)), dy = std::sin(k(1)), dz = M + std::cos(k(0)) + std::cos(k(1));
    CMat H(2, 2);
    H << dz, cplx(dx, -dy), cplx(dx, dy), -dz;
    const CVec psi = f.state(k).amplitudes();
    CHECK((H * psi + std::sqrt(dx * dx + dy * dy + dz * dz) * psi).norm() < 1e-12);
  }
}

TEST_CASE("model registry") {
  for (const auto& n : model_names()) {
    const ModelInstance mi = make_model(n, {});
    CHECK(mi.name == n);
    CHECK(mi.lo.size() == 2);
    const RVec mid = (mi.lo + mi.hi) / 2;
    CHECK(std::abs(mi.family.overlap(mid, mid) - 1.0) < 1e-14);
  }
  CHECK(make_model("veronese", {{"n", "1"}, {"m", "2"}}).params.at("m") == 2);
  CHECK(bool(make_model("qwz", {}).hamiltonian));
  CHECK(throws_kind(ErrorKind::InvalidArgument, [] { make_model("nope", {}); }));
  CHECK(throws_kind(ErrorKind::InvalidArgument, [] { make_model("lll", {{"B", "x"}}); }));
  CHECK(throws_kind(ErrorKind::InvalidArgument, [] { make_model("lll", {{"B", "1.5e"}}); }));
  CHECK(throws_kind(ErrorKind::InvalidArgument, [] { make_model("veronese", {{"n", "1.5"}}); }));
  CHECK(throws_kind(ErrorKind::InvalidArgument, [] { make_model("spin_one", {{"B", "1"}}); }));
}
