#include <doctest.h>

#include "qgeom/models.hpp"
#include "test_util.hpp"

using namespace qgeom;
using namespace testutil;

TEST_CASE("normalize produces unit vectors and rejects zero") {
  std::mt19937_64 rng(1);
  for (int t = 0; t < 50; ++t) {
    const StateVector s = random_state(rng, 2 + t % 7);
    CHECK(s.amplitudes().norm() == doctest::Approx(1.0).epsilon(1e-14));
  }
  CHECK(throws_kind(ErrorKind::ZeroVector, [] { normalize({0.0, 0.0}); }));
  CHECK(throws_kind(ErrorKind::InvalidState, [] { StateVector(CVec::Ones(3)); }));
  CHECK(throws_kind(ErrorKind::InvalidState, [] { normalize(CVec::Ones(1)); }));
}

TEST_CASE("projectors are Hermitian idempotents of unit trace") {
  std::mt19937_64 rng(2);
  const StateVector s = random_state(rng, 5);
  const CMat P = projector_of(s).matrix();
  CHECK((P * P - P).norm() < 1e-14);
  CHECK((P - P.adjoint()).norm() < 1e-15);
  CHECK(std::abs(P.trace() - 1.0) < 1e-14);
  CHECK(throws_kind(ErrorKind::InvalidProjector, [] { Projector(CMat::Identity(3, 3)); }));
  CMat bad = P;
  bad(0, 1) += 0.1;
  CHECK(throws_kind(ErrorKind::InvalidProjector, [&] { Projector{bad}; }));
}

TEST_CASE("overlap is conjugate symmetric and unitary invariant") {
  std::mt19937_64 rng(3);
  const StateVector a = random_state(rng, 4), b = random_state(rng, 4);
  CHECK(std::abs(overlap(a, b) - std::conj(overlap(b, a))) < 1e-15);
  const CMat U = random_unitary(rng, 4);
  CHECK(std::abs(overlap(StateVector(U * a.amplitudes()), StateVector(U * b.amplitudes())) - overlap(a, b)) < 1e-14);
  CHECK(throws_kind(ErrorKind::DimensionMismatch, [&] { overlap(a, random_state(rng, 3)); }));
}

TEST_CASE("analytic gradients match finite differences of the normalized evaluator") {
  struct Case {
    StateFamily f;
    RVec x;
  };
  const std::vector<Case> cases = {{spin_half::family(), vec2(0.3, -0.7)},
                                   {spin_one::family(), vec2(1.1, 0.4)},
                                   {veronese::family(2, 3), vec2(0.9, 4.0)}};
  for (const auto& c : cases) {
    const auto g = c.f.gradient(c.x);
    for (int a = 0; a < 2; ++a) {
      const auto comp = [&](double s) {
        RVec y = c.x;
        y(a) += s;
        return CVec(c.f.state(y).amplitudes());
      };
      const CVec fd = d1(comp, 0.0, 1e-4);
      CHECK((fd - g[static_cast<size_t>(a)]).norm() < 1e-9);
    }
  }
}

TEST_CASE("kernel families expose overlaps only") {
  const StateFamily f = lll::family(1.0);
  CHECK_FALSE(f.has_vectors());
  CHECK(std::abs(f.overlap(vec2(0.2, 0.1), vec2(0.2, 0.1)) - 1.0) < 1e-15);
  CHECK(throws_kind(ErrorKind::VectorsUnavailable, [&] { f.state(vec2(0, 0)); }));
}

TEST_CASE("periodicity residual and redressing") {
  const StateFamily v = veronese::family(1, 2);
  CHECK(v.periodicity_residual(vec2(0.3, 1.7)) < 1e-14);
  const StateFamily r = v.redressed([](const RVec& k) { return 3 * std::sin(k(0)) - k(1) * k(1); });
  const RVec x = vec2(0.4, 2.0), y = vec2(1.9, 5.1);
  CHECK(std::norm(r.overlap(x, y)) == doctest::Approx(std::norm(v.overlap(x, y))).epsilon(1e-14));
  const double expect_phase = std::arg(v.overlap(x, y)) + (3 * std::sin(y(0)) - y(1) * y(1)) - (3 * std::sin(x(0)) - x(1) * x(1));
  CHECK(std::abs(wrap_angle(std::arg(r.overlap(x, y)) - expect_phase)) < 1e-12);
}

TEST_CASE("chart guard fires at coordinate poles") {
  const StateFamily f = spin_one::family();
  CHECK(throws_kind(ErrorKind::PoleCoordinates, [&] { f.check_derivative_point(vec2(0.0, 1.0)); }));
  CHECK_NOTHROW(f.check_derivative_point(vec2(0.5, 1.0)));
}
