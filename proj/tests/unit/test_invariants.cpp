#include <doctest.h>

#include "qgeom/invariants.hpp"
#include "qgeom/models.hpp"
#include "test_util.hpp"

using namespace qgeom;
using namespace testutil;

TEST_CASE("npoint equals the trace of the projector product") {
  std::mt19937_64 rng(10);
  for (int t = 0; t < 30; ++t) {
    const int n = 2 + t % 6, k = 2 + t % 5;
    std::vector<StateVector> s;
    CMat prod = CMat::Identity(n, n);
    for (int i = 0; i < k; ++i) {
      s.push_back(random_state(rng, n));
      prod = prod * projector_of(s.back()).matrix();
    }
    CHECK(std::abs(npoint(s) - prod.trace()) < 1e-14);
  }
}

TEST_CASE("reduction identity for random point sets") {
  std::mt19937_64 rng(11);
  for (int t = 0; t < 100; ++t) {
    const int n = 2 + t % 8, k = 3 + t % 4;
    std::vector<StateVector> s;
    for (int i = 0; i < k; ++i) s.push_back(random_state(rng, n));
    const StateFamily f = table_family(s);
    std::vector<RVec> pts;
    for (int i = 0; i < k; ++i) pts.push_back(RVec::Constant(1, i));
    for (int d = 0; d < k; ++d) CHECK(std::abs(reduce_npoint(f, pts, d) - npoint(f, pts)) < 1e-12);
  }
}

TEST_CASE("distances") {
  const StateVector a = normalize({1.0, 0.0}), b = normalize({1.0, 1.0});
  const Distances d = distances(a, b);
  CHECK(d.P2 == doctest::Approx(0.5));
  CHECK(d.D2 == doctest::Approx(0.5));
  CHECK(d.d == doctest::Approx(kPi / 4));
  CHECK(distances(a, a).d == doctest::Approx(0.0));
}

TEST_CASE("Bargmann phase: spin-1/2 triangle (0, 1, i)") {
  const StateFamily f = spin_half::family();
  const double phi = bargmann_phase(f, spin_half::point(0), spin_half::point(1), spin_half::point(cplx(0, 1)));
  CHECK(phi == doctest::Approx(-kPi / 4).epsilon(1e-12));
  // odd permutation flips the sign, cyclic ones keep it
  CHECK(bargmann_phase(f, spin_half::point(1), spin_half::point(0), spin_half::point(cplx(0, 1))) ==
        doctest::Approx(kPi / 4).epsilon(1e-12));
  CHECK(bargmann_phase(f, spin_half::point(1), spin_half::point(cplx(0, 1)), spin_half::point(0)) ==
        doctest::Approx(-kPi / 4).epsilon(1e-12));
  CHECK(throws_kind(ErrorKind::DegenerateTriangle, [] { bargmann_phase_of(cplx(1e-14, 0)); }));
}

TEST_CASE("modulus identity and unitary invariance") {
  std::mt19937_64 rng(12);
  std::vector<StateVector> s;
  for (int i = 0; i < 6; ++i) s.push_back(random_state(rng, 4));
  const InvariantSet inv = InvariantSet::from_states(s);
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 6; ++j)
      for (int k = 0; k < 6; ++k)
        CHECK(std::abs(std::norm(inv.P3(i, j, k)) - inv.P2(i, j) * inv.P2(j, k) * inv.P2(k, i)) < 1e-14);
  const CMat U = random_unitary(rng, 4);
  std::vector<StateVector> u;
  for (const auto& x : s) u.push_back(StateVector(U * x.amplitudes()));
  const InvariantSet iu = InvariantSet::from_states(u);
  CHECK((iu.two_point() - inv.two_point()).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(std::abs(iu.P3(1, 3, 5) - inv.P3(1, 3, 5)) < 1e-12);
}

TEST_CASE("InvariantSet permutations and JSON round trip") {
  std::mt19937_64 rng(13);
  std::vector<StateVector> s;
  for (int i = 0; i < 5; ++i) s.push_back(random_state(rng, 3));
  const InvariantSet inv = InvariantSet::from_states(s);
  CHECK(std::abs(inv.P3(2, 0, 4) - std::conj(inv.P3(0, 2, 4))) < 1e-15);
  CHECK(std::abs(inv.P3(4, 0, 2) - inv.P3(0, 2, 4)) < 1e-15);
  CHECK(std::abs(inv.P3(1, 1, 3) - inv.P2(1, 3)) < 1e-15);
  const InvariantSet back = InvariantSet::from_json(inv.to_json());
  CHECK(back.labels() == inv.labels());
  CHECK((back.two_point() - inv.two_point()).norm() == 0.0);
  CHECK(back.P3(0, 1, 2) == inv.P3(0, 1, 2));
}

TEST_CASE("malformed invariant JSON is a FormatError") {
  CHECK(throws_kind(ErrorKind::FormatError, [] { InvariantSet::from_json(nlohmann::json::parse(R"({"labels":["a"]})")); }));
  std::mt19937_64 rng(14);
  std::vector<StateVector> s;
  for (int i = 0; i < 3; ++i) s.push_back(random_state(rng, 3));
  auto j = InvariantSet::from_states(s).to_json();
  j["three_point"][0]["re"] = 5.0;  // breaks the modulus identity
  CHECK(throws_kind(ErrorKind::FormatError, [&] { InvariantSet::from_json(j); }));
}
