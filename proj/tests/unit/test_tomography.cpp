#include <doctest.h>

#include "qgeom/tomography.hpp"
#include "test_util.hpp"

using namespace qgeom;
using namespace testutil;

namespace {
std::vector<StateVector> random_states(std::mt19937_64& rng, int n, int m) {
  std::vector<StateVector> s;
  for (int i = 0; i < n; ++i) s.push_back(random_state(rng, m));
  return s;
}
}  // namespace

TEST_CASE("identical states give the all-ones Gram matrix") {
  const StateVector a = normalize({cplx(0.6, 0.1), cplx(0.2, -0.7)});
  const InvariantSet inv = InvariantSet::from_states({a, a, a});
  const GramMatrix G = gram_from_invariants(inv);
  CHECK((G.h - CMat::Ones(3, 3)).cwiseAbs().maxCoeff() < 1e-14);
  CHECK(reconstruct(inv).rank == 1);
}

TEST_CASE("qubit Gram matrix in the anchor gauge") {
  const double s = 1 / std::sqrt(2.0);
  const InvariantSet inv = InvariantSet::from_states(
      {normalize({1.0, 0.0}), normalize({1.0, 1.0}), normalize({cplx(1, 0), cplx(0, 1)})});
  const GramMatrix G = gram_from_invariants(inv);
  CHECK(G.anchor == 0);
  CHECK(std::abs(G.h(0, 1) - s) < 1e-14);
  CHECK(std::abs(G.h(0, 2) - s) < 1e-14);
  CHECK(std::abs(G.h(1, 2) - cplx(0.5, 0.5)) < 1e-14);
  CHECK(std::abs(G.h(2, 1) - cplx(0.5, -0.5)) < 1e-14);
}

TEST_CASE("random round trips") {
  std::mt19937_64 rng(40);
  for (int t = 0; t < 40; ++t) {
    const int n = 2 + t % 7, m = 2 + t % 4;
    const auto s = random_states(rng, n, m);
    const InvariantSet inv = InvariantSet::from_states(s);
    const ReconstructionResult r = reconstruct(inv);
    CHECK(r.rank == std::min(n, m));
    CHECK(r.residual_two_point < 1e-10);
    CHECK(r.residual_three_point < 1e-10);
    // the reconstruction reproduces every invariant, including P3 moduli
    const InvariantSet back = InvariantSet::from_states(r.states);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) CHECK(std::abs(back.P3(i, j, k) - inv.P3(i, j, k)) < 1e-10);
  }
}

TEST_CASE("invariants are unchanged by a global unitary") {
  std::mt19937_64 rng(41);
  const auto s = random_states(rng, 5, 3);
  const CMat U = random_unitary(rng, 3);
  std::vector<StateVector> us;
  for (const auto& x : s) us.push_back(normalize(CVec(U * x.amplitudes())));
  const GramMatrix a = gram_from_invariants(InvariantSet::from_states(s));
  const GramMatrix b = gram_from_invariants(InvariantSet::from_states(us));
  CHECK((a.h - b.h).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("corrupted three-point data is rejected") {
  std::mt19937_64 rng(42);
  InvariantSet inv = InvariantSet::from_states(random_states(rng, 4, 3));
  inv.set_P3(1, 2, 3, inv.P3(1, 2, 3) * std::polar(1.0, 0.3));
  CHECK(throws_kind(ErrorKind::InconsistentInvariants, [&] { gram_from_invariants(inv, 0); }));
}

TEST_CASE("orthogonal anchors") {
  const InvariantSet inv =
      InvariantSet::from_states({normalize({1.0, 0.0}), normalize({0.0, 1.0}), normalize({1.0, 1.0})});
  CHECK(gram_from_invariants(inv).anchor == 2);
  CHECK(throws_kind(ErrorKind::OrthogonalAnchor, [&] { gram_from_invariants(inv, 0); }));
  const ReconstructionResult r = reconstruct(inv);
  CHECK(r.residual_two_point < 1e-12);
  CHECK(r.rank == 2);
  const InvariantSet bad =
      InvariantSet::from_states({normalize({1.0, 0.0}), normalize({0.0, 1.0})});
  CHECK(throws_kind(ErrorKind::OrthogonalAnchor, [&] { gram_from_invariants(bad); }));
}

TEST_CASE("Gram matrix errors") {
  GramMatrix g;
  g.h = CMat(3, 3);
  g.h << 1, 0.9, 0.9, 0.9, 1, -0.9, 0.9, -0.9, 1;
  CHECK(throws_kind(ErrorKind::NotPSD, [&] { states_from_gram(g); }));
  g.h = CMat(2, 3);
  CHECK(throws_kind(ErrorKind::SizeMismatch, [&] { states_from_gram(g); }));
  CHECK(throws_kind(ErrorKind::EmptyPointList, [] { gram_from_invariants(InvariantSet()); }));
}

TEST_CASE("states JSON round trip") {
  std::mt19937_64 rng(43);
  const auto s = random_states(rng, 3, 4);
  const auto back = states_from_json(nlohmann::json::parse(states_to_json(s).dump()));
  REQUIRE(back.size() == 3);
  for (size_t i = 0; i < 3; ++i) CHECK((back[i].amplitudes() - s[i].amplitudes()).norm() < 1e-15);
  CHECK(throws_kind(ErrorKind::FormatError, [] { states_from_json(nlohmann::json::parse("[[1, 2]]")); }));
  CHECK(throws_kind(ErrorKind::FormatError, [] { states_from_json(nlohmann::json::parse("{}")); }));
}
