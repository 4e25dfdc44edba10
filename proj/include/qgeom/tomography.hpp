#pragma once

#include <json.hpp>
#include <optional>
#include <utility>
#include <vector>

#include "qgeom/invariants.hpp"

namespace qgeom {

// h_ij = <x_i|x_j> in the gauge where h_{anchor,i} is real and nonnegative.
struct GramMatrix {
  CMat h;
  int anchor = 0;
};

struct ReconstructionResult {
  std::vector<StateVector> states;
  double residual_two_point = 0.0;    // vs the input invariants (or h)
  double residual_three_point = 0.0;  // max |dPhi|, 0 until verified
  int rank = 0;
};

// Without an explicit anchor, index 0 is tried first and the first index
// not orthogonal to any point is used.
GramMatrix gram_from_invariants(const InvariantSet& inv, std::optional<int> anchor = std::nullopt);

ReconstructionResult states_from_gram(const GramMatrix& h, double rank_tol = 1e-8);

// (max |dP2|, max |dPhi|) over all pairs and triples with nonzero P3.
std::pair<double, double> verify_reconstruction(const InvariantSet& original,
                                                const ReconstructionResult& rec);

// gram_from_invariants + states_from_gram + verify_reconstruction.
ReconstructionResult reconstruct(const InvariantSet& inv, std::optional<int> anchor = std::nullopt);

// [[[re, im], ...], ...], one inner array per state.
nlohmann::json states_to_json(const std::vector<StateVector>& states);
std::vector<StateVector> states_from_json(const nlohmann::json& j);

}  // namespace qgeom
