#pragma once

#include <json.hpp>
#include <string>
#include <vector>

#include "qgeom/core_states.hpp"

namespace qgeom {

// tr[P(x_1) ... P(x_k)], evaluated as the cyclic product of overlaps.
cplx npoint(const StateFamily& family, const std::vector<RVec>& points);
cplx npoint(const std::vector<StateVector>& states);

// Same value as npoint, but with point `drop_index` removed and the
// corresponding three-point factor restored.
cplx reduce_npoint(const StateFamily& family, const std::vector<RVec>& points, int drop_index);

struct Distances {
  double P2 = 1.0;  // |<x|y>|^2
  double D2 = 0.0;  // 1 - P2
  double d = 0.0;   // geodesic distance arccos sqrt(P2)
};
Distances distances(const StateFamily& family, const RVec& x, const RVec& y);
Distances distances(const StateVector& x, const StateVector& y);

// Phi = -arg P3(x, y, z), principal branch.
double bargmann_phase(const StateFamily& family, const RVec& x, const RVec& y, const RVec& z);
double bargmann_phase(const StateVector& x, const StateVector& y, const StateVector& z);
double bargmann_phase_of(cplx p3);

class InvariantSet {
 public:
  InvariantSet() = default;
  InvariantSet(std::vector<std::string> labels, RMat two_point, std::vector<cplx> three_point_canonical);

  static InvariantSet from_states(const std::vector<StateVector>& states,
                                  std::vector<std::string> labels = {});

  int size() const { return static_cast<int>(labels_.size()); }
  const std::vector<std::string>& labels() const { return labels_; }
  const RMat& two_point() const { return p2_; }
  double P2(int i, int j) const { return p2_(i, j); }
  // Any index triple; odd permutations conjugate, repeated indices reduce to P2.
  cplx P3(int i, int j, int k) const;
  double Phi(int i, int j, int k) const { return bargmann_phase_of(P3(i, j, k)); }
  void set_P3(int i, int j, int k, cplx value);

  // Throws FormatError on violated structural invariants.
  void validate() const;

  nlohmann::json to_json() const;
  static InvariantSet from_json(const nlohmann::json& j);

 private:
  size_t canonical_index(int i, int j, int k) const;  // requires i<j<k
  std::vector<std::string> labels_;
  RMat p2_;
  std::vector<cplx> p3_;  // i<j<k in lexicographic order
};

}  // namespace qgeom
