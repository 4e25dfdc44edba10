#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "qgeom/core_states.hpp"

namespace qgeom {

// States of one band on a periodic grid; node i_a sits at k_a = i_a L_a / N_a.
struct BZGrid {
  int d = 0;
  std::vector<int> sizes;
  RVec periods;
  int n = 0;  // projective dimension
  int band_index = 0;
  std::vector<StateVector> states;    // row-major, first index slowest
  std::optional<StateFamily> family;  // absent for grids loaded from file

  size_t count() const { return states.size(); }
  size_t flat(const std::vector<int>& idx) const;  // indices taken mod N_a
  std::vector<int> unflat(size_t i) const;
  RVec k_at(const std::vector<int>& idx) const;
  const StateVector& at(const std::vector<int>& idx) const { return states[flat(idx)]; }
};

// Throws NonPeriodicGrid unless the family is periodic (projectors) in every direction.
BZGrid make_grid(const StateFamily& family, std::vector<int> sizes, int band_index = 0);

struct Polarization {
  RVec value;    // per direction, in [-quantum/2, quantum/2)
  RVec quantum;  // 2 pi / L_a (lattice constant for the default period 2 pi)
};
// Zak phases from Wilson lines, averaged over transverse lines.
Polarization average_polarization(const BZGrid& grid);

// mean_k log <u_k|u_{k+q}> over the grid. k+q is re-evaluated from the family;
// a grid without family accepts only q on the grid lattice.
cplx log_generating_function(const BZGrid& grid, const RVec& q);

struct CumulantReport {
  int order = 0;
  int d = 0;
  // Row-major rank-`order` tensors; kappa_n = i^n d^n log C at q = 0.
  std::vector<double> generating_function;
  // Order 1: Wilson-line polarization; 2: mean g; 3: -(1/2) mean T. Empty without a family (orders 2, 3).
  std::vector<double> q_integral;
  double symmetry_residual = 0.0;
  double quantum = 0.0;  // order 1 only, values reported mod this (per direction 2pi/L_0)
  double at(const std::vector<double>& v, const std::vector<int>& idx) const;
};

CumulantReport cumulant(const BZGrid& grid, int order, double dq = 1e-2);

// Integrands of sigma_ab(q) at k (single occupied flat band, h = 1 - P).
// i[tr(P(k) d_b P(k-q/2) d_a P(k-q/2)) - tr(P(k) d_a P(k+q/2) d_b P(k+q/2))]
CMat sigma_integrand_projector(const StateFamily& family, const RVec& k, const RVec& q);
// The same with k shifted in each term: i[tr(P(k+q/2) d_b P d_a P) - tr(P(k-q/2) d_a P d_b P)] at k.
CMat sigma_integrand_projector_shifted(const StateFamily& family, const RVec& k, const RVec& q);
// i[P(k,k+q/2)(A_a conj(A_b) + conj(Q_ab)) - P(k,k-q/2)(conj(A_a) A_b + Q_ab)],
// A = calA^{k +/- q/2}(k), Q = <d_a u|(1-P)|d_b u>.
CMat sigma_integrand_A(const StateFamily& family, const RVec& k, const RVec& q);

using HamiltonianFn = std::function<CMat(const RVec&)>;

// Throws BandStructureViolation unless the spectrum of H(k) is {0, 1, ..., 1} and the grid
// state spans the zero eigenspace, at every node.
void check_flat_band(const BZGrid& grid, const HamiltonianFn& H);

struct ConductivityResult {
  RVec q;
  CMat sigma;              // mean of the calA-form integrand
  CMat sigma_projector;    // mean of the unshifted projector form
  double pointwise_residual = 0.0;  // max |calA-form - shifted projector form|
};

// Pointwise contract above 1e-8 throws ContractViolation.
std::vector<ConductivityResult> conductivity_q(const BZGrid& grid, const std::vector<RVec>& qs,
                                               const HamiltonianFn& H);

// mean omega_xy (1 - g_xx q^2 / 2) for q along x.
double sigma_xy_expansion(const BZGrid& grid, double q);
// mean[omega_ab - (omega_ab g_cd + g_ac omega_bd + omega_ca g_bd) q^c q^d / 4]
RMat sigma_expansion_tensor(const BZGrid& grid, const RVec& q);

enum class Payload { Json, Binary };
// First line: JSON header {d, sizes, n, band_index, periods, payload}. Then
// (N_a + 1) nodes per axis (closure included), row-major, each node n+1
// amplitudes: a JSON array of [re, im] pairs, or little-endian float64 re, im.
void save_bloch_grid(const BZGrid& grid, const std::string& path, Payload payload = Payload::Binary);
BZGrid load_bloch_grid(const std::string& path);

}  // namespace qgeom
