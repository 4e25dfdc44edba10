#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "qgeom/core_states.hpp"

namespace qgeom {

// Q1 = tr[P dP dP] = g + (i/2) omega.
struct QGT {
  RMat g;
  RMat omega;
};

struct ConnectionTensors {
  RTensor3 gamma;        // Re Q2, symmetric in the last pair
  RTensor3 gamma_tilde;  // 2 Im Q2, symmetric in the last pair
  RTensor3 T;            // fully symmetric
  // omega^{a d} gamma_tilde_{d,bc}; absent when omega is singular.
  std::optional<RTensor3> gamma_tilde_raised;
};

// d^n/da^.. d^m/db^.. log <psi(a)|psi(b)> at a = b = x, with 4th-order
// tensor-product central stencils. `da`/`db` list the axes per slot.
cplx log_overlap_derivative(const StateFamily& family, const RVec& x, const std::vector<int>& da,
                            const std::vector<int>& db, double h);

CMat q1_tensor(const StateFamily& family, const RVec& x, double h = 1e-3);
// Q2_{abc} = tr[P d_a P d_b d_c P]
CTensor3 q2_tensor(const StateFamily& family, const RVec& x, double h = 2e-3);

QGT qgt(const StateFamily& family, const RVec& x, double h = 1e-3);

// domega[a](b, c) = d_a omega_bc
std::vector<RMat> omega_gradient(const StateFamily& family, const RVec& x, double h = 1e-2);
// Lower-index Christoffel symbols of the quantum metric, from differentiated g.
RTensor3 metric_christoffel(const StateFamily& family, const RVec& x, double h = 1e-2);
// m^{ae} t_{e,bc}; with m = g^-1 this gives Gamma^a_{bc}.
RTensor3 raise_first(const RMat& m, const RTensor3& t);

// Gamma and Gamma~ only (T left empty).
ConnectionTensors qgc(const StateFamily& family, const RVec& x, double h = 2e-3);
// T_abc = Gamma~_{c,ab} - (1/3)(d_b omega_ca + d_a omega_cb)
RTensor3 t_tensor(const StateFamily& family, const RVec& x, double h = 2e-3);
ConnectionTensors connection_tensors(const StateFamily& family, const RVec& x, double h = 2e-3);

// max |d_a omega_bc + Gamma~_{c,ba} - Gamma~_{b,ca}|
double symplectic_residual(const StateFamily& family, const RVec& x, double h = 2e-3);

// Rank-(n+1) tensor Q^(n)_{a b1..bn}, row-major with a first.
struct QTensor {
  int order = 0;
  int d = 0;
  std::vector<cplx> v;
  cplx at(const std::vector<int>& idx) const;
};

// Derivative coefficients of calA^{y+q}_a(y) in q, from a least-squares
// polynomial fit on a symmetric grid of q with spacing delta.
std::vector<QTensor> q_expansion(const StateFamily& family, const RVec& y, int order,
                                 double delta = 0.02);

// Holomorphic family psi ~ (1, f_1(y), ..., f_n(y)), y in C^m. Real
// coordinates are ordered (Re y_1, Im y_1, Re y_2, ...).
using HoloFunction = std::function<cplx(const CVec&)>;
struct HoloFamily {
  int m = 1;
  std::vector<HoloFunction> f;
};
// g_{j kbar} = d_j dbar_k log K, K = 1 + sum |f_i|^2.
CMat kaehler_hermitian_metric(const HoloFamily& fam, const CVec& y, double h = 1e-3);
QGT kaehler_qgt(const HoloFamily& fam, const CVec& y, double h = 1e-3);
StateFamily holo_state_family(const HoloFamily& fam);

struct ExpansionCheck {
  std::vector<double> eps;
  std::vector<double> exact;
  std::vector<double> predicted;
  std::vector<double> residual;
  double slope = 0.0;  // log-log slope of |residual| vs eps
};

double loglog_slope(const std::vector<double>& eps, const std::vector<double>& r);

enum class TriangleTerms { Leading, Full };

// Phi(x, x+a, x+b) = -(1/2) omega(a,b) - (1/6)[dw(a;a,b) + dw(b;a,b)]
//                    + (1/4)[T(a,a,b) - T(a,b,b)] + O(4)
double triangle_expansion(const RMat& omega, const std::vector<RMat>& domega, const RTensor3& T,
                          const RVec& a, const RVec& b, TriangleTerms terms = TriangleTerms::Full);
ExpansionCheck triangle_expansion_check(const StateFamily& family, const RVec& x, const RVec& z1,
                                        const RVec& z2, std::vector<double> eps = {0.04, 0.02, 0.01},
                                        TriangleTerms terms = TriangleTerms::Full);

// d^2(x, x+eps z) against g zz eps^2 + Gamma zzz eps^3. With `symmetric`,
// the exact side averages +z and -z and the cubic term is dropped.
ExpansionCheck distance_expansion_check(const StateFamily& family, const RVec& x, const RVec& z,
                                        std::vector<double> eps = {0.04, 0.02, 0.01},
                                        bool symmetric = false);

}  // namespace qgeom
