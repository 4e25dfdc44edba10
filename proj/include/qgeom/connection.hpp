#pragma once

#include <functional>
#include <vector>

#include "qgeom/core_states.hpp"

namespace qgeom {

using ParamPath = std::function<RVec(double)>;  // t in [0,1]

// Closed loop x_1 ... x_k with implicit closure x_{k+1} = x_1.
struct LoopSample {
  std::vector<RVec> points;
};

LoopSample make_loop(std::vector<RVec> points);
// k points on the circle center + r (cos t, sin t) in the (a, b) parameter plane.
LoopSample circle_loop(const RVec& center, double radius, int k, int axis_a = 0, int axis_b = 1);

// -sum_i arg <psi_i|psi_{i+1}>, accumulated without modular reduction.
double berry_phase_overlap(const StateFamily& family, const LoopSample& loop);
// sum_i Phi(ref, x_i, x_{i+1}).
double berry_phase_triangles(const StateFamily& family, const LoopSample& loop, const RVec& ref);

// Loop integral of A^X along the straight segments of the loop polygon
// (4-point Gauss-Legendre per segment).
double berry_phase_connection(const StateFamily& family, const LoopSample& loop, const RVec& X);
// Loop integral of A^X along a smooth closed path c(t), t in [0, 1), by the
// periodic trapezoid rule on `nodes` points.
double berry_phase_connection(const StateFamily& family, const ParamPath& closed, const RVec& X,
                              int nodes = 1024);

struct ConnectionValue {
  RVec a;            // A^x_alpha(y) = d_z Phi(x, y, z)|_{z=y}
  RVec u;            // u^x_alpha(y) = d_y log cos d(x, y)
  CVec complexified; // calA = u - i a = d_z log P3(x, y, z)|_{z=y}
};

ConnectionValue connection_form(const StateFamily& family, const RVec& x, const RVec& y,
                                double h = 1e-4);

// || A^{X2}(y) - A^{X1}(y) - grad_y Phi(X2, X1, y) ||
double gauge_shift_check(const StateFamily& family, const RVec& X1, const RVec& X2, const RVec& y,
                         double h = 1e-4);

// Phi(x, y, z) recovered as the integral of A^z - A^x along a path x -> y
// (straight segment unless a path is given).
double phase_from_connection(const StateFamily& family, const RVec& x, const RVec& y,
                             const RVec& z, int resolution = 1024,
                             const ParamPath& path = nullptr);

// Berry curvature from the reference-point connection, in the library
// orientation: omega = -(d_a A^X_b - d_b A^X_a).
RMat curvature_from_connection(const StateFamily& family, const RVec& X, const RVec& y,
                               double h = 1e-3);

}  // namespace qgeom
