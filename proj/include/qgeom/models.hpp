#pragma once

#include <map>
#include <string>

#include "qgeom/core_states.hpp"
#include "qgeom/extrinsic.hpp"

namespace qgeom {

namespace spin_half {
// (1, -zeta)/sqrt(1+|zeta|^2), x = (Re zeta, Im zeta)
StateFamily family();
RVec point(cplx zeta);
// Phi = i log[(1 + z1* z2)(1 + z2* z3)(1 + z3* z1) / |...|]
double phi_closed(cplx z1, cplx z2, cplx z3);
// A^0(x + iy) = (y, -x)/(1 + x^2 + y^2)
RVec a_origin(const RVec& r);
// A^{r1}(r2) = -eps.r2/(1 + r2^2) + eps.(r1 + r1^2 r2)/(1 + 2 r1.r2 + r1^2 r2^2),
// eps.(x, y) = (-y, x)
RVec a_general(const RVec& r1, const RVec& r2);
// Pole of A^{r1}: the antipode -1/conj(z1).
cplx a_general_pole(cplx z1);
}  // namespace spin_half

namespace spin_one {
// (e^{2i phi} cos^2(theta/2), e^{i phi} sin(theta)/sqrt2, sin^2(theta/2)), x = (theta, phi)
StateFamily family();
CMat hamiltonian(double theta, double phi, double B = 1.0);
RMat metric(double theta);    // diag(1/2, sin^2 theta / 2)
double omega_theta_phi(double theta);  // -sin theta
double l_ext(double l_int);   // arccos[cos^2(l_int / sqrt2)]
// Triangle (0,0), (theta,0), (theta,phi): tan(alpha/2) = sin phi / (cot^2(theta/2) + cos phi)
double alpha(double theta, double phi);
}  // namespace spin_one

namespace veronese {
// Bottom band of h(k) = 1 - |psi><psi| with psi = u_n(k_x) (x) u_m(k_y),
// u_n(k) = (cos(k/2), sin(k/2) e^{i n k}), components ordered (1, f, g, fg).
StateFamily family(int n, int m);
CMat hamiltonian(int n, int m, const RVec& k);        // 1 - psi psi^dagger
CMat projector_table(int n, int m, const RVec& k);    // the explicit 4x4 table
RMat metric(int n, int m, const RVec& k);             // (1 + n^2 sin^2 k)/4 per axis
RMat metric_reference(int n, int m, const RVec& k);   // 1/(1 + n^2 sin^2 k) per axis
double t_xxx(int n, double kx);                       // n cos k (2 + n^2 sin^2 k)/2
double gamma_xxx_reference(int n, double kx);         // half the k-derivative of metric_reference
}  // namespace veronese

namespace torus_cp3 {
// psi_{f,g} ~ (1, f(x), g(y), f(x) g(y)) from two closed CP^1 curves.
StateFamily family(const ChartCurve& f, const ChartCurve& g);
// Berry phase of one factor along its period: -int Im<u|u'>/<u|u> dx.
double zak_phase(const ChartCurve& f, int samples = 4096);
// T_xxx = s^2 Im[2f''/f' - 4 conj(f) f'/(1+|f|^2)], s = |f'|/(1+|f|^2).
double t_xxx(const ChartCurve& f, double x);
// Same family with both factors reparameterized to unit speed.
StateFamily unit_speed_family(const ChartCurve& f, const ChartCurve& g);
}  // namespace torus_cp3

namespace lll {
// Kernel <u_k|u_q> = exp(-|k-q|^2/4B + i(-k_x q_y + q_x k_y)/2B)
StateFamily family(double B);
cplx overlap(double B, const RVec& k, const RVec& q);
double d2(double B, const RVec& k, const RVec& p);  // 1 - exp(-|k-p|^2/2B)
double eps2(const RVec& a, const RVec& b);          // a_x b_y - a_y b_x
double phi_closed(double B, const RVec& k, const RVec& q, const RVec& p);
double metric_reference(double B);                  // g_ij = delta_ij / B
}  // namespace lll

namespace qwz {
// Lower band of d(k).sigma, d = (sin k_x, sin k_y, M + cos k_x + cos k_y).
StateFamily family(double M);
}  // namespace qwz

// z(t) = sin t e^{it}
ChartCurve figure8();
// z(t) = r e^{it}
ChartCurve chart_circle(double r);

struct ModelInstance {
  std::string name;
  std::map<std::string, double> params;
  StateFamily family;
  RVec lo, hi;  // default sampling box
  std::function<CMat(const RVec&)> hamiltonian;  // set for flat-band models
};

// Registry: spin_half, spin_one, veronese (n, m), lll (B), qwz (M).
ModelInstance make_model(const std::string& name, const std::map<std::string, std::string>& params);
std::vector<std::string> model_names();

}  // namespace qgeom
