#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "qgeom/core_states.hpp"

namespace qgeom {

struct AmbientChartPoint {
  CVec z;  // affine coordinates, z_{n+1} = 1
};

struct AmbientGeometry {
  CMat g;      // g_{i jbar}
  CMat omega;  // omega_{i jbar}
};

// Fubini-Study metric and form on the affine chart.
AmbientGeometry ambient_geometry(const AmbientChartPoint& p);

// Geodesic t|a> + (1-t) e^{-i beta}|b>, beta = arg<a|b>, normalized.
StateVector ambient_geodesic(const StateVector& a, const StateVector& b, double t);

struct IntrinsicOptions {
  int resolution = 200;  // nodes per axis
  // Sampled box; defaults to the bounding box of x, y padded by half its span.
  std::optional<RVec> lo, hi;
  double pad = 0.5;
};

// Shortest path length in the quantum metric over a grid graph on M
// (d = 1 or 2), followed by path smoothing.
double intrinsic_distance(const StateFamily& family, const RVec& x, const RVec& y,
                          const IntrinsicOptions& opt = {});

// Hamilton-Jacobi series of the intrinsic squared distance to 4th order:
// L^2 = g zz + (1/2) dg zzz + (1/6)(ddg - (1/2) Gamma g^-1 Gamma) zzzz.
double intrinsic_distance_series(const StateFamily& family, const RVec& x, const RVec& z,
                                 double h = 1e-2);

// |K(z,z)|^2 for the second fundamental form of the image of M.
double second_fundamental_norm2(const StateFamily& family, const RVec& x, const RVec& z,
                                double h = 1e-3);

struct DeltaL2Check {
  std::vector<double> eps;
  std::vector<double> ratio;  // (d_N^2 - d_L^2) / eps^4
  double predicted = 0.0;     // |K(z,z)|^2 / 12
  double rel_error = 0.0;     // at the smallest eps, relative to max(|predicted|, 1e-12)
};

DeltaL2Check delta_L2_check(const StateFamily& family, const RVec& x, const RVec& z,
                            std::vector<double> eps = {0.08, 0.04, 0.02});

// Closed curve or arc in CP^1. `hom` is a homogeneous representative
// (a, b) with f = b / a; either may be supplied, the other is derived.
struct ChartCurve {
  std::function<cplx(double)> f;
  std::function<Eigen::Vector2cd(double)> hom;
  double period = 0.0;  // 0 for open arcs
  std::function<cplx(double)> df, ddf;  // optional analytic derivatives
};

ChartCurve chart_curve(std::function<cplx(double)> f, double period = 0.0);
ChartCurve homogeneous_curve(std::function<Eigen::Vector2cd(double)> hom, double period = 0.0);
StateFamily curve_family(const ChartCurve& c);

cplx curve_d1(const ChartCurve& c, double t, double h = 1e-3);
cplx curve_d2(const ChartCurve& c, double t, double h = 1e-3);
double curve_speed(const ChartCurve& c, double t);  // |f'| / (1+|f|^2)

struct CurveFrame {
  double t = 0.0;
  cplx f;
  cplx tangent;  // df/dtau at unit speed
  cplx normal;   // covariant acceleration n = nabla_tau f_tau
  double speed = 0.0;
};

CurveFrame curve_frame(const ChartCurve& c, double t);
// <n, f_tau>_g, zero for a correct frame.
double frame_orthogonality(const CurveFrame& fr);

// T at unit speed: (1/s) Im[2f''/f' - 4 conj(f) f'/(1+|f|^2)].
double curve_T(const ChartCurve& c, double t);
// T_ttt in the curve's own parameter: s^2 Im[...].
double curve_T_param(const ChartCurve& c, double t);
// Same quantity from uniformly sampled unit-speed f values (5-point stencils).
double curve_T_sampled(const std::vector<cplx>& f, double dt, size_t i);

// Reparameterization to unit speed by arc-length inversion.
class UnitSpeedMap {
 public:
  UnitSpeedMap(ChartCurve c, double t0, double t1, int table = 4096);
  double length() const { return length_; }
  double param_at(double s) const;  // t(s), |S(t(s)) - s| <= 1e-8
  ChartCurve curve() const;         // f(s), period = length for closed input

 private:
  double arc(double t) const;
  double param_at_wrapped(double s) const;
  ChartCurve c_;
  double t0_, t1_, length_ = 0.0;
  std::vector<double> ts_, ss_;
};

struct CurveSample {
  double t, theta, dtheta, phi;
  cplx f;
};

// Integrates theta'' = -T sqrt(1-theta'^2)/2 - 2(theta'^2-1) cot 2theta,
// phi' = 2 sqrt(1-theta'^2)/sin 2theta with RK4; f = tan(theta) e^{i phi}.
std::vector<CurveSample> reconstruct_curve(const std::function<double(double)>& T, double theta0,
                                           double dtheta0, double phi0, double t_end,
                                           double step = 1e-4);

struct SelfIntersection {
  double raw = 0.0;
  double normalized = 0.0;  // raw / 2pi
};

// Integral of eps_{mu nu} v^mu (nabla_v v)^nu / |v|^2 over a closed curve
// (total geodesic curvature), trapezoid rule on `samples` nodes.
SelfIntersection self_intersection(const ChartCurve& c, int samples = 4096);

}  // namespace qgeom
