#include "qgeom/common.hpp"

#include <array>
#include <cmath>

namespace qgeom {

std::string_view kind_name(ErrorKind k) {
  switch (k) {
    case ErrorKind::ZeroVector: return "ZeroVector";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::InvalidState: return "InvalidState";
    case ErrorKind::InvalidProjector: return "InvalidProjector";
    case ErrorKind::EmptyPointList: return "EmptyPointList";
    case ErrorKind::OrthogonalNeighbors: return "OrthogonalNeighbors";
    case ErrorKind::DegenerateTriangle: return "DegenerateTriangle";
    case ErrorKind::OrthogonalConsecutive: return "OrthogonalConsecutive";
    case ErrorKind::OrthogonalReference: return "OrthogonalReference";
    case ErrorKind::NearOrthogonal: return "NearOrthogonal";
    case ErrorKind::PathSingularity: return "PathSingularity";
    case ErrorKind::StepTooSmall: return "StepTooSmall";
    case ErrorKind::IllConditionedFit: return "IllConditionedFit";
    case ErrorKind::AntipodalPair: return "AntipodalPair";
    case ErrorKind::DisconnectedRegion: return "DisconnectedRegion";
    case ErrorKind::StationaryPoint: return "StationaryPoint";
    case ErrorKind::SingularLatitude: return "SingularLatitude";
    case ErrorKind::SpeedSaturation: return "SpeedSaturation";
    case ErrorKind::OrthogonalAnchor: return "OrthogonalAnchor";
    case ErrorKind::InconsistentInvariants: return "InconsistentInvariants";
    case ErrorKind::NotPSD: return "NotPSD";
    case ErrorKind::SizeMismatch: return "SizeMismatch";
    case ErrorKind::PoleCoordinates: return "PoleCoordinates";
    case ErrorKind::NonPeriodicGrid: return "NonPeriodicGrid";
    case ErrorKind::OverlapCollapse: return "OverlapCollapse";
    case ErrorKind::BandStructureViolation: return "BandStructureViolation";
    case ErrorKind::FormatError: return "FormatError";
    case ErrorKind::PeriodicityViolation: return "PeriodicityViolation";
    case ErrorKind::NormalizationViolation: return "NormalizationViolation";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::VectorsUnavailable: return "VectorsUnavailable";
    case ErrorKind::ContractViolation: return "ContractViolation";
  }
  return "Unknown";
}

ErrorClass error_class(ErrorKind k) {
  switch (k) {
    case ErrorKind::ZeroVector:
    case ErrorKind::DimensionMismatch:
    case ErrorKind::InvalidState:
    case ErrorKind::InvalidProjector:
    case ErrorKind::EmptyPointList:
    case ErrorKind::SizeMismatch:
    case ErrorKind::FormatError:
    case ErrorKind::PeriodicityViolation:
    case ErrorKind::NormalizationViolation:
    case ErrorKind::InvalidArgument:
    case ErrorKind::VectorsUnavailable:
    case ErrorKind::InconsistentInvariants:
    case ErrorKind::NonPeriodicGrid:
    case ErrorKind::BandStructureViolation:
    case ErrorKind::PoleCoordinates:
      return ErrorClass::Input;
    default:
      return ErrorClass::Numerical;
  }
}

namespace {
Tolerances& tol_storage() {
  static Tolerances t{};
  return t;
}
}  // namespace

const Tolerances& tol() { return tol_storage(); }

bool set_tolerance(const std::string& name, double value) {
  Tolerances& t = tol_storage();
  const std::array<std::pair<const char*, double*>, 14> fields{{
      {"unit_norm", &t.unit_norm},
      {"zero_norm", &t.zero_norm},
      {"hermitian", &t.hermitian},
      {"idempotent", &t.idempotent},
      {"unit_trace", &t.unit_trace},
      {"orthogonal", &t.orthogonal},
      {"near_orthogonal", &t.near_orthogonal},
      {"periodicity", &t.periodicity},
      {"modulus_identity", &t.modulus_identity},
      {"cocycle", &t.cocycle},
      {"psd", &t.psd},
      {"rank", &t.rank},
      {"overlap_collapse", &t.overlap_collapse},
      {"flat_band", &t.flat_band},
  }};
  for (const auto& [n, ptr] : fields)
    if (name == n) {
      *ptr = value;
      return true;
    }
  return false;
}

double permutation_residual(const RTensor3& t) {
  double r = 0.0;
  const int d = t.d;
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b)
      for (int c = 0; c < d; ++c) {
        const double x = t(a, b, c);
        r = std::max({r, std::abs(x - t(a, c, b)), std::abs(x - t(b, a, c)),
                      std::abs(x - t(b, c, a)), std::abs(x - t(c, a, b)),
                      std::abs(x - t(c, b, a))});
      }
  return r;
}

RTensor3 symmetrize(const RTensor3& t) {
  RTensor3 s(t.d);
  for (int a = 0; a < t.d; ++a)
    for (int b = 0; b < t.d; ++b)
      for (int c = 0; c < t.d; ++c)
        s(a, b, c) = (t(a, b, c) + t(a, c, b) + t(b, a, c) + t(b, c, a) + t(c, a, b) +
                      t(c, b, a)) /
                     6.0;
  return s;
}

std::vector<double> fd_weights(const std::vector<int>& offsets, int order) {
  const int m = static_cast<int>(offsets.size());
  if (order < 0 || order >= m)
    throw Error(ErrorKind::InvalidArgument, "fd_weights: need more points than the order");
  // Row i: sum_j w_j o_j^i = i! delta_{i,order}
  RMat V(m, m);
  RVec rhs = RVec::Zero(m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) V(i, j) = std::pow(static_cast<double>(offsets[j]), i);
  double fact = 1.0;
  for (int i = 2; i <= order; ++i) fact *= i;
  rhs(order) = fact;
  RVec w = V.fullPivLu().solve(rhs);
  return {w.data(), w.data() + m};
}

const Stencil& central_stencil(int order) {
  static const std::array<Stencil, 3> s = [] {
    std::array<Stencil, 3> out;
    const std::vector<int> five{-2, -1, 0, 1, 2};
    const std::vector<int> seven{-3, -2, -1, 0, 1, 2, 3};
    out[0] = {five, fd_weights(five, 1)};
    out[1] = {five, fd_weights(five, 2)};
    out[2] = {seven, fd_weights(seven, 3)};
    return out;
  }();
  if (order < 1 || order > 3) throw Error(ErrorKind::InvalidArgument, "stencil order must be 1..3");
  return s[static_cast<size_t>(order - 1)];
}

double wrap_angle(double a) {
  double r = std::remainder(a, 2.0 * kPi);
  if (r <= -kPi) r += 2.0 * kPi;
  return r;
}

}  // namespace qgeom
