#pragma once

#include <Eigen/Dense>
#include <complex>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace qgeom {

using cplx = std::complex<double>;
using CVec = Eigen::VectorXcd;
using CMat = Eigen::MatrixXcd;
using RVec = Eigen::VectorXd;
using RMat = Eigen::MatrixXd;

inline constexpr double kPi = 3.14159265358979323846;

enum class ErrorKind {
  ZeroVector,
  DimensionMismatch,
  InvalidState,
  InvalidProjector,
  EmptyPointList,
  OrthogonalNeighbors,
  DegenerateTriangle,
  OrthogonalConsecutive,
  OrthogonalReference,
  NearOrthogonal,
  PathSingularity,
  StepTooSmall,
  IllConditionedFit,
  AntipodalPair,
  DisconnectedRegion,
  StationaryPoint,
  SingularLatitude,
  SpeedSaturation,
  OrthogonalAnchor,
  InconsistentInvariants,
  NotPSD,
  SizeMismatch,
  PoleCoordinates,
  NonPeriodicGrid,
  OverlapCollapse,
  BandStructureViolation,
  FormatError,
  PeriodicityViolation,
  NormalizationViolation,
  InvalidArgument,
  VectorsUnavailable,
  ContractViolation,
};

// Input errors map to CLI exit code 2, numerical ones to 3.
enum class ErrorClass { Input, Numerical };

std::string_view kind_name(ErrorKind k);
ErrorClass error_class(ErrorKind k);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const { return kind_; }
  std::string_view name() const { return kind_name(kind_); }

 private:
  ErrorKind kind_;
};

// Shared numerical thresholds. Everything that compares against a fixed
// tolerance reads it from here.
struct Tolerances {
  double unit_norm = 1e-12;
  double zero_norm = 1e-14;
  double hermitian = 1e-12;
  double idempotent = 1e-10;
  double unit_trace = 1e-12;
  double orthogonal = 1e-12;        // |P3| or P2 below this: degenerate
  double near_orthogonal = 1e-10;   // P2 below this: gauge singular
  double periodicity = 1e-10;
  double modulus_identity = 1e-10;
  double cocycle = 1e-6;
  double psd = 1e-6;
  double rank = 1e-8;
  double overlap_collapse = 0.1;
  double flat_band = 1e-10;
};

const Tolerances& tol();
// Process-wide overrides (CLI --tol). Returns false for an unknown name.
bool set_tolerance(const std::string& name, double value);

// Rank-3 tensor over a d-dimensional index space, row-major (a,b,c).
template <class T>
struct Tensor3 {
  int d = 0;
  std::vector<T> v;
  Tensor3() = default;
  explicit Tensor3(int dim) : d(dim), v(static_cast<size_t>(dim * dim * dim), T{}) {}
  T& operator()(int a, int b, int c) { return v[static_cast<size_t>((a * d + b) * d + c)]; }
  const T& operator()(int a, int b, int c) const {
    return v[static_cast<size_t>((a * d + b) * d + c)];
  }
  // T(x, y, z) = T_abc x^a y^b z^c
  T contract(const RVec& x, const RVec& y, const RVec& z) const {
    T s{};
    for (int a = 0; a < d; ++a)
      for (int b = 0; b < d; ++b)
        for (int c = 0; c < d; ++c) s += (*this)(a, b, c) * x(a) * y(b) * z(c);
    return s;
  }
};
using RTensor3 = Tensor3<double>;
using CTensor3 = Tensor3<cplx>;

// Maximum deviation of a rank-3 tensor from full permutation symmetry.
double permutation_residual(const RTensor3& t);
RTensor3 symmetrize(const RTensor3& t);

// Finite-difference weights for the given derivative order at 0 on the
// integer offsets provided (in units of the step).
std::vector<double> fd_weights(const std::vector<int>& offsets, int order);

// Central stencils accurate to O(h^4): offsets and weights per order 1..3.
struct Stencil {
  std::vector<int> offsets;
  std::vector<double> weights;
};
const Stencil& central_stencil(int order);

// Wrap an angle to (-pi, pi].
double wrap_angle(double a);

}  // namespace qgeom
