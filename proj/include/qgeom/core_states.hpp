#pragma once

#include <functional>
#include <initializer_list>
#include <optional>
#include <string>

#include "qgeom/common.hpp"

namespace qgeom {

// Unit vector in C^{n+1}; a representative of a point of CP^n.
class StateVector {
 public:
  StateVector() = default;
  explicit StateVector(CVec amplitudes);  // throws InvalidState unless unit norm

  const CVec& amplitudes() const { return a_; }
  int dim() const { return static_cast<int>(a_.size()); }
  int proj_dim() const { return dim() - 1; }
  cplx operator[](int i) const { return a_(i); }

 private:
  CVec a_;
};

StateVector normalize(const CVec& raw);
StateVector normalize(std::initializer_list<cplx> raw);

class Projector {
 public:
  explicit Projector(CMat m);  // validates Hermitian, idempotent, unit trace
  const CMat& matrix() const { return m_; }

 private:
  CMat m_;
};

Projector projector_of(const StateVector& s);
cplx overlap(const StateVector& a, const StateVector& b);

// A smooth map from a d-dimensional parameter space into CP^n. Either
// vector-backed (an evaluator returning amplitudes) or kernel-backed (only
// the overlap <psi(x)|psi(y)> is available, e.g. the lowest Landau level).
class StateFamily {
 public:
  using Evaluator = std::function<CVec(const RVec&)>;
  using Gradient = std::function<std::vector<CVec>(const RVec&)>;
  using Kernel = std::function<cplx(const RVec&, const RVec&)>;
  using ChartGuard = std::function<void(const RVec&)>;

  static StateFamily from_vectors(int param_dim, int proj_dim, Evaluator eval,
                                  std::optional<RVec> periods = std::nullopt);
  static StateFamily from_kernel(int param_dim, Kernel kernel,
                                 std::optional<RVec> periods = std::nullopt);

  // Gradient of the *normalized* evaluator output, in the evaluator's gauge.
  StateFamily with_gradient(Gradient grad) const;
  // Called before any derivative request; throws on chart poles.
  StateFamily with_chart_guard(ChartGuard guard) const;

  int param_dim() const { return d_; }
  int proj_dim() const { return n_; }  // -1 for kernel families
  bool has_vectors() const { return static_cast<bool>(eval_); }
  bool has_gradient() const { return static_cast<bool>(grad_); }
  const std::optional<RVec>& periods() const { return periods_; }

  StateVector state(const RVec& x) const;
  cplx overlap(const RVec& x, const RVec& y) const;
  std::vector<CVec> gradient(const RVec& x) const;
  void check_derivative_point(const RVec& x) const;

  // max over periodic directions of |P2(x, x + L_a e_a) - 1|
  double periodicity_residual(const RVec& x) const;

  // The same family multiplied by exp(i phase(x)); invariants must not change.
  StateFamily redressed(std::function<double(const RVec&)> phase) const;

 private:
  int d_ = 0;
  int n_ = -1;
  Evaluator eval_;
  Kernel kernel_;
  Gradient grad_;
  ChartGuard guard_;
  std::optional<RVec> periods_;
};

RVec vec2(double a, double b);

}  // namespace qgeom
