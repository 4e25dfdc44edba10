#include "qgeom/core_states.hpp"

#include <cmath>
#include <sstream>

namespace qgeom {

StateVector::StateVector(CVec amplitudes) : a_(std::move(amplitudes)) {
  if (a_.size() < 2) throw Error(ErrorKind::InvalidState, "state needs at least 2 amplitudes");
  const double nrm = a_.norm();
  if (std::abs(nrm - 1.0) > tol().unit_norm) {
    std::ostringstream os;
    os << "state not normalized (norm " << nrm << ")";
    throw Error(ErrorKind::InvalidState, os.str());
  }
}

StateVector normalize(const CVec& raw) {
  if (raw.size() < 2) throw Error(ErrorKind::InvalidState, "state needs at least 2 amplitudes");
  const double nrm = raw.norm();
  if (!(nrm > tol().zero_norm)) throw Error(ErrorKind::ZeroVector, "cannot normalize a zero vector");
  return StateVector(raw / nrm);
}

StateVector normalize(std::initializer_list<cplx> raw) {
  CVec v(static_cast<Eigen::Index>(raw.size()));
  Eigen::Index i = 0;
  for (const cplx& c : raw) v(i++) = c;
  return normalize(v);
}

Projector::Projector(CMat m) : m_(std::move(m)) {
  if (m_.rows() != m_.cols()) throw Error(ErrorKind::InvalidProjector, "projector must be square");
  if ((m_ - m_.adjoint()).norm() > tol().hermitian)
    throw Error(ErrorKind::InvalidProjector, "projector not Hermitian");
  if ((m_ * m_ - m_).norm() > tol().idempotent)
    throw Error(ErrorKind::InvalidProjector, "projector not idempotent");
  if (std::abs(m_.trace() - 1.0) > tol().unit_trace)
    throw Error(ErrorKind::InvalidProjector, "projector trace differs from 1");
}

Projector projector_of(const StateVector& s) {
  return Projector(s.amplitudes() * s.amplitudes().adjoint());
}

cplx overlap(const StateVector& a, const StateVector& b) {
  if (a.dim() != b.dim()) throw Error(ErrorKind::DimensionMismatch, "overlap of states of different dimension");
  return a.amplitudes().dot(b.amplitudes());  // conjugates the first argument
}

StateFamily StateFamily::from_vectors(int param_dim, int proj_dim, Evaluator eval,
                                      std::optional<RVec> periods) {
  if (param_dim < 1 || proj_dim < 1) throw Error(ErrorKind::InvalidArgument, "family dimensions must be positive");
  if (periods && periods->size() != param_dim)
    throw Error(ErrorKind::InvalidArgument, "periods must have one entry per parameter");
  StateFamily f;
  f.d_ = param_dim;
  f.n_ = proj_dim;
  f.eval_ = std::move(eval);
  f.periods_ = std::move(periods);
  return f;
}

StateFamily StateFamily::from_kernel(int param_dim, Kernel kernel, std::optional<RVec> periods) {
  if (param_dim < 1) throw Error(ErrorKind::InvalidArgument, "family dimension must be positive");
  StateFamily f;
  f.d_ = param_dim;
  f.n_ = -1;
  f.kernel_ = std::move(kernel);
  f.periods_ = std::move(periods);
  return f;
}

StateFamily StateFamily::with_gradient(Gradient grad) const {
  StateFamily f = *this;
  f.grad_ = std::move(grad);
  return f;
}

StateFamily StateFamily::with_chart_guard(ChartGuard guard) const {
  StateFamily f = *this;
  f.guard_ = std::move(guard);
  return f;
}

StateVector StateFamily::state(const RVec& x) const {
  if (!eval_) throw Error(ErrorKind::VectorsUnavailable, "kernel-backed family has no vector representation");
  if (x.size() != d_) throw Error(ErrorKind::DimensionMismatch, "parameter dimension mismatch");
  CVec v = eval_(x);
  if (v.size() != n_ + 1) throw Error(ErrorKind::DimensionMismatch, "evaluator output has the wrong dimension");
  return normalize(v);
}

cplx StateFamily::overlap(const RVec& x, const RVec& y) const {
  if (kernel_) return kernel_(x, y);
  return qgeom::overlap(state(x), state(y));
}

std::vector<CVec> StateFamily::gradient(const RVec& x) const {
  if (!grad_) throw Error(ErrorKind::InvalidArgument, "family has no analytic gradient");
  check_derivative_point(x);
  return grad_(x);
}

void StateFamily::check_derivative_point(const RVec& x) const {
  if (guard_) guard_(x);
}

double StateFamily::periodicity_residual(const RVec& x) const {
  if (!periods_) return 0.0;
  double r = 0.0;
  for (int a = 0; a < d_; ++a) {
    RVec y = x;
    y(a) += (*periods_)(a);
    r = std::max(r, std::abs(std::norm(overlap(x, y)) - 1.0));
  }
  return r;
}

StateFamily StateFamily::redressed(std::function<double(const RVec&)> phase) const {
  StateFamily f = *this;
  f.grad_ = nullptr;
  if (eval_) {
    Evaluator base = eval_;
    f.eval_ = [base, phase](const RVec& x) -> CVec {
      return base(x) * std::polar(1.0, phase(x));
    };
  } else {
    Kernel base = kernel_;
    f.kernel_ = [base, phase](const RVec& x, const RVec& y) {
      return base(x, y) * std::polar(1.0, phase(y) - phase(x));
    };
  }
  return f;
}

RVec vec2(double a, double b) {
  RVec v(2);
  v << a, b;
  return v;
}

}  // namespace qgeom
