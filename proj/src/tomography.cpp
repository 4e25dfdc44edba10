#include "qgeom/tomography.hpp"

#include <cmath>
#include <sstream>

namespace qgeom {

namespace {

constexpr double kPhaseFloor = 1e-10;  // |P3| below this carries no usable phase

bool anchor_ok(const InvariantSet& inv, int a) {
  for (int j = 0; j < inv.size(); ++j)
    if (inv.P2(a, j) <= tol().near_orthogonal) return false;
  return true;
}

}  // namespace

GramMatrix gram_from_invariants(const InvariantSet& inv, std::optional<int> anchor) {
  const int n = inv.size();
  if (n == 0) throw Error(ErrorKind::EmptyPointList, "empty invariant set");
  int a = -1;
  if (anchor) {
    if (*anchor < 0 || *anchor >= n) throw Error(ErrorKind::InvalidArgument, "anchor out of range");
    if (!anchor_ok(inv, *anchor))
      throw Error(ErrorKind::OrthogonalAnchor, "anchor is orthogonal to some point");
    a = *anchor;
  } else {
    for (int c = 0; c < n && a < 0; ++c)
      if (anchor_ok(inv, c)) a = c;
    if (a < 0) throw Error(ErrorKind::OrthogonalAnchor, "every candidate anchor is orthogonal to some point");
  }

  GramMatrix G{CMat::Identity(n, n), a};
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      const double r = std::sqrt(std::max(inv.P2(i, j), 0.0));
      cplx hij;
      if (i == a || j == a) {
        hij = r;
      } else {
        const cplx p3 = inv.P3(a, i, j);
        hij = std::abs(p3) > 0.0 ? r * p3 / std::abs(p3) : cplx(r, 0.0);
      }
      G.h(i, j) = hij;
      G.h(j, i) = std::conj(hij);
    }

  double worst = 0.0;
  int wi = 0, wj = 0, wk = 0;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      for (int k = j + 1; k < n; ++k) {
        const cplx p3 = inv.P3(i, j, k);
        if (std::abs(p3) <= kPhaseFloor) continue;
        const cplx c = G.h(i, j) * G.h(j, k) * G.h(k, i);
        const double r = std::abs(wrap_angle(std::arg(c) - std::arg(p3)));
        if (r > worst) {
          worst = r;
          wi = i, wj = j, wk = k;
        }
      }
  if (worst > tol().cocycle) {
    std::ostringstream os;
    os << "cocycle condition violated by " << worst << " at (" << wi << "," << wj << "," << wk << ")";
    throw Error(ErrorKind::InconsistentInvariants, os.str());
  }
  return G;
}

ReconstructionResult states_from_gram(const GramMatrix& G, double rank_tol) {
  const int n = static_cast<int>(G.h.rows());
  if (n == 0 || G.h.cols() != n) throw Error(ErrorKind::SizeMismatch, "Gram matrix must be square and nonempty");
  const CMat herm = (G.h + G.h.adjoint()) / 2.0;
  Eigen::SelfAdjointEigenSolver<CMat> es(herm);
  const RVec& lam = es.eigenvalues();  // ascending
  const double lmax = lam(n - 1);
  if (!(lmax > 0)) throw Error(ErrorKind::NotPSD, "Gram matrix has no positive eigenvalue");
  if (lam(0) < -tol().psd * lmax) {
    std::ostringstream os;
    os << "Gram matrix not positive semidefinite: lambda_min/lambda_max = " << lam(0) / lmax;
    throw Error(ErrorKind::NotPSD, os.str());
  }
  std::vector<int> keep;
  for (int k = n - 1; k >= 0; --k)
    if (lam(k) > rank_tol * lmax) keep.push_back(k);

  ReconstructionResult res;
  res.rank = static_cast<int>(keep.size());
  const CMat& V = es.eigenvectors();
  for (int j = 0; j < n; ++j) {
    // rank 1 still needs a ray in C^2
    CVec x = CVec::Zero(std::max(res.rank, 2));
    for (int c = 0; c < res.rank; ++c) x(c) = std::sqrt(lam(keep[c])) * std::conj(V(j, keep[c]));
    res.states.push_back(normalize(x));
  }
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      res.residual_two_point =
          std::max(res.residual_two_point, std::abs(overlap(res.states[i], res.states[j]) - G.h(i, j)));
  return res;
}

std::pair<double, double> verify_reconstruction(const InvariantSet& original, const ReconstructionResult& rec) {
  const int n = original.size();
  if (static_cast<int>(rec.states.size()) != n)
    throw Error(ErrorKind::SizeMismatch, "reconstruction has a different number of states");
  const InvariantSet got = InvariantSet::from_states(rec.states);
  double d2 = 0.0, dphi = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) d2 = std::max(d2, std::abs(got.P2(i, j) - original.P2(i, j)));
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      for (int k = j + 1; k < n; ++k) {
        const cplx a = original.P3(i, j, k), b = got.P3(i, j, k);
        if (std::abs(a) <= kPhaseFloor && std::abs(b) <= kPhaseFloor) continue;
        dphi = std::max(dphi, std::abs(wrap_angle(std::arg(b) - std::arg(a))));
      }
  return {d2, dphi};
}

ReconstructionResult reconstruct(const InvariantSet& inv, std::optional<int> anchor) {
  ReconstructionResult r = states_from_gram(gram_from_invariants(inv, anchor), tol().rank);
  const auto [d2, dphi] = verify_reconstruction(inv, r);
  r.residual_two_point = d2;
  r.residual_three_point = dphi;
  return r;
}

nlohmann::json states_to_json(const std::vector<StateVector>& states) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& s : states) {
    nlohmann::json v = nlohmann::json::array();
    for (int i = 0; i < s.dim(); ++i) v.push_back({s[i].real(), s[i].imag()});
    out.push_back(v);
  }
  return out;
}

std::vector<StateVector> states_from_json(const nlohmann::json& j) {
  try {
    if (!j.is_array()) throw Error(ErrorKind::FormatError, "states must be a JSON array");
    std::vector<StateVector> out;
    for (const auto& v : j) {
      if (!v.is_array() || v.empty()) throw Error(ErrorKind::FormatError, "each state must be a nonempty array");
      CVec a(static_cast<int>(v.size()));
      for (size_t i = 0; i < v.size(); ++i) {
        const auto pair = v[i].get<std::vector<double>>();
        if (pair.size() != 2) throw Error(ErrorKind::FormatError, "amplitudes are [re, im] pairs");
        a(static_cast<int>(i)) = cplx(pair[0], pair[1]);
      }
      out.push_back(normalize(a));
    }
    return out;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::FormatError, std::string("states JSON: ") + e.what());
  }
}

}  // namespace qgeom
