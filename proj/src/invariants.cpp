#include "qgeom/invariants.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace qgeom {

cplx npoint(const StateFamily& family, const std::vector<RVec>& points) {
  if (points.empty()) throw Error(ErrorKind::EmptyPointList, "npoint needs at least one point");
  const size_t k = points.size();
  if (k == 1) return 1.0;
  cplx prod = 1.0;
  for (size_t i = 0; i < k; ++i) prod *= family.overlap(points[i], points[(i + 1) % k]);
  return prod;
}

cplx npoint(const std::vector<StateVector>& states) {
  if (states.empty()) throw Error(ErrorKind::EmptyPointList, "npoint needs at least one state");
  const size_t k = states.size();
  if (k == 1) return 1.0;
  cplx prod = 1.0;
  for (size_t i = 0; i < k; ++i) prod *= overlap(states[i], states[(i + 1) % k]);
  return prod;
}

cplx reduce_npoint(const StateFamily& family, const std::vector<RVec>& points, int drop_index) {
  const int k = static_cast<int>(points.size());
  if (k == 0) throw Error(ErrorKind::EmptyPointList, "reduce_npoint needs points");
  if (k < 3) throw Error(ErrorKind::InvalidArgument, "reduce_npoint needs at least 3 points");
  if (drop_index < 0 || drop_index >= k) throw Error(ErrorKind::InvalidArgument, "drop index out of range");
  const RVec& prev = points[static_cast<size_t>((drop_index + k - 1) % k)];
  const RVec& next = points[static_cast<size_t>((drop_index + 1) % k)];
  const double p2 = std::norm(family.overlap(prev, next));
  if (p2 <= tol().orthogonal)
    throw Error(ErrorKind::OrthogonalNeighbors, "neighbors of the dropped point are orthogonal");
  std::vector<RVec> rest;
  rest.reserve(static_cast<size_t>(k - 1));
  for (int i = 0; i < k; ++i)
    if (i != drop_index) rest.push_back(points[static_cast<size_t>(i)]);
  const cplx p3 = npoint(family, {prev, points[static_cast<size_t>(drop_index)], next});
  return npoint(family, rest) * p3 / p2;
}

Distances distances(const StateVector& x, const StateVector& y) {
  Distances r;
  r.P2 = std::clamp(std::norm(overlap(x, y)), 0.0, 1.0);
  r.D2 = 1.0 - r.P2;
  r.d = std::acos(std::sqrt(r.P2));
  return r;
}

Distances distances(const StateFamily& family, const RVec& x, const RVec& y) {
  Distances r;
  r.P2 = std::clamp(std::norm(family.overlap(x, y)), 0.0, 1.0);
  r.D2 = 1.0 - r.P2;
  r.d = std::acos(std::sqrt(r.P2));
  return r;
}

double bargmann_phase_of(cplx p3) {
  if (std::abs(p3) <= tol().orthogonal)
    throw Error(ErrorKind::DegenerateTriangle, "three-point function vanishes");
  double phi = -std::arg(p3);
  if (phi <= -kPi) phi += 2.0 * kPi;
  return phi;
}

double bargmann_phase(const StateFamily& family, const RVec& x, const RVec& y, const RVec& z) {
  return bargmann_phase_of(npoint(family, {x, y, z}));
}

double bargmann_phase(const StateVector& x, const StateVector& y, const StateVector& z) {
  return bargmann_phase_of(npoint({x, y, z}));
}

InvariantSet::InvariantSet(std::vector<std::string> labels, RMat two_point,
                           std::vector<cplx> three_point_canonical)
    : labels_(std::move(labels)), p2_(std::move(two_point)), p3_(std::move(three_point_canonical)) {
  const size_t n = labels_.size();
  if (p2_.rows() != static_cast<Eigen::Index>(n) || p2_.cols() != static_cast<Eigen::Index>(n))
    throw Error(ErrorKind::SizeMismatch, "two-point matrix does not match label count");
  const size_t expect = n < 3 ? 0 : n * (n - 1) * (n - 2) / 6;
  if (p3_.size() != expect) throw Error(ErrorKind::SizeMismatch, "three-point list has the wrong length");
}

InvariantSet InvariantSet::from_states(const std::vector<StateVector>& states,
                                       std::vector<std::string> labels) {
  const int n = static_cast<int>(states.size());
  if (labels.empty())
    for (int i = 0; i < n; ++i) labels.push_back("p" + std::to_string(i));
  if (static_cast<int>(labels.size()) != n) throw Error(ErrorKind::SizeMismatch, "label count differs from state count");
  CMat G(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) G(i, j) = overlap(states[static_cast<size_t>(i)], states[static_cast<size_t>(j)]);
  RMat p2(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) p2(i, j) = i == j ? 1.0 : std::min(std::norm(G(i, j)), 1.0);
  std::vector<cplx> p3;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      for (int k = j + 1; k < n; ++k) p3.push_back(G(i, j) * G(j, k) * G(k, i));
  return InvariantSet(std::move(labels), std::move(p2), std::move(p3));
}

size_t InvariantSet::canonical_index(int i, int j, int k) const {
  // Count triples (a<b<c) lexicographically before (i,j,k).
  const auto c2 = [](long m) { return m < 2 ? 0L : m * (m - 1) / 2; };
  const auto c3 = [](long m) { return m < 3 ? 0L : m * (m - 1) * (m - 2) / 6; };
  const long n = size();
  long idx = c3(n) - c3(n - i);
  idx += c2(n - i - 1) - c2(n - j);
  idx += k - j - 1;
  return static_cast<size_t>(idx);
}

cplx InvariantSet::P3(int i, int j, int k) const {
  const int n = size();
  if (i < 0 || j < 0 || k < 0 || i >= n || j >= n || k >= n)
    throw Error(ErrorKind::InvalidArgument, "three-point index out of range");
  if (i == j) return p2_(j, k);
  if (j == k) return p2_(k, i);
  if (k == i) return p2_(i, j);
  int a[3] = {i, j, k};
  int swaps = 0;
  for (int p = 0; p < 2; ++p)
    for (int q = 0; q < 2 - p; ++q)
      if (a[q] > a[q + 1]) {
        std::swap(a[q], a[q + 1]);
        ++swaps;
      }
  const cplx v = p3_[canonical_index(a[0], a[1], a[2])];
  return swaps % 2 == 0 ? v : std::conj(v);
}

void InvariantSet::set_P3(int i, int j, int k, cplx value) {
  int a[3] = {i, j, k};
  int swaps = 0;
  for (int p = 0; p < 2; ++p)
    for (int q = 0; q < 2 - p; ++q)
      if (a[q] > a[q + 1]) {
        std::swap(a[q], a[q + 1]);
        ++swaps;
      }
  if (a[0] == a[1] || a[1] == a[2]) throw Error(ErrorKind::InvalidArgument, "set_P3 needs distinct indices");
  p3_[canonical_index(a[0], a[1], a[2])] = swaps % 2 == 0 ? value : std::conj(value);
}

void InvariantSet::validate() const {
  const int n = size();
  for (int i = 0; i < n; ++i) {
    if (std::abs(p2_(i, i) - 1.0) > 1e-12) throw Error(ErrorKind::FormatError, "two-point diagonal must be 1");
    for (int j = 0; j < n; ++j) {
      if (std::abs(p2_(i, j) - p2_(j, i)) > 1e-12) throw Error(ErrorKind::FormatError, "two-point matrix not symmetric");
      if (p2_(i, j) < -1e-12 || p2_(i, j) > 1.0 + 1e-12)
        throw Error(ErrorKind::FormatError, "two-point value outside [0,1]");
    }
  }
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      for (int k = j + 1; k < n; ++k) {
        const double lhs = std::norm(P3(i, j, k));
        const double rhs = p2_(i, j) * p2_(j, k) * p2_(k, i);
        if (std::abs(lhs - rhs) > tol().modulus_identity) {
          std::ostringstream os;
          os << "modulus identity violated at (" << i << "," << j << "," << k << ")";
          throw Error(ErrorKind::FormatError, os.str());
        }
      }
}

nlohmann::json InvariantSet::to_json() const {
  nlohmann::json j;
  j["labels"] = labels_;
  std::vector<double> flat;
  const int n = size();
  flat.reserve(static_cast<size_t>(n * n));
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) flat.push_back(p2_(a, b));
  j["two_point"] = flat;
  nlohmann::json tp = nlohmann::json::array();
  for (int a = 0; a < n; ++a)
    for (int b = a + 1; b < n; ++b)
      for (int c = b + 1; c < n; ++c) {
        const cplx v = P3(a, b, c);
        tp.push_back({{"i", a}, {"j", b}, {"k", c}, {"re", v.real()}, {"im", v.imag()}});
      }
  j["three_point"] = tp;
  return j;
}

InvariantSet InvariantSet::from_json(const nlohmann::json& j) {
  try {
    if (!j.is_object() || !j.contains("labels") || !j.contains("two_point") || !j.contains("three_point"))
      throw Error(ErrorKind::FormatError, "invariant set needs labels, two_point, three_point");
    auto labels = j.at("labels").get<std::vector<std::string>>();
    auto flat = j.at("two_point").get<std::vector<double>>();
    const int n = static_cast<int>(labels.size());
    if (static_cast<int>(flat.size()) != n * n) throw Error(ErrorKind::FormatError, "two_point must have N^2 entries");
    RMat p2(n, n);
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) p2(a, b) = flat[static_cast<size_t>(a * n + b)];
    const size_t expect = n < 3 ? 0 : static_cast<size_t>(n) * (n - 1) * (n - 2) / 6;
    InvariantSet s(labels, p2, std::vector<cplx>(expect, cplx(0.0, 0.0)));
    std::vector<char> seen(expect, 0);
    for (const auto& rec : j.at("three_point")) {
      const int a = rec.at("i").get<int>(), b = rec.at("j").get<int>(), c = rec.at("k").get<int>();
      if (a < 0 || b < 0 || c < 0 || a >= n || b >= n || c >= n || a == b || b == c || a == c)
        throw Error(ErrorKind::FormatError, "three_point record has invalid indices");
      s.set_P3(a, b, c, cplx(rec.at("re").get<double>(), rec.at("im").get<double>()));
      int srt[3] = {a, b, c};
      std::sort(srt, srt + 3);
      seen[s.canonical_index(srt[0], srt[1], srt[2])] = 1;
    }
    if (std::find(seen.begin(), seen.end(), 0) != seen.end())
      throw Error(ErrorKind::FormatError, "three_point list is incomplete");
    s.validate();
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::FormatError, std::string("invariant set JSON: ") + e.what());
  }
}

}  // namespace qgeom
