#include "qgeom/cli.hpp"

#include <CLI11.hpp>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <json.hpp>
#include <map>
#include <random>
#include <sstream>

#include "qgeom/band_obs.hpp"
#include "qgeom/connection.hpp"
#include "qgeom/extrinsic.hpp"
#include "qgeom/invariants.hpp"
#include "qgeom/local_geom.hpp"
#include "qgeom/models.hpp"
#include "qgeom/tomography.hpp"

namespace qgeom::cli {

namespace {

using nlohmann::json;

struct RunConfig {
  std::string command;
  std::string model = "spin_half";
  std::vector<std::string> params;
  std::string grid = "16x16";
  std::string out;
  std::string format = "csv";
  double h = 0.0;  // 0: library default
  std::vector<std::string> tols;
  unsigned seed = 1;
  bool dry_run = false;

  // invariants
  std::string points, points_file;
  int random_points = 0;
  // geometry
  std::string which = "all";
  // berry
  std::string center = "0,0";
  double radius = 0.5;
  int loop_k = 1024;
  std::vector<std::string> refs;
  // tomography
  std::string in;
  // band
  std::string band_kind;
  std::string grid_file;
  std::string qs = "0.4,0.2,0.1";
  std::string q_dir = "x";
  // curve
  std::string curve = "circle";
  double curve_r = 0.5;
  int samples = 4096;
};

json config_json(const RunConfig& c) {
  json j{{"command", c.command}, {"model", c.model},   {"params", c.params}, {"grid", c.grid},
         {"out", c.out},         {"format", c.format}, {"tol", c.tols},      {"seed", c.seed}};
  if (c.h > 0) j["h"] = c.h;
  if (c.command == "invariants") {
    j["points"] = c.points;
    j["points_file"] = c.points_file;
    j["random"] = c.random_points;
  } else if (c.command == "geometry") {
    j["which"] = c.which;
  } else if (c.command == "berry") {
    j["center"] = c.center;
    j["radius"] = c.radius;
    j["k"] = c.loop_k;
    j["ref"] = c.refs;
  } else if (c.command == "tomography") {
    j["in"] = c.in;
  } else if (c.command == "band") {
    j["kind"] = c.band_kind;
    j["grid_file"] = c.grid_file;
    j["q"] = c.qs;
    j["q_dir"] = c.q_dir;
  } else if (c.command == "curve") {
    j["curve"] = c.curve;
    j["r"] = c.curve_r;
    j["samples"] = c.samples;
  }
  return j;
}

[[noreturn]] void input_error(const std::string& msg) { throw Error(ErrorKind::InvalidArgument, msg); }

std::vector<double> parse_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    size_t used = 0;
    double v = 0;
    try {
      v = std::stod(tok, &used);
    } catch (const std::exception&) {
      input_error("not a number: '" + tok + "'");
    }
    if (used != tok.size()) input_error("not a number: '" + tok + "'");
    out.push_back(v);
  }
  return out;
}

RVec parse_vec(const std::string& s) {
  const auto v = parse_list(s);
  if (v.empty()) input_error("empty coordinate list");
  return Eigen::Map<const RVec>(v.data(), static_cast<Eigen::Index>(v.size()));
}

std::vector<int> parse_grid(const std::string& s) {
  std::vector<int> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, 'x')) {
    size_t used = 0;
    int v = 0;
    try {
      v = std::stoi(tok, &used);
    } catch (const std::exception&) {
      input_error("bad grid spec '" + s + "'");
    }
    if (used != tok.size()) input_error("bad grid spec '" + s + "'");
    if (v < 1) input_error("grid sizes must be positive");
    out.push_back(v);
  }
  if (out.empty()) input_error("empty grid spec");
  return out;
}

std::map<std::string, std::string> parse_params(const std::vector<std::string>& ps) {
  std::map<std::string, std::string> m;
  for (const auto& p : ps) {
    const auto eq = p.find('=');
    if (eq == std::string::npos || eq == 0) input_error("--param expects key=value, got '" + p + "'");
    m[p.substr(0, eq)] = p.substr(eq + 1);
  }
  return m;
}

void apply_tolerances(const std::vector<std::string>& ts) {
  for (const auto& [name, value] : parse_params(ts)) {
    const auto v = parse_list(value);
    if (v.size() != 1) input_error("--tol expects NAME=VALUE");
    if (!set_tolerance(name, v[0])) input_error("unknown tolerance " + name);
  }
}

// A table of named numeric columns, written as CSV or JSON.
struct Table {
  std::vector<std::string> cols;
  std::vector<std::vector<double>> rows;
};

void write_output(const RunConfig& c, const Table& t, const json& summary) {
  std::ostringstream os;
  if (c.format == "csv") {
    os << std::setprecision(17);
    for (size_t i = 0; i < t.cols.size(); ++i) os << (i ? "," : "") << t.cols[i];
    os << '\n';
    for (const auto& r : t.rows) {
      for (size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << r[i];
      os << '\n';
    }
  } else {
    json rows = json::array();
    for (const auto& r : t.rows) {
      json o = json::object();
      for (size_t i = 0; i < r.size(); ++i) o[t.cols[i]] = r[i];
      rows.push_back(o);
    }
    os << json{{"command", c.command}, {"summary", summary}, {"rows", rows}}.dump(2) << '\n';
  }
  if (c.out.empty()) {
    std::cout << os.str();
  } else {
    std::ofstream f(c.out, std::ios::binary);
    if (!f) input_error("cannot write " + c.out);
    f << os.str();
    std::cout << summary.dump() << '\n';
  }
}

void write_json(const RunConfig& c, const json& doc, const json& summary) {
  if (c.out.empty()) {
    std::cout << doc.dump(2) << '\n';
  } else {
    std::ofstream f(c.out, std::ios::binary);
    if (!f) input_error("cannot write " + c.out);
    f << doc.dump(2) << '\n';
    std::cout << summary.dump() << '\n';
  }
}

json read_json_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw Error(ErrorKind::FormatError, "cannot open " + path);
  try {
    return json::parse(f);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::FormatError, path + ": " + e.what());
  }
}

// Sample nodes of the model box: periodic axes exclude the end point.
std::vector<RVec> box_nodes(const ModelInstance& m, const std::vector<int>& sizes) {
  const int d = m.family.param_dim();
  if (static_cast<int>(sizes.size()) != d) input_error("grid rank differs from the model dimension");
  const bool periodic = m.family.periods().has_value();
  std::vector<RVec> out;
  std::vector<int> idx(d, 0);
  while (true) {
    RVec k(d);
    for (int a = 0; a < d; ++a) {
      const double span = m.hi(a) - m.lo(a);
      const double t = periodic ? double(idx[a]) / sizes[a] : (sizes[a] == 1 ? 0.5 : double(idx[a]) / (sizes[a] - 1));
      k(a) = m.lo(a) + t * span;
    }
    out.push_back(k);
    int a = d - 1;
    while (a >= 0 && ++idx[a] == sizes[a]) idx[a--] = 0;
    if (a < 0) break;
  }
  return out;
}

int cmd_invariants(const RunConfig& c) {
  const ModelInstance m = make_model(c.model, parse_params(c.params));
  const int d = m.family.param_dim();
  std::vector<RVec> pts;
  if (!c.points.empty()) {
    std::stringstream ss(c.points);
    std::string tok;
    while (std::getline(ss, tok, ';')) pts.push_back(parse_vec(tok));
  } else if (!c.points_file.empty()) {
    const json j = read_json_file(c.points_file);
    try {
      for (const auto& p : j) {
        const auto v = p.get<std::vector<double>>();
        pts.push_back(Eigen::Map<const RVec>(v.data(), static_cast<Eigen::Index>(v.size())));
      }
    } catch (const json::exception& e) {
      throw Error(ErrorKind::FormatError, "points file: " + std::string(e.what()));
    }
  } else if (c.random_points > 0) {
    std::mt19937_64 rng(c.seed);
    for (int i = 0; i < c.random_points; ++i) {
      RVec x(d);
      for (int a = 0; a < d; ++a) x(a) = std::uniform_real_distribution<double>(m.lo(a), m.hi(a))(rng);
      pts.push_back(x);
    }
  }
  if (pts.empty()) throw Error(ErrorKind::EmptyPointList, "no points given");
  std::vector<std::string> labels;
  for (const auto& p : pts) {
    if (p.size() != d) throw Error(ErrorKind::FormatError, "point has the wrong dimension");
    labels.push_back("p" + std::to_string(labels.size()));
  }
  // overlaps through the family, so kernel-only models work too
  const int n = static_cast<int>(pts.size());
  CMat K(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) K(i, j) = m.family.overlap(pts[i], pts[j]);
  RMat p2 = K.cwiseAbs2();
  p2.diagonal().setOnes();
  std::vector<cplx> p3;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      for (int k = j + 1; k < n; ++k) p3.push_back(K(i, j) * K(j, k) * K(k, i));
  const InvariantSet inv(labels, p2, p3);
  double mn = 1.0, mx = 0.0, mphi = 0.0;
  for (int i = 0; i < inv.size(); ++i)
    for (int j = i + 1; j < inv.size(); ++j) {
      mn = std::min(mn, inv.P2(i, j));
      mx = std::max(mx, inv.P2(i, j));
      for (int k = j + 1; k < inv.size(); ++k)
        if (std::abs(inv.P3(i, j, k)) > tol().orthogonal) mphi = std::max(mphi, std::abs(inv.Phi(i, j, k)));
    }
  const json summary{{"N", inv.size()}, {"min_P2", mn}, {"max_P2", mx}, {"max_abs_Phi", mphi}};
  write_json(c, inv.to_json(), summary);
  return 0;
}

int cmd_geometry(const RunConfig& c) {
  const ModelInstance m = make_model(c.model, parse_params(c.params));
  const auto sizes = parse_grid(c.grid);
  const int d = m.family.param_dim();
  const bool want_g = c.which == "g" || c.which == "all";
  const bool want_w = c.which == "omega" || c.which == "all";
  const bool want_T = c.which == "T" || c.which == "all";
  if (!want_g && !want_w && !want_T) input_error("--which must be g, omega, T or all");
  Table t;
  for (int a = 0; a < d; ++a) t.cols.push_back("k" + std::to_string(a));
  const auto pair_cols = [&](const std::string& n) {
    for (int a = 0; a < d; ++a)
      for (int b = 0; b < d; ++b) t.cols.push_back(n + "_" + std::to_string(a) + std::to_string(b));
  };
  if (want_g) pair_cols("g");
  if (want_w) pair_cols("omega");
  if (want_T)
    for (int a = 0; a < d; ++a)
      for (int b = 0; b < d; ++b)
        for (int e = 0; e < d; ++e) t.cols.push_back("T_" + std::to_string(a) + std::to_string(b) + std::to_string(e));
  const double h1 = c.h > 0 ? c.h : 1e-3, h2 = c.h > 0 ? c.h : 2e-3;
  double flux = 0.0;
  const auto nodes = box_nodes(m, sizes);
  for (const RVec& k : nodes) {
    std::vector<double> r(k.data(), k.data() + d);
    if (want_g || want_w) {
      const QGT q = qgt(m.family, k, h1);
      if (want_g)
        for (int a = 0; a < d; ++a)
          for (int b = 0; b < d; ++b) r.push_back(q.g(a, b));
      if (want_w)
        for (int a = 0; a < d; ++a)
          for (int b = 0; b < d; ++b) r.push_back(q.omega(a, b));
      if (d == 2) flux += q.omega(0, 1);
    }
    if (want_T) {
      const RTensor3 T = t_tensor(m.family, k, h2);
      r.insert(r.end(), T.v.begin(), T.v.end());
    }
    t.rows.push_back(std::move(r));
  }
  json summary{{"nodes", nodes.size()}};
  if (d == 2 && (want_g || want_w)) summary["mean_omega_01"] = flux / static_cast<double>(nodes.size());
  write_output(c, t, summary);
  return 0;
}

int cmd_berry(const RunConfig& c) {
  const ModelInstance m = make_model(c.model, parse_params(c.params));
  if (m.family.param_dim() != 2) input_error("berry loops need a two-parameter model");
  const RVec center = parse_vec(c.center);
  if (center.size() != 2) input_error("--center expects x,y");
  if (c.loop_k < 3) input_error("--k must be at least 3");
  const LoopSample loop = circle_loop(center, c.radius, c.loop_k);
  Table t{{"method", "ref0", "ref1", "phase"}, {}};
  const double ov = berry_phase_overlap(m.family, loop);
  t.rows.push_back({0, NAN, NAN, ov});
  json summary{{"overlap", ov}};
  std::vector<RVec> refs;
  for (const auto& r : c.refs) refs.push_back(parse_vec(r));
  if (refs.empty()) refs.push_back(center);
  json tri = json::array(), con = json::array();
  for (const RVec& r : refs) {
    if (r.size() != 2) input_error("--ref expects x,y");
    const double pt = berry_phase_triangles(m.family, loop, r);
    const double pc = berry_phase_connection(m.family, loop, r);
    t.rows.push_back({1, r(0), r(1), pt});
    t.rows.push_back({2, r(0), r(1), pc});
    tri.push_back(pt);
    con.push_back(pc);
  }
  summary["triangles"] = tri;
  summary["connection"] = con;
  write_output(c, t, summary);
  return 0;
}

int cmd_tomography(const RunConfig& c) {
  if (c.in.empty()) input_error("--in INVARIANTS.json is required");
  const InvariantSet inv = InvariantSet::from_json(read_json_file(c.in));
  const ReconstructionResult r = reconstruct(inv);
  const json summary{{"N", inv.size()},
                     {"rank", r.rank},
                     {"max_dP2", r.residual_two_point},
                     {"max_dPhi", r.residual_three_point}};
  write_json(c, json{{"labels", inv.labels()}, {"states", states_to_json(r.states)}, {"summary", summary}}, summary);
  if (r.residual_two_point > 1e-8 || r.residual_three_point > 1e-8) {
    std::cerr << json{{"error", "ContractViolation"}, {"message", "reconstruction residual above 1e-8"}}.dump() << '\n';
    return 3;
  }
  return 0;
}

int cmd_band(const RunConfig& c) {
  std::optional<ModelInstance> m;
  BZGrid grid;
  if (!c.grid_file.empty()) {
    grid = load_bloch_grid(c.grid_file);
  } else {
    m = make_model(c.model, parse_params(c.params));
    grid = make_grid(m->family, parse_grid(c.grid));
  }
  if (c.band_kind == "polarization") {
    Table t{{"order", "index", "generating_function", "q_integral"}, {}};
    json summary = json::object();
    for (int order = 1; order <= 3; ++order) {
      if (order > 1 && !grid.family) break;
      const CumulantReport r = cumulant(grid, order);
      for (size_t i = 0; i < r.generating_function.size(); ++i)
        t.rows.push_back({double(order), double(i), r.generating_function[i],
                          i < r.q_integral.size() ? r.q_integral[i] : NAN});
      if (order == 1) summary["quantum"] = r.quantum;
      summary["symmetry_residual_" + std::to_string(order)] = r.symmetry_residual;
    }
    write_output(c, t, summary);
    return 0;
  }
  if (c.band_kind == "conductivity") {
    if (!m || !m->hamiltonian) input_error("conductivity needs a flat-band model (veronese or qwz)");
    if (grid.d != 2) input_error("conductivity sweeps need a 2D zone");
    const int dir = c.q_dir == "x" ? 0 : c.q_dir == "y" ? 1 : -1;
    if (dir < 0) input_error("--q-dir must be x or y");
    std::vector<RVec> qs;
    for (double q : parse_list(c.qs)) {
      RVec v = RVec::Zero(2);
      v(dir) = q;
      qs.push_back(v);
    }
    const auto res = conductivity_q(grid, qs, m->hamiltonian);
    Table t{{"q", "a", "b", "re", "im", "re_projector", "im_projector", "expansion_tensor"}, {}};
    std::vector<double> qv, resid;
    for (const auto& r : res) {
      const RMat ex = sigma_expansion_tensor(grid, r.q);
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b)
          t.rows.push_back({r.q(dir), double(a), double(b), r.sigma(a, b).real(), r.sigma(a, b).imag(),
                            r.sigma_projector(a, b).real(), r.sigma_projector(a, b).imag(), ex(a, b)});
      if (dir == 0) {
        qv.push_back(std::abs(r.q(0)));
        resid.push_back(std::abs(r.sigma(0, 1).real() - sigma_xy_expansion(grid, r.q(0))));
      }
    }
    json summary{{"q_count", res.size()}};
    if (qv.size() >= 2) {
      summary["second_order_residuals"] = resid;
      summary["residual_slope"] = loglog_slope(qv, resid);
    }
    write_output(c, t, summary);
    return 0;
  }
  input_error("band expects polarization or conductivity");
}

int cmd_curve(const RunConfig& c) {
  ChartCurve cv;
  if (c.curve == "circle")
    cv = chart_circle(c.curve_r);
  else if (c.curve == "figure8")
    cv = figure8();
  else
    input_error("--curve must be circle or figure8");
  if (c.samples < 8) input_error("--samples must be at least 8");
  const SelfIntersection si = self_intersection(cv, c.samples);
  Table t{{"t", "re_f", "im_f", "T"}, {}};
  const int rows = std::min(c.samples, 256);
  for (int i = 0; i < rows; ++i) {
    const double s = cv.period * i / rows;
    const cplx f = cv.f(s);
    t.rows.push_back({s, f.real(), f.imag(), curve_T(cv, s)});
  }
  write_output(c, t, json{{"self_intersection", si.raw}, {"normalized", si.normalized}});
  return 0;
}

void add_common(CLI::App* sub, RunConfig& c) {
  sub->add_option("--model", c.model, "model name")->check(CLI::IsMember(model_names()));
  sub->add_option("--param", c.params, "model parameter key=value (repeatable)");
  sub->add_option("--grid", c.grid, "grid spec N1xN2");
  sub->add_option("--out", c.out, "output path (default stdout)");
  sub->add_option("--format", c.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  sub->add_option("--h", c.h, "finite-difference step")->check(CLI::PositiveNumber);
  sub->add_option("--tol", c.tols, "tolerance override NAME=VALUE (repeatable)");
  sub->add_option("--seed", c.seed, "random seed");
  sub->add_flag("--dry-run", c.dry_run, "print the resolved configuration and exit");
}

void print_error(std::string_view kind, const std::string& msg) {
  std::cerr << json{{"error", std::string(kind)}, {"message", msg}}.dump() << '\n';
}

}  // namespace

int run(int argc, char** argv) {
  RunConfig c;
  CLI::App app{"Quantum state geometry toolkit"};
  app.require_subcommand(1);
  app.set_help_flag("--help", "print this help and exit");  // -h would collide with --h

  auto* inv = app.add_subcommand("invariants", "export the invariant set of model points");
  add_common(inv, c);
  inv->add_option("--points", c.points, "inline points x,y;x,y;...");
  inv->add_option("--points-file", c.points_file, "JSON array of points");
  inv->add_option("--random", c.random_points, "number of random points in the model box");

  auto* geo = app.add_subcommand("geometry", "sweep g, omega and T over a grid");
  add_common(geo, c);
  geo->add_option("--which", c.which, "g, omega, T or all");

  auto* ber = app.add_subcommand("berry", "Berry phase of a circular loop by three methods");
  add_common(ber, c);
  ber->add_option("--center", c.center, "loop center x,y");
  ber->add_option("--radius", c.radius, "loop radius");
  ber->add_option("--k", c.loop_k, "points on the loop");
  ber->add_option("--ref", c.refs, "reference point x,y (repeatable)");

  auto* tom = app.add_subcommand("tomography", "reconstruct states from an invariant set");
  add_common(tom, c);
  tom->add_option("--in", c.in, "InvariantSet JSON");

  auto* band = app.add_subcommand("band", "band observables: polarization or conductivity");
  add_common(band, c);
  band->add_option("kind", c.band_kind, "polarization or conductivity")->required();
  band->add_option("--grid-file", c.grid_file, "Bloch grid file instead of a model");
  band->add_option("--q", c.qs, "comma-separated |q| values");
  band->add_option("--q-dir", c.q_dir, "x or y");

  auto* cur = app.add_subcommand("curve", "closed curves in CP^1: T and self-intersection");
  add_common(cur, c);
  cur->add_option("--curve", c.curve, "circle or figure8");
  cur->add_option("--r", c.curve_r, "chart radius for circle");
  cur->add_option("--samples", c.samples, "quadrature nodes");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    print_error("FormatError", e.what());
    return 2;
  }
  for (auto* s : app.get_subcommands()) c.command = s->get_name();

  try {
    apply_tolerances(c.tols);
    if (c.dry_run) {
      std::cout << config_json(c).dump(2) << '\n';
      return 0;
    }
    if (c.command == "invariants") return cmd_invariants(c);
    if (c.command == "geometry") return cmd_geometry(c);
    if (c.command == "berry") return cmd_berry(c);
    if (c.command == "tomography") return cmd_tomography(c);
    if (c.command == "band") return cmd_band(c);
    if (c.command == "curve") return cmd_curve(c);
    print_error("InvalidArgument", "unknown command");
    return 2;
  } catch (const Error& e) {
    print_error(e.name(), e.what());
    return error_class(e.kind()) == ErrorClass::Input ? 2 : 3;
  } catch (const std::exception& e) {
    print_error("Internal", e.what());
    return 4;
  }
}

}  // namespace qgeom::cli
