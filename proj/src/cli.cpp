#include "anisocap/cli.hpp"

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "anisocap/errors.hpp"
#include "anisocap/functionals.hpp"
#include "json.hpp"

namespace anisocap {
namespace {

// ---------------------------------------------------------------------------
// small text helpers

std::string trim(const std::string& s) {
  const char* ws = " \t\r\n";
  const auto a = s.find_first_not_of(ws);
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(ws);
  return s.substr(a, b - a + 1);
}

std::vector<std::string> split_words(const std::string& s) {
  std::vector<std::string> out;
  std::string word;
  for (char c : s) {
    if (c == ' ' || c == '\t' || c == ',') {
      if (!word.empty()) out.push_back(std::move(word));
      word.clear();
    } else {
      word.push_back(c);
    }
  }
  if (!word.empty()) out.push_back(std::move(word));
  return out;
}

std::string fmt_number(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

[[noreturn]] void bad_config(int lineno, const std::string& what) {
  // lineno 0 marks values that came from command-line flags, not the file.
  if (lineno > 0)
    throw ConfigError("config line " + std::to_string(lineno) + ": " + what);
  throw ConfigError(what);
}

double parse_number(const std::string& v, int lineno) {
  char* end = nullptr;
  errno = 0;
  const double x = std::strtod(v.c_str(), &end);
  if (end == v.c_str() || *end != '\0' || errno == ERANGE)
    bad_config(lineno, "expected a number, got '" + v + "'");
  return x;
}

long parse_integer(const std::string& v, int lineno) {
  char* end = nullptr;
  errno = 0;
  const long x = std::strtol(v.c_str(), &end, 10);
  if (end == v.c_str() || *end != '\0' || errno == ERANGE)
    bad_config(lineno, "expected an integer, got '" + v + "'");
  return x;
}

std::vector<double> parse_numbers(const std::string& v, int lineno) {
  std::vector<double> out;
  for (const std::string& w : split_words(v)) out.push_back(parse_number(w, lineno));
  return out;
}

Eigen::Vector3d parse_vector3(const std::string& v, int lineno) {
  const auto vals = parse_numbers(v, lineno);
  if (vals.size() != 3) bad_config(lineno, "expected 3 numbers");
  return Eigen::Vector3d(vals[0], vals[1], vals[2]);
}

// ---------------------------------------------------------------------------
// enum names

const char* family_name(NormFamily f) {
  switch (f) {
    case NormFamily::Euclidean: return "euclidean";
    case NormFamily::Ellipsoidal: return "ellipsoidal";
    case NormFamily::Quartic: return "quartic";
  }
  return "?";
}

NormFamily family_from(const std::string& s, int lineno) {
  if (s == "euclidean") return NormFamily::Euclidean;
  if (s == "ellipsoidal") return NormFamily::Ellipsoidal;
  if (s == "quartic") return NormFamily::Quartic;
  bad_config(lineno, "unknown norm family '" + s +
                         "' (euclidean, ellipsoidal, quartic)");
}

const char* kind_name(BodyKind k) {
  switch (k) {
    case BodyKind::Sphere: return "sphere";
    case BodyKind::ScaledWulff: return "scaled_wulff";
    case BodyKind::Ellipsoid: return "ellipsoid";
    case BodyKind::PerturbedWulff: return "perturbed_wulff";
    case BodyKind::OffsetSphere: return "offset_sphere";
  }
  return "?";
}

BodyKind kind_from(const std::string& s, int lineno) {
  if (s == "sphere") return BodyKind::Sphere;
  if (s == "scaled_wulff") return BodyKind::ScaledWulff;
  if (s == "ellipsoid") return BodyKind::Ellipsoid;
  if (s == "perturbed_wulff") return BodyKind::PerturbedWulff;
  if (s == "offset_sphere") return BodyKind::OffsetSphere;
  bad_config(lineno, "unknown body kind '" + s +
                         "' (sphere, scaled_wulff, ellipsoid, perturbed_wulff, "
                         "offset_sphere)");
}

bool known_format(const std::string& s) {
  return s == "json" || s == "table" || s == "csv" || s == "obj";
}

}  // namespace

// ---------------------------------------------------------------------------
// config text format

RunConfig parse_config(const std::string& text) {
  RunConfig cfg;
  std::vector<double> matrix_values;
  int matrix_lineno = 0;

  std::istringstream in(text);
  std::string raw;
  int lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    const auto hash = raw.find('#');
    if (hash != std::string::npos) raw.erase(hash);
    const std::string line = trim(raw);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) bad_config(lineno, "expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) bad_config(lineno, "empty key");

    if (key == "norm.family") {
      cfg.norm.family = family_from(value, lineno);
    } else if (key == "norm.dimension") {
      cfg.norm.dimension = static_cast<int>(parse_integer(value, lineno));
    } else if (key == "norm.matrix") {
      matrix_values = parse_numbers(value, lineno);
      matrix_lineno = lineno;
    } else if (key == "norm.amplitude") {
      cfg.norm.amplitude = parse_number(value, lineno);
    } else if (key == "norm.dual.samples") {
      cfg.norm.dual.samples = static_cast<int>(parse_integer(value, lineno));
    } else if (key == "norm.dual.newton_iters") {
      cfg.norm.dual.newton_iters =
          static_cast<int>(parse_integer(value, lineno));
    } else if (key == "norm.dual.tol") {
      cfg.norm.dual.tol = parse_number(value, lineno);
    } else if (key == "body.kind") {
      cfg.body.kind = kind_from(value, lineno);
    } else if (key == "body.r0") {
      cfg.body.r0 = parse_number(value, lineno);
    } else if (key == "body.semi_axes") {
      cfg.body.semi_axes = parse_vector3(value, lineno);
    } else if (key == "body.eps") {
      cfg.body.eps = parse_number(value, lineno);
    } else if (key == "body.radius") {
      cfg.body.radius = parse_number(value, lineno);
    } else if (key == "body.center") {
      cfg.body.center = parse_vector3(value, lineno);
    } else if (key == "grid.n_theta") {
      cfg.n_theta = static_cast<int>(parse_integer(value, lineno));
    } else if (key == "grid.n_phi") {
      cfg.n_phi = static_cast<int>(parse_integer(value, lineno));
    } else if (key == "p_list") {
      cfg.p_list = parse_numbers(value, lineno);
    } else if (key == "q") {
      cfg.q = parse_number(value, lineno);
    } else if (key == "flow.t_end") {
      cfg.flow.t_end = parse_number(value, lineno);
    } else if (key == "flow.cfl") {
      cfg.flow.cfl = parse_number(value, lineno);
    } else if (key == "flow.max_steps") {
      cfg.flow.max_steps = parse_integer(value, lineno);
    } else if (key == "flow.snapshot_every") {
      cfg.flow.snapshot_every = parse_number(value, lineno);
    } else if (key == "flow.min_hf") {
      cfg.flow.min_HF = parse_number(value, lineno);
    } else if (key == "outputs.report_path") {
      cfg.outputs.report_path = value;
    } else if (key == "outputs.trace_path") {
      cfg.outputs.trace_path = value;
    } else if (key == "outputs.mesh_dir") {
      cfg.outputs.mesh_dir = value;
    } else if (key == "outputs.formats") {
      cfg.outputs.formats = split_words(value);
      for (const std::string& f : cfg.outputs.formats)
        if (!known_format(f))
          bad_config(lineno,
                     "unknown format '" + f + "' (json, table, csv, obj)");
    } else {
      bad_config(lineno, "unknown key '" + key + "'");
    }
  }

  if (!matrix_values.empty()) {
    const int n = cfg.norm.dimension;
    if (static_cast<int>(matrix_values.size()) != n * n)
      bad_config(matrix_lineno, "norm.matrix needs dimension^2 = " +
                                    std::to_string(n * n) + " numbers, got " +
                                    std::to_string(matrix_values.size()));
    cfg.norm.matrix.resize(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        cfg.norm.matrix(i, j) = matrix_values[static_cast<std::size_t>(i) *
                                                  static_cast<std::size_t>(n) +
                                              static_cast<std::size_t>(j)];
  }
  return cfg;
}

std::string serialize_config(const RunConfig& cfg) {
  std::string out;
  auto line = [&out](const std::string& key, const std::string& value) {
    out += key;
    out += " =";
    if (!value.empty()) {
      out += " ";
      out += value;
    }
    out += "\n";
  };
  auto num_line = [&](const std::string& key, double value) {
    line(key, fmt_number(value));
  };
  auto int_line = [&](const std::string& key, long value) {
    line(key, std::to_string(value));
  };
  auto join = [](const std::vector<std::string>& words) {
    std::string s;
    for (const std::string& w : words) {
      if (!s.empty()) s += " ";
      s += w;
    }
    return s;
  };

  line("norm.family", family_name(cfg.norm.family));
  int_line("norm.dimension", cfg.norm.dimension);
  if (cfg.norm.matrix.size() > 0) {
    std::vector<std::string> cells;
    for (Eigen::Index i = 0; i < cfg.norm.matrix.rows(); ++i)
      for (Eigen::Index j = 0; j < cfg.norm.matrix.cols(); ++j)
        cells.push_back(fmt_number(cfg.norm.matrix(i, j)));
    line("norm.matrix", join(cells));
  }
  num_line("norm.amplitude", cfg.norm.amplitude);
  int_line("norm.dual.samples", cfg.norm.dual.samples);
  int_line("norm.dual.newton_iters", cfg.norm.dual.newton_iters);
  num_line("norm.dual.tol", cfg.norm.dual.tol);

  line("body.kind", kind_name(cfg.body.kind));
  num_line("body.r0", cfg.body.r0);
  line("body.semi_axes", fmt_number(cfg.body.semi_axes.x()) + " " +
                             fmt_number(cfg.body.semi_axes.y()) + " " +
                             fmt_number(cfg.body.semi_axes.z()));
  num_line("body.eps", cfg.body.eps);
  num_line("body.radius", cfg.body.radius);
  line("body.center", fmt_number(cfg.body.center.x()) + " " +
                          fmt_number(cfg.body.center.y()) + " " +
                          fmt_number(cfg.body.center.z()));

  int_line("grid.n_theta", cfg.n_theta);
  int_line("grid.n_phi", cfg.n_phi);

  std::vector<std::string> ps;
  for (double p : cfg.p_list) ps.push_back(fmt_number(p));
  line("p_list", join(ps));
  num_line("q", cfg.q);

  num_line("flow.t_end", cfg.flow.t_end);
  num_line("flow.cfl", cfg.flow.cfl);
  int_line("flow.max_steps", cfg.flow.max_steps);
  num_line("flow.snapshot_every", cfg.flow.snapshot_every);
  num_line("flow.min_hf", cfg.flow.min_HF);

  line("outputs.report_path", cfg.outputs.report_path);
  line("outputs.trace_path", cfg.outputs.trace_path);
  line("outputs.mesh_dir", cfg.outputs.mesh_dir);
  line("outputs.formats", join(cfg.outputs.formats));
  return out;
}

RunConfig load_config_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config file: " + path);
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str());
}

bool operator==(const RunConfig& a, const RunConfig& b) {
  return a.norm == b.norm && a.body == b.body && a.n_theta == b.n_theta &&
         a.n_phi == b.n_phi && a.p_list == b.p_list && a.q == b.q &&
         a.flow == b.flow && a.outputs == b.outputs;
}

void validate_config(const RunConfig& cfg) {
  if (cfg.p_list.empty()) throw ConfigError("p_list must not be empty");
  for (double p : cfg.p_list)
    if (!(std::isfinite(p) && p > 1.0 && p < 3.0))
      throw ConfigError("p_list entries must lie in (1, 3), got " +
                        fmt_number(p));
  if (!(std::isfinite(cfg.q) && cfg.q >= 2.0 && cfg.q < 3.0))
    throw ConfigError("q must lie in [2, 3), got " + fmt_number(cfg.q));
  if (cfg.n_theta <= 0 || cfg.n_phi <= 0)
    throw ConfigError("grid sizes must be positive");
}

// ---------------------------------------------------------------------------
// file products

std::string surface_obj(const RadialSurface& surface) {
  const SphereGrid& grid = *surface.grid;
  const int nt = grid.n_theta();
  const int np = grid.n_phi();
  const Eigen::Index n = grid.size();

  std::string out;
  out.reserve(static_cast<std::size_t>(n) * 80);
  char buf[160];
  for (Eigen::Index k = 0; k < n; ++k) {
    const Eigen::Vector3d x = surface.r[k] * grid.p().col(k);
    std::snprintf(buf, sizeof buf, "v %.17g %.17g %.17g\n", x.x(), x.y(),
                  x.z());
    out += buf;
  }
  // Synthetic pole vertices: the grid itself has no nodes at theta = 0, pi,
  // so cap each opening with the mean radius of the adjacent node row.
  double r_north = 0.0, r_south = 0.0;
  for (int j = 0; j < np; ++j) {
    r_north += surface.r[grid.index(0, j)];
    r_south += surface.r[grid.index(nt - 1, j)];
  }
  r_north /= np;
  r_south /= np;
  std::snprintf(buf, sizeof buf, "v %.17g %.17g %.17g\n", 0.0, 0.0, r_north);
  out += buf;
  std::snprintf(buf, sizeof buf, "v %.17g %.17g %.17g\n", 0.0, 0.0, -r_south);
  out += buf;

  // 1-based vertex ids; winding keeps the outward normal (theta increases
  // away from the north pole, phi counterclockwise around +z).
  auto id = [&grid](int i, int j) {
    return static_cast<int>(grid.index(i, j)) + 1;
  };
  const int north = static_cast<int>(n) + 1;
  const int south = static_cast<int>(n) + 2;
  for (int i = 0; i + 1 < nt; ++i) {
    for (int j = 0; j < np; ++j) {
      const int jn = (j + 1) % np;
      const int a = id(i, j), b = id(i + 1, j), c = id(i + 1, jn),
                d = id(i, jn);
      std::snprintf(buf, sizeof buf, "f %d %d %d\nf %d %d %d\n", a, b, c, a, c,
                    d);
      out += buf;
    }
  }
  for (int j = 0; j < np; ++j) {
    const int jn = (j + 1) % np;
    std::snprintf(buf, sizeof buf, "f %d %d %d\nf %d %d %d\n", north, id(0, j),
                  id(0, jn), south, id(nt - 1, jn), id(nt - 1, j));
    out += buf;
  }
  return out;
}

std::string trace_csv(const FlowTrace& trace) {
  std::string out = "t,area_F";
  char buf[64];
  for (double p : trace.p_list) {
    std::snprintf(buf, sizeof buf, ",Tp_%g", p);
    out += buf;
  }
  out += ",hawking,shape_dev\n";
  for (const FlowSample& s : trace.samples) {
    out += fmt_number(s.t);
    out += ",";
    out += fmt_number(s.area_F);
    for (double tp : s.T_p) {
      out += ",";
      out += fmt_number(tp);
    }
    out += ",";
    out += fmt_number(s.hawking);
    out += ",";
    out += fmt_number(s.shape_dev);
    out += "\n";
  }
  return out;
}

// ---------------------------------------------------------------------------
// subcommand plumbing

namespace {

struct ExitRequest {
  int code;
};

[[noreturn]] void fail(int code, const std::string& message) {
  std::fprintf(stderr, "error: %s\n", message.c_str());
  throw ExitRequest{code};
}

NormModel build_norm(const RunConfig& cfg) {
  try {
    return make_norm(cfg.norm);
  } catch (const Error& e) {
    fail(2, std::string("norm: ") + e.what());
  }
}

SphereGrid build_grid(const RunConfig& cfg) {
  try {
    return make_grid(cfg.n_theta, cfg.n_phi);
  } catch (const Error& e) {
    fail(1, std::string("grid: ") + e.what());
  }
}

RadialSurface build_body(const SphereGrid& grid, const RunConfig& cfg,
                         const NormModel& norm) {
  try {
    return make_surface(grid, cfg.body, norm);
  } catch (const Error& e) {
    fail(1, std::string("body: ") + e.what());
  }
}

void write_file(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path p(path);
  std::error_code ec;
  if (p.has_parent_path()) fs::create_directories(p.parent_path(), ec);
  std::ofstream out(p, std::ios::binary);
  if (!out) fail(1, "cannot open for writing: " + path);
  out << content;
  out.flush();
  if (!out) fail(1, "write failed: " + path);
}

bool wants(const RunConfig& cfg, const char* format) {
  for (const std::string& f : cfg.outputs.formats)
    if (f == format) return true;
  return false;
}

// Deterministic unit directions in any dimension for the duality probe.
std::vector<Eigen::VectorXd> probe_directions(int dim, int count) {
  std::vector<Eigen::VectorXd> dirs;
  dirs.reserve(static_cast<std::size_t>(count));
  std::mt19937_64 rng(20240915);
  std::normal_distribution<double> gauss(0.0, 1.0);
  while (static_cast<int>(dirs.size()) < count) {
    Eigen::VectorXd d(dim);
    for (int i = 0; i < dim; ++i) d[i] = gauss(rng);
    const double len = d.norm();
    if (len < 1e-8) continue;
    dirs.push_back(d / len);
  }
  return dirs;
}

int cmd_validate_norm(const RunConfig& cfg) {
  const NormModel norm = build_norm(cfg);
  std::printf("family: %s\n", family_name(norm.family()));
  std::printf("dimension: %d\n", norm.dim());
  std::printf("ellipticity margin: %.12g\n", norm.ellipticity_margin());

  // Duality identities F(DF0(x)) = 1 and F0(x) DF(DF0(x)) = x, sampled over
  // deterministic directions; the Wulff gauge makes both exact up to the
  // dual solver's tolerance.
  double value_res = 0.0;
  double vector_res = 0.0;
  for (const Eigen::VectorXd& d : probe_directions(norm.dim(), 512)) {
    const Eigen::VectorXd y = grad_F0(norm, d);
    value_res = std::max(value_res, std::abs(eval_F(norm, y) - 1.0));
    const Eigen::VectorXd back = eval_F0(norm, d) * grad_F(norm, y);
    vector_res = std::max(vector_res, (back - d).norm());
  }
  std::printf("duality value residual: %.3g\n", value_res);
  std::printf("duality vector residual: %.3g\n", vector_res);

  const double gate = 1e-6;
  const bool ok = value_res <= gate && vector_res <= gate;
  std::printf("norm: %s\n", ok ? "ok" : "FAIL");
  if (!ok) fail(2, "duality residuals exceed " + fmt_number(gate));
  return 0;
}

int cmd_make_surface(const RunConfig& cfg) {
  const NormModel norm = build_norm(cfg);
  const SphereGrid grid = build_grid(cfg);
  const RadialSurface body = build_body(grid, cfg, norm);
  const GeometryFields g = geometry(body, norm);
  const Eigen::ArrayXd ones = Eigen::ArrayXd::Ones(grid.size());

  if (wants(cfg, "table")) {
    std::printf("body: %s\n", kind_name(cfg.body.kind));
    std::printf("nodes: %ld (%d x %d)\n", static_cast<long>(grid.size()),
                grid.n_theta(), grid.n_phi());
    std::printf("volume: %.12g\n", enclosed_volume(body));
    std::printf("area_F: %.12g\n", integrate(body, g, ones, Measure::DmuF));
    std::printf("min H_F: %.12g\n", g.H_F.minCoeff());
    std::printf("mean_convex: %s\n", g.H_F.minCoeff() > 0.0 ? "yes" : "no");
    std::printf("convex: %s\n", is_convex(g) ? "yes" : "no");
  }
  if (!cfg.outputs.mesh_dir.empty() && wants(cfg, "obj")) {
    const std::string path = cfg.outputs.mesh_dir + "/body.obj";
    write_file(path, surface_obj(body));
    if (wants(cfg, "table")) std::printf("mesh: %s\n", path.c_str());
  }
  return 0;
}

int cmd_flow(const RunConfig& cfg) {
  // Mirror the flow module's own control checks so that bad controls are a
  // configuration error (exit 1), not a flow failure (exit 3).
  if (!(cfg.flow.t_end > 0.0) || !std::isfinite(cfg.flow.t_end))
    fail(1, "flow.t_end must be positive, got " + fmt_number(cfg.flow.t_end));
  if (!(cfg.flow.cfl > 0.0 && cfg.flow.cfl <= 0.5))
    fail(1, "flow.cfl must lie in (0, 0.5], got " + fmt_number(cfg.flow.cfl));
  if (!(cfg.flow.snapshot_every > 0.0) ||
      !std::isfinite(cfg.flow.snapshot_every))
    fail(1, "flow.snapshot_every must be positive");
  if (cfg.flow.max_steps < 1) fail(1, "flow.max_steps must be positive");
  if (!(cfg.flow.min_HF > 0.0)) fail(1, "flow.min_hf must be positive");

  const NormModel norm = build_norm(cfg);
  const SphereGrid grid = build_grid(cfg);
  const RadialSurface body = build_body(grid, cfg, norm);

  FlowTrace trace;
  try {
    trace = run_iamcf(body, norm, cfg.flow, cfg.p_list);
  } catch (const Error& e) {
    fail(3, std::string("flow: ") + e.what());
  }

  if (wants(cfg, "table")) {
    const FlowSample& last = trace.samples.back();
    std::printf("flow: %ld steps to t = %.12g\n", trace.steps, last.t);
    std::printf("final area_F: %.12g\n", last.area_F);
    std::printf("final hawking: %.12g\n", last.hawking);
    std::printf("final shape_dev: %.12g\n", last.shape_dev);
    for (double p : cfg.p_list)
      std::printf("capacity upper from trace (p = %g): %.12g\n", p,
                  capacity_upper_from_trace(trace, p));
  }
  if (!cfg.outputs.trace_path.empty() && wants(cfg, "csv")) {
    write_file(cfg.outputs.trace_path, trace_csv(trace));
    if (wants(cfg, "table"))
      std::printf("trace: %s\n", cfg.outputs.trace_path.c_str());
  }
  if (!cfg.outputs.mesh_dir.empty() && wants(cfg, "obj")) {
    char name[64];
    for (std::size_t i = 0; i < trace.surfaces.size(); ++i) {
      std::snprintf(name, sizeof name, "/snapshot_%03zu.obj", i);
      write_file(cfg.outputs.mesh_dir + name, surface_obj(trace.surfaces[i]));
    }
    if (wants(cfg, "table"))
      std::printf("snapshots: %zu -> %s\n", trace.surfaces.size(),
                  cfg.outputs.mesh_dir.c_str());
  }
  return 0;
}

int cmd_bounds(const RunConfig& cfg) {
  const NormModel norm = build_norm(cfg);
  const SphereGrid grid = build_grid(cfg);
  const RadialSurface body = build_body(grid, cfg, norm);

  nlohmann::ordered_json reports = nlohmann::ordered_json::array();
  bool all_sandwich = true;
  for (double p : cfg.p_list) {
    BoundsReport rep;
    try {
      rep = bounds_report(body, norm, p, cfg.q);
    } catch (const Error& e) {
      fail(1, std::string("bounds: ") + e.what());
    }
    reports.push_back(nlohmann::ordered_json::parse(report_json(rep)));
    if (wants(cfg, "table")) {
      const std::string table = report_table(rep);
      std::fwrite(table.data(), 1, table.size(), stdout);
      std::printf("\n");
    }
    if (!rep.sandwich) {
      all_sandwich = false;
      std::fprintf(stderr,
                   "warning: sandwich check failed for p = %g (a lower bound "
                   "exceeds an upper bound)\n",
                   p);
    }
  }
  if (!cfg.outputs.report_path.empty() && wants(cfg, "json")) {
    write_file(cfg.outputs.report_path, reports.dump(2) + "\n");
    if (wants(cfg, "table"))
      std::printf("report: %s\n", cfg.outputs.report_path.c_str());
  }
  return all_sandwich ? 0 : 4;
}

BoundsReport report_from_json(const nlohmann::ordered_json& j) {
  auto opt = [](const nlohmann::ordered_json& v) -> std::optional<double> {
    if (v.is_null()) return std::nullopt;
    return v.get<double>();
  };
  BoundsReport r;
  r.volume = j.at("body").at("volume").get<double>();
  r.area_F = j.at("body").at("area_F").get<double>();
  r.wulff_area = j.at("body").at("wulff_area").get<double>();
  r.wulff_volume = j.at("body").at("wulff_volume").get<double>();
  r.p = j.at("exponents").at("p").get<double>();
  r.q = j.at("exponents").at("q").get<double>();
  r.hawking = j.at("hawking").get<double>();
  r.willmore = j.at("willmore").get<double>();
  r.isoperimetric = j.at("isoperimetric_defect").get<double>();
  r.mean_convex = j.at("hypotheses").at("mean_convex").get<bool>();
  r.convex = j.at("hypotheses").at("convex").get<bool>();
  const auto& up = j.at("upper_bounds");
  r.curvature = opt(up.at("curvature"));
  r.curvature_pq = opt(up.at("curvature_pq"));
  r.hawking_bound = opt(up.at("hawking"));
  r.hawking_p2 = opt(up.at("hawking_p2"));
  r.normal_flow = opt(up.at("normal_flow"));
  r.homothety = opt(up.at("homothety"));
  const auto& low = j.at("lower_bounds");
  r.perimeter_volume = opt(low.at("perimeter_volume"));
  r.isocapacitary = low.at("isocapacitary").get<double>();
  r.oracle = opt(j.at("oracle"));
  const auto& flags = j.at("flags");
  r.hawking_nonpositive = flags.at("hawking_nonpositive").get<bool>();
  r.willmore_at_least_wulff = flags.at("willmore_at_least_wulff").get<bool>();
  r.isoperimetric_nonneg = flags.at("isoperimetric_nonneg").get<bool>();
  r.sandwich = flags.at("sandwich").get<bool>();
  return r;
}

int cmd_report(const RunConfig& cfg) {
  if (cfg.outputs.report_path.empty())
    fail(1, "report: outputs.report_path is not set");
  std::ifstream in(cfg.outputs.report_path, std::ios::binary);
  if (!in) fail(1, "report: cannot read " + cfg.outputs.report_path);
  nlohmann::ordered_json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    fail(1, std::string("report: invalid JSON: ") + e.what());
  }
  if (j.is_object()) j = nlohmann::ordered_json::array({j});
  if (!j.is_array()) fail(1, "report: expected a JSON array of reports");
  try {
    for (const auto& el : j) {
      const std::string table = report_table(report_from_json(el));
      std::fwrite(table.data(), 1, table.size(), stdout);
      std::printf("\n");
    }
  } catch (const nlohmann::json::exception& e) {
    fail(1, std::string("report: unexpected schema: ") + e.what());
  }
  return 0;
}

// --grid NxM, --p comma list, --out prefix for relative output paths.
void apply_overrides(RunConfig& cfg, const std::string& grid_arg,
                     const std::string& p_arg, const std::string& out_arg) {
  if (!grid_arg.empty()) {
    const auto x = grid_arg.find('x');
    if (x == std::string::npos)
      throw ConfigError("--grid expects N_THETAxN_PHI, e.g. 48x96");
    cfg.n_theta = static_cast<int>(
        parse_integer(trim(grid_arg.substr(0, x)), 0));
    cfg.n_phi = static_cast<int>(
        parse_integer(trim(grid_arg.substr(x + 1)), 0));
  }
  if (!p_arg.empty()) cfg.p_list = parse_numbers(p_arg, 0);
  if (!out_arg.empty()) {
    auto prefix = [&out_arg](std::string& path) {
      if (path.empty()) return;
      if (std::filesystem::path(path).is_absolute()) return;
      path = out_arg + "/" + path;
    };
    prefix(cfg.outputs.report_path);
    prefix(cfg.outputs.trace_path);
    prefix(cfg.outputs.mesh_dir);
  }
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"anisotropic p-capacity laboratory"};
  app.require_subcommand(1);

  std::string config_path, grid_arg, p_arg, out_arg;
  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "run configuration file")
        ->required();
    cmd->add_option("--grid", grid_arg,
                    "grid override as N_THETAxN_PHI, e.g. 48x96");
    cmd->add_option("--p", p_arg, "comma-separated exponent list override");
    cmd->add_option("--out", out_arg,
                    "directory prefixed to relative output paths");
    return cmd;
  };
  CLI::App* c_validate = add_common(app.add_subcommand(
      "validate-norm", "construct the norm and check the duality identities"));
  CLI::App* c_surface = add_common(app.add_subcommand(
      "make-surface", "build the body and print its geometry summary"));
  CLI::App* c_flow = add_common(app.add_subcommand(
      "flow", "run the inverse anisotropic mean curvature flow"));
  CLI::App* c_bounds = add_common(app.add_subcommand(
      "bounds", "evaluate every capacity bound and write the JSON report"));
  add_common(app.add_subcommand(
      "report", "pretty-print a previously written JSON report"));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    RunConfig cfg = load_config_file(config_path);
    apply_overrides(cfg, grid_arg, p_arg, out_arg);
    validate_config(cfg);
    if (c_validate->parsed()) return cmd_validate_norm(cfg);
    if (c_surface->parsed()) return cmd_make_surface(cfg);
    if (c_flow->parsed()) return cmd_flow(cfg);
    if (c_bounds->parsed()) return cmd_bounds(cfg);
    return cmd_report(cfg);
  } catch (const ExitRequest& e) {
    return e.code;
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "error: config: %s\n", e.what());
    return 1;
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}

}  // namespace anisocap
