#include "magelas/config.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

#include "magelas/io.hpp"
#include "magelas/minimize.hpp"
#include "magelas/recovery.hpp"
#include "magelas/sphere.hpp"
#include "magelas/stray.hpp"

namespace magelas {

namespace {

using nlohmann::json;

const char *const kKinds[] = {"gamma-study",    "stray-check",
                              "geodesic",       "minimize-limit",
                              "minimize-diffuse", "almost-min-study"};
const char *const kFaceNames[] = {"x-", "x+", "y-", "y+", "z-", "z+"};

bool known_kind(const std::string &k) {
  for (const char *s : kKinds)
    if (k == s)
      return true;
  return false;
}

[[noreturn]] void fail(const std::string &msg) {
  throw std::invalid_argument(msg);
}

void require_keys(const json &obj, std::initializer_list<const char *> allowed,
                  const char *where) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool ok = false;
    for (const char *k : allowed)
      if (it.key() == k)
        ok = true;
    if (!ok)
      fail(std::string("unknown key '") + it.key() + "' in " + where);
  }
}

Vec3 parse_vec3(const json &j, const char *what) {
  if (!j.is_array() || j.size() != 3)
    fail(std::string(what) + " must be an array of 3 numbers");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

// A matrix is written as its three rows.
Mat3 parse_mat3_rows(const json &j, const char *what) {
  if (!j.is_array() || j.size() != 3)
    fail(std::string(what) + " must be an array of 3 rows");
  Mat3 m;
  for (int r = 0; r < 3; ++r) {
    const Vec3 row = parse_vec3(j[r], what);
    m(r, 0) = row.x;
    m(r, 1) = row.y;
    m(r, 2) = row.z;
  }
  return m;
}

json vec3_json(const Vec3 &v) { return json::array({v.x, v.y, v.z}); }

json mat3_rows_json(const Mat3 &m) {
  json rows = json::array();
  for (int r = 0; r < 3; ++r)
    rows.push_back(json::array({m(r, 0), m(r, 1), m(r, 2)}));
  return rows;
}

std::string fjoin(const std::string &dir, const std::string &name) {
  return (std::filesystem::path(dir) / name).string();
}

std::string indexed(const char *stem, std::size_t idx, const char *ext) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s_%03zu.%s", stem, idx, ext);
  return buf;
}

LabelField initial_labels(const ExperimentConfig &c, const Grid &g) {
  LabelField m(g, 1);
  if (c.init_labels == "half-split")
    for (int i = g.n[0] / 2; i < g.n[0]; ++i)
      for (int j = 0; j < g.n[1]; ++j)
        for (int k = 0; k < g.n[2]; ++k)
          m(i, j, k) = 2;
  return m;
}

// Limit surface tensions used by the minimizing experiments: the geodesic
// tension table scaled by the measured per-area transition constant of the
// first well pair (the attainable diffuse interface cost, about twice the
// bare tension in the Young-equality case).
std::vector<std::vector<double>> limit_tensions(const AnisotropySpec &spec,
                                                double eps_ref, double beta) {
  std::vector<std::vector<double>> sigma =
      surface_tension_table(spec, kStudyTensionLevel);
  const double d12 = sigma[0][1];
  if (d12 > 0.0) {
    const double c0 =
        profile_cost_oracle(spec, 1, 2, eps_ref, beta, 320) / d12;
    for (auto &row : sigma)
      for (double &v : row)
        v *= c0;
  }
  return sigma;
}

struct Results {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

Results run_gamma_study(const ExperimentConfig &c, std::ostream &log) {
  const Grid g = Grid::unit_cube(c.n);
  const AnisotropySpec spec = c.make_anisotropy();
  // Labels 1 and 2 are antipodal wells for both anisotropy kinds, so their
  // spontaneous strains coincide and u = 0 is a compatible base
  // displacement for the recovery family.
  const LimitState limit =
      make_limit_state(VectorField(g), initial_labels(c, g), spec);

  StateVisitor visit;
  if (c.snapshots)
    visit = [&](std::size_t r, const DiffuseState &s) {
      write_vtk_vector(fjoin(c.outdir, indexed("mu", r, "vtk")),
                       "recovery magnetization", s.mu, "mu");
    };
  const StudyTable t = gamma_study(limit, c.eps_schedule, c.beta, c.law, spec,
                                   c.lambda, c.make_field(), visit);
  if (c.snapshots)
    write_vtk_labels(fjoin(c.outdir, "labels.vtk"), "base labels", limit.m,
                     "label");

  Results r;
  r.header = {"eps",           "elastic",       "magnetic",
              "stray",         "zeeman",        "total",
              "magnetic_per_area", "mu_l1",     "disp_w12",
              "layer_volume",  "elastic_limit", "magnetic_limit",
              "stray_limit",   "zeeman_limit",  "total_limit",
              "interface_area", "tension",      "profile_cost",
              "oracle_cost"};
  for (const StudyRow &row : t.rows)
    r.rows.push_back({format_number(row.eps), format_number(row.elastic),
                      format_number(row.magnetic), format_number(row.stray),
                      format_number(row.zeeman), format_number(row.total),
                      format_number(row.magnetic_per_area),
                      format_number(row.mu_l1), format_number(row.disp_w12),
                      format_number(row.layer_volume),
                      format_number(t.elastic_limit),
                      format_number(t.magnetic_limit),
                      format_number(t.stray_limit),
                      format_number(t.zeeman_limit),
                      format_number(t.total_limit),
                      format_number(t.interface_area),
                      format_number(t.tension), format_number(t.profile_cost),
                      format_number(t.oracle_cost)});
  log << "gamma-study: " << t.rows.size() << " schedule points, limit total "
      << format_number(t.total_limit) << '\n';
  return r;
}

Results run_stray_check(const ExperimentConfig &c, std::ostream &log) {
  const Grid g = Grid::unit_cube(c.n);
  StrayProblem p = make_stray_problem(g, 2);

  const Vec3 center{0.5, 0.5, 0.5};
  const Vec3 m{0, 0, 1};
  const double radius = 0.25;
  p.zeta = magnetization_datum(uniform_ball_magnetization(g, center, radius, m),
                               p);
  solve_stray_field(p);

  // Interior error against the classical -m/3, skipping a two-cell shell.
  const double shell = 2.0 * std::max({g.spacing.x, g.spacing.y, g.spacing.z});
  const int off[3] = {(p.padded.n[0] - g.n[0]) / 2,
                      (p.padded.n[1] - g.n[1]) / 2,
                      (p.padded.n[2] - g.n[2]) / 2};
  double worst = 0.0;
  for (int i = 0; i < g.n[0]; ++i)
    for (int j = 0; j < g.n[1]; ++j)
      for (int k = 0; k < g.n[2]; ++k) {
        if (norm(g.center(i, j, k) - center) > radius - shell)
          continue;
        const Vec3 h = p.h(i + off[0], j + off[1], k + off[2]);
        worst = std::max(worst, norm(h + m * (1.0 / 3.0)) / (norm(m) / 3.0));
      }

  const double energy = stray_energy(p.h, p.zeta);
  const double expected = (4.0 * std::numbers::pi / 9.0) * radius * radius *
                          radius * dot(m, m);
  const double identity = stray_identity_residual(p.h, p.zeta);

  if (c.snapshots)
    write_vtk_vector(fjoin(c.outdir, "h.vtk"), "stray field", p.h, "h");

  Results r;
  r.header = {"n",      "radius",          "interior_rel_error",
              "energy", "energy_expected", "energy_rel_error",
              "identity_rel_gap"};
  r.rows.push_back({format_number(c.n), format_number(radius),
                    format_number(worst), format_number(energy),
                    format_number(expected),
                    format_number(std::abs(energy - expected) / expected),
                    format_number(identity)});
  log << "stray-check: interior error " << format_number(worst)
      << ", energy error "
      << format_number(std::abs(energy - expected) / expected) << '\n';
  return r;
}

Results run_geodesic(const ExperimentConfig &c, std::ostream &log) {
  const AnisotropySpec spec = c.make_anisotropy();
  const Vec3 b1 = spec.wells[0];
  const Vec3 b2 = spec.wells[1];

  // Probe direction orthogonal to the first well (the "equator" point of a
  // uniaxial density), built from the least-aligned coordinate axis.
  const double ax = std::abs(b1.x), ay = std::abs(b1.y), az = std::abs(b1.z);
  Vec3 e{1, 0, 0};
  if (ay <= ax && ay <= az)
    e = {0, 1, 0};
  else if (az <= ax && az <= ay)
    e = {0, 0, 1};
  const Vec3 probe = normalized(cross(b1, e));

  Results r;
  r.header = {"level", "distance_12", "probe_f1"};
  for (int lvl = 2; lvl <= c.level; ++lvl) {
    const double d = geodesic_distance(spec, b1, b2, lvl);
    const SphereMesh mesh = SphereMesh::icosphere(lvl);
    const std::vector<double> f1 = well_distance_field(spec, 1, mesh);
    r.rows.push_back({format_number(lvl), format_number(d),
                      format_number(mesh.interpolate(f1, probe))});
  }
  log << "geodesic: d(b1,b2) = " << r.rows.back()[1] << " at level "
      << c.level << '\n';
  return r;
}

Results run_minimize_limit(const ExperimentConfig &c, std::ostream &log) {
  const Grid g = Grid::unit_cube(c.n);
  const AnisotropySpec spec = c.make_anisotropy();
  const std::vector<std::vector<double>> sigma =
      limit_tensions(spec, c.eps_schedule.back(), c.beta);

  AlternatingReport rep;
  const LimitState out = minimize_limit_alternating(
      make_limit_state(VectorField(g), initial_labels(c, g), spec), c.boundary,
      c.law, spec, sigma, c.lambda, c.make_field(), c.sweeps, &rep);

  if (c.snapshots) {
    write_vtk_labels(fjoin(c.outdir, "labels.vtk"), "minimizer labels", out.m,
                     "label");
    write_vtk_vector(fjoin(c.outdir, "u.vtk"), "minimizer displacement", out.u,
                     "u");
  }

  Results r;
  r.header = {"round", "total"};
  for (std::size_t i = 0; i < rep.energies.size(); ++i)
    r.rows.push_back({format_number(double(i + 1)),
                      format_number(rep.energies[i])});
  log << "minimize-limit: " << rep.rounds << " rounds, " << rep.flips
      << " flips, " << (rep.converged ? "converged" : "sweep cap reached")
      << '\n';
  return r;
}

// Shared by minimize-diffuse and almost-min-study: descend from a recovery
// state of `limit` at each eps of the schedule.
struct DescentRun {
  double eps = 0.0;
  DescentReport report;
  DiffuseState state;
};

std::vector<DescentRun> descend_schedule(const ExperimentConfig &c,
                                         const LimitState &limit,
                                         const AnisotropySpec &spec,
                                         std::ostream &log) {
  std::mt19937_64 rng(c.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const AppliedField f = c.make_field();

  std::vector<DescentRun> runs;
  for (std::size_t r = 0; r < c.eps_schedule.size(); ++r) {
    const double eps = c.eps_schedule[r];
    DiffuseState init = build_recovery(limit, eps, c.beta, spec, c.law);
    if (c.jitter > 0.0) {
      VectorField mu = init.mu;
      for (Vec3 &z : mu.data)
        z = normalized(z + Vec3{gauss(rng), gauss(rng), gauss(rng)} *
                               c.jitter);
      init = make_diffuse_state(init.u, mu, eps, c.beta, c.law);
    }
    DescentRun run;
    run.eps = eps;
    run.state = minimize_diffuse_descent(init, c.law, spec, c.lambda, f,
                                         c.steps, c.step_size, c.boundary,
                                         &run.report);
    log << "descent at eps = " << format_number(eps) << ": "
        << run.report.accepted << " accepted steps, "
        << run.report.certificate_rejections << " certificate rejections\n";
    if (c.snapshots) {
      write_vtk_vector(fjoin(c.outdir, indexed("mu", r, "vtk")),
                       "descent magnetization", run.state.mu, "mu");
      write_vtk_vector(fjoin(c.outdir, indexed("u", r, "vtk")),
                       "descent displacement", run.state.u, "u");
    }
    runs.push_back(std::move(run));
  }
  return runs;
}

Results run_minimize_diffuse(const ExperimentConfig &c, std::ostream &log) {
  const Grid g = Grid::unit_cube(c.n);
  const AnisotropySpec spec = c.make_anisotropy();
  const LabelField labels = initial_labels(c, g);
  // Equilibrate the displacement first so the recovery family starts from a
  // sensible limit pair.
  const VectorField u =
      solve_elastic_equilibrium(labels, c.boundary, spec, c.law, 1e-8);
  const LimitState limit = make_limit_state(u, labels, spec);

  Results r;
  r.header = {"eps", "step", "total"};
  for (const DescentRun &run : descend_schedule(c, limit, spec, log))
    for (std::size_t s = 0; s < run.report.energies.size(); ++s)
      r.rows.push_back({format_number(run.eps), format_number(double(s)),
                        format_number(run.report.energies[s])});
  return r;
}

Results run_almost_min_study(const ExperimentConfig &c, std::ostream &log) {
  const Grid g = Grid::unit_cube(c.n);
  const AnisotropySpec spec = c.make_anisotropy();
  const std::vector<std::vector<double>> sigma =
      limit_tensions(spec, c.eps_schedule.back(), c.beta);

  AlternatingReport arep;
  const LimitState best = minimize_limit_alternating(
      make_limit_state(VectorField(g), initial_labels(c, g), spec), c.boundary,
      c.law, spec, sigma, c.lambda, c.make_field(), c.sweeps, &arep);
  const double g_limit = arep.energies.back();
  log << "almost-min-study: limit total " << format_number(g_limit) << " after "
      << arep.rounds << " rounds\n";
  if (c.snapshots)
    write_vtk_labels(fjoin(c.outdir, "labels.vtk"), "limit minimizer labels",
                     best.m, "label");

  Results r;
  r.header = {"eps", "g_eps", "g_limit", "gap", "gap_fraction"};
  for (const DescentRun &run : descend_schedule(c, best, spec, log)) {
    const double g_eps = run.report.energies.back();
    const double gap = g_eps - g_limit;
    const double frac =
        std::abs(g_limit) > 0.0 ? std::abs(gap) / std::abs(g_limit) : 0.0;
    r.rows.push_back({format_number(run.eps), format_number(g_eps),
                      format_number(g_limit), format_number(gap),
                      format_number(frac)});
  }
  return r;
}

} // namespace

void ExperimentConfig::validate() const {
  if (!known_kind(kind)) {
    std::string all;
    for (const char *s : kKinds) {
      if (!all.empty())
        all += " | ";
      all += s;
    }
    fail("kind must be one of " + all + " (got '" + kind + "')");
  }
  law.validate();
  if (n < 4)
    fail("n must be >= 4 (got " + std::to_string(n) + ")");
  make_anisotropy(); // validates kind, kappas and axes
  if (!(beta > 0.0) || !(beta < beta_limit(law))) {
    std::ostringstream msg;
    msg << "beta must satisfy 0 < beta < min(2(q-1)/q, 1): beta = " << beta
        << " is outside (0, " << beta_limit(law) << ") for q = " << law.q;
    fail(msg.str());
  }
  if (eps_schedule.empty())
    fail("eps schedule must not be empty");
  for (std::size_t i = 0; i < eps_schedule.size(); ++i) {
    if (!(eps_schedule[i] > 0.0))
      fail("eps schedule entries must be positive");
    if (i > 0 && !(eps_schedule[i] < eps_schedule[i - 1]))
      fail("eps schedule must be strictly decreasing");
  }
  if (lambda < 0.0)
    fail("lambda must be >= 0");
  make_field(); // validates the field kind
  if (init_labels != "half-split" && init_labels != "constant")
    fail("init_labels must be half-split or constant (got '" + init_labels +
         "')");
  if (sweeps < 1)
    fail("sweeps must be >= 1");
  if (steps < 0)
    fail("steps must be >= 0");
  if (!(step_size > 0.0))
    fail("step_size must be > 0");
  if (level < 2 || level > 6)
    fail("level must be in [2, 6] (mesh size grows 4x per level)");
  if (jitter < 0.0)
    fail("jitter must be >= 0");
  if (outdir.empty())
    fail("outdir must not be empty");

  if (kind == "stray-check" && n % 2 != 0)
    fail("stray-check needs an even n so the padded grid stays centered");
  const bool needs_boundary = kind == "minimize-limit" ||
                              kind == "minimize-diffuse" ||
                              kind == "almost-min-study";
  if (needs_boundary && !boundary.any())
    fail(kind + " needs at least one Dirichlet face in boundary.faces");
}

AnisotropySpec ExperimentConfig::make_anisotropy() const {
  if (anisotropy == "uniaxial")
    return make_uniaxial(kappa, axis);
  if (anisotropy == "cubic")
    return make_cubic(kappa, kappa2, axes);
  fail("anisotropy kind must be uniaxial or cubic (got '" + anisotropy + "')");
}

AppliedField ExperimentConfig::make_field() const {
  if (field == "none")
    return {};
  if (field == "uniform") {
    const Vec3 v = field_vector;
    return [v](const Vec3 &) { return v; };
  }
  fail("field kind must be none or uniform (got '" + field + "')");
}

ExperimentConfig parse_config(const std::string &json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error &e) {
    fail(std::string("configuration is not valid JSON: ") + e.what());
  }

  ExperimentConfig c;
  try {
    if (!j.is_object())
      fail("configuration must be a JSON object");
    require_keys(j,
                 {"version", "kind", "n", "law", "anisotropy", "beta", "eps",
                  "lambda", "field", "boundary", "init_labels", "sweeps",
                  "steps", "step_size", "level", "jitter", "seed", "snapshots",
                  "outdir"},
                 "the configuration");

    if (!j.contains("kind"))
      fail("configuration needs a 'kind'");
    c.kind = j.at("kind").get<std::string>();
    c.n = j.value("n", c.n);

    if (j.contains("law")) {
      const json &l = j.at("law");
      require_keys(l, {"p", "q", "c_w", "a", "b"}, "law");
      c.law.p = l.value("p", c.law.p);
      c.law.q = l.value("q", c.law.q);
      c.law.c_w = l.value("c_w", c.law.c_w);
      c.law.a = l.value("a", c.law.a);
      c.law.b = l.value("b", c.law.b);
    }

    if (j.contains("anisotropy")) {
      const json &a = j.at("anisotropy");
      c.anisotropy = a.value("kind", c.anisotropy);
      if (c.anisotropy == "uniaxial") {
        require_keys(a, {"kind", "kappa", "axis"}, "anisotropy");
        c.kappa = a.value("kappa", c.kappa);
        if (a.contains("axis"))
          c.axis = parse_vec3(a.at("axis"), "anisotropy.axis");
      } else if (c.anisotropy == "cubic") {
        require_keys(a, {"kind", "kappa1", "kappa2", "axes"}, "anisotropy");
        c.kappa = a.value("kappa1", c.kappa);
        c.kappa2 = a.value("kappa2", c.kappa2);
        if (a.contains("axes")) {
          // The three easy axes, given as vectors (stored as columns).
          const json &ax = a.at("axes");
          if (!ax.is_array() || ax.size() != 3)
            fail("anisotropy.axes must list 3 axis vectors");
          for (int col = 0; col < 3; ++col) {
            const Vec3 v = parse_vec3(ax[col], "anisotropy.axes");
            c.axes(0, col) = v.x;
            c.axes(1, col) = v.y;
            c.axes(2, col) = v.z;
          }
        }
      }
      // Unknown anisotropy kinds fall through to validate() for the message.
    }

    c.beta = j.value("beta", c.beta);
    if (j.contains("eps")) {
      const json &e = j.at("eps");
      if (!e.is_array() || e.empty())
        fail("eps must be a non-empty array of numbers");
      c.eps_schedule.clear();
      for (const json &v : e)
        c.eps_schedule.push_back(v.get<double>());
    }
    c.lambda = j.value("lambda", c.lambda);

    if (j.contains("field")) {
      const json &f = j.at("field");
      require_keys(f, {"kind", "vector"}, "field");
      c.field = f.value("kind", c.field);
      if (f.contains("vector"))
        c.field_vector = parse_vec3(f.at("vector"), "field.vector");
    }

    if (j.contains("boundary")) {
      const json &b = j.at("boundary");
      require_keys(b, {"faces", "affine"}, "boundary");
      if (b.contains("faces")) {
        const json &faces = b.at("faces");
        if (!faces.is_array())
          fail("boundary.faces must be an array of face names");
        for (const json &fj : faces) {
          const std::string name = fj.get<std::string>();
          bool found = false;
          for (int i = 0; i < 6; ++i)
            if (name == kFaceNames[i]) {
              c.boundary.faces[i] = true;
              found = true;
            }
          if (!found)
            fail("boundary face must be one of x-,x+,y-,y+,z-,z+ (got '" +
                 name + "')");
        }
      }
      if (b.contains("affine"))
        c.boundary.affine = parse_mat3_rows(b.at("affine"), "boundary.affine");
    }

    c.init_labels = j.value("init_labels", c.init_labels);
    c.sweeps = j.value("sweeps", c.sweeps);
    c.steps = j.value("steps", c.steps);
    c.step_size = j.value("step_size", c.step_size);
    c.level = j.value("level", c.level);
    c.jitter = j.value("jitter", c.jitter);
    c.seed = j.value("seed", c.seed);
    c.snapshots = j.value("snapshots", c.snapshots);
    c.outdir = j.value("outdir", c.outdir);
  } catch (const json::exception &e) {
    fail(std::string("configuration type error: ") + e.what());
  }

  c.validate();
  return c;
}

ExperimentConfig load_config(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    fail("cannot read configuration file: " + path);
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str());
}

std::string manifest_json(const ExperimentConfig &c) {
  json j;
  j["version"] = kLibraryVersion;
  j["kind"] = c.kind;
  j["n"] = c.n;
  j["law"] = {{"p", c.law.p},
              {"q", c.law.q},
              {"c_w", c.law.c_w},
              {"a", c.law.a},
              {"b", c.law.b}};
  json a;
  a["kind"] = c.anisotropy;
  if (c.anisotropy == "cubic") {
    a["kappa1"] = c.kappa;
    a["kappa2"] = c.kappa2;
    json axes = json::array();
    for (int col = 0; col < 3; ++col)
      axes.push_back(
          json::array({c.axes(0, col), c.axes(1, col), c.axes(2, col)}));
    a["axes"] = axes;
  } else {
    a["kappa"] = c.kappa;
    a["axis"] = vec3_json(c.axis);
  }
  j["anisotropy"] = a;
  j["beta"] = c.beta;
  j["eps"] = c.eps_schedule;
  j["lambda"] = c.lambda;
  json f;
  f["kind"] = c.field;
  if (c.field == "uniform")
    f["vector"] = vec3_json(c.field_vector);
  j["field"] = f;
  json b;
  json faces = json::array();
  for (int i = 0; i < 6; ++i)
    if (c.boundary.faces[i])
      faces.push_back(kFaceNames[i]);
  b["faces"] = faces;
  b["affine"] = mat3_rows_json(c.boundary.affine);
  j["boundary"] = b;
  j["init_labels"] = c.init_labels;
  j["sweeps"] = c.sweeps;
  j["steps"] = c.steps;
  j["step_size"] = c.step_size;
  j["level"] = c.level;
  j["jitter"] = c.jitter;
  j["seed"] = c.seed;
  j["snapshots"] = c.snapshots;
  j["outdir"] = c.outdir;
  return j.dump(2) + "\n";
}

int run_experiment(const ExperimentConfig &config, std::ostream &log) {
  try {
    config.validate();
  } catch (const std::exception &e) {
    log << "configuration error: " << e.what() << '\n';
    return 2;
  }
  try {
    std::filesystem::create_directories(config.outdir);
    {
      std::ofstream mf(fjoin(config.outdir, "manifest.json"),
                       std::ios::binary);
      if (!mf)
        throw std::runtime_error("cannot write manifest.json in " +
                                 config.outdir);
      mf << manifest_json(config);
    }

    Results r;
    if (config.kind == "gamma-study")
      r = run_gamma_study(config, log);
    else if (config.kind == "stray-check")
      r = run_stray_check(config, log);
    else if (config.kind == "geodesic")
      r = run_geodesic(config, log);
    else if (config.kind == "minimize-limit")
      r = run_minimize_limit(config, log);
    else if (config.kind == "minimize-diffuse")
      r = run_minimize_diffuse(config, log);
    else
      r = run_almost_min_study(config, log);

    write_csv(fjoin(config.outdir, "results.csv"), r.header, r.rows);
    log << config.kind << ": wrote " << r.rows.size() << " rows to "
        << fjoin(config.outdir, "results.csv") << '\n';
    return 0;
  } catch (const std::invalid_argument &e) {
    log << "configuration error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception &e) {
    log << "numeric failure: " << e.what() << '\n';
    return 3;
  }
}

} // namespace magelas
