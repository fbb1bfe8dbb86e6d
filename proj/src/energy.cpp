#include "magelas/energy.hpp"

#include <atomic>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <thread>

namespace magelas {

namespace {

void check_same_grid(const Grid &a, const Grid &b, const char *who) {
  if (!a.same_layout(b))
    throw std::invalid_argument(std::string(who) +
                                ": fields live on different grids");
}

void check_finite(const VectorField &u, const char *who) {
  for (const Vec3 &v : u.data)
    if (!std::isfinite(v.x) || !std::isfinite(v.y) || !std::isfinite(v.z))
      throw std::invalid_argument(std::string(who) +
                                  ": field has nonfinite entries");
}

void check_unit(const VectorField &mu, const char *who) {
  for (const Vec3 &z : mu.data)
    if (std::abs(norm(z) - 1.0) > 1e-9)
      throw std::invalid_argument(std::string(who) +
                                  ": magnetization is not unit length");
}

void check_labels(const LabelField &m, int wells, const char *who) {
  for (int l : m.data)
    if (l < 1 || l > wells)
      throw std::invalid_argument(std::string(who) +
                                  ": label outside 1..wells");
}

// Certificate and grid guards shared by the diffuse evaluations.
void check_deformation(const DiffuseState &state, const Deformation &def,
                       const char *who) {
  if (!def.certified)
    throw std::invalid_argument(
        std::string(who) +
        ": injectivity certificate does not hold (need eps <= 1/(2L))");
  if (def.eps != state.eps)
    throw std::invalid_argument(std::string(who) +
                                ": deformation built at a different eps");
  check_same_grid(def.grad_u.grid, state.mu.grid, who);
}

void parallel_cells(std::size_t n,
                    const std::function<void(std::size_t, std::size_t)> &fn) {
  const int nw = std::max(1, thread_count());
  if (nw == 1 || n < 4096) {
    fn(0, n);
    return;
  }
  std::vector<std::thread> workers;
  const std::size_t chunk = (n + nw - 1) / nw;
  for (int w = 0; w < nw; ++w) {
    const std::size_t lo = std::min(n, std::size_t(w) * chunk);
    const std::size_t hi = std::min(n, lo + chunk);
    if (lo < hi)
      workers.emplace_back(fn, lo, hi);
  }
  for (auto &t : workers)
    t.join();
}

std::vector<Mat3> well_strains(const AnisotropySpec &spec,
                               const MaterialLaw &law) {
  std::vector<Mat3> lam;
  lam.reserve(spec.wells.size());
  for (const Vec3 &b : spec.wells)
    lam.push_back(spontaneous_strain(b, law));
  return lam;
}

} // namespace

double beta_limit(const MaterialLaw &law) {
  return std::min(2.0 * (law.q - 1.0) / law.q, 1.0);
}

DiffuseState make_diffuse_state(VectorField u, VectorField mu, double eps,
                                double beta, const MaterialLaw &law) {
  law.validate();
  check_same_grid(u.grid, mu.grid, "make_diffuse_state");
  check_finite(u, "make_diffuse_state");
  check_unit(mu, "make_diffuse_state");
  if (!(eps > 0.0))
    throw std::invalid_argument("make_diffuse_state: eps must be positive");
  if (!strain_admissible(eps, law))
    throw std::invalid_argument(
        "make_diffuse_state: scaled strain inadmissible at this eps "
        "(need 1 + eps a > 0 and 1 + eps b > 0)");
  if (!(beta > 0.0) || !(beta < beta_limit(law)))
    throw std::invalid_argument(
        "make_diffuse_state: beta must satisfy 0 < beta < min(2(q-1)/q, 1)");
  DiffuseState s;
  s.u = std::move(u);
  s.mu = std::move(mu);
  s.eps = eps;
  s.beta = beta;
  return s;
}

LimitState make_limit_state(VectorField u, LabelField m,
                            const AnisotropySpec &spec) {
  check_same_grid(u.grid, m.grid, "make_limit_state");
  check_finite(u, "make_limit_state");
  check_labels(m, int(spec.wells.size()), "make_limit_state");
  LimitState s;
  s.u = std::move(u);
  s.m = std::move(m);
  return s;
}

double elastic_cell_density(const Vec3 &mu, const Mat3 &f, double eps,
                            const MaterialLaw &law) {
  return stored_energy(scaled_strain_inverse(mu, eps, law) * f, law);
}

double elastic_diffuse(const DiffuseState &state, const MaterialLaw &law) {
  return elastic_diffuse(state, law, build_deformation(state.u, state.eps));
}

double elastic_diffuse(const DiffuseState &state, const MaterialLaw &law,
                       const Deformation &def) {
  check_deformation(state, def, "elastic_diffuse");
  const Grid &g = state.u.grid;
  std::atomic<bool> infinite{false};
  const double sum = deterministic_cell_sum(g, [&](std::size_t c) {
    const Mat3 f = Mat3::identity() + def.grad_u[c] * state.eps;
    const double w = elastic_cell_density(state.mu[c], f, state.eps, law);
    if (!std::isfinite(w)) {
      infinite.store(true, std::memory_order_relaxed);
      return 0.0;
    }
    return w;
  });
  if (infinite.load())
    return std::numeric_limits<double>::infinity();
  return sum * g.cell_volume() / (state.eps * state.eps);
}

double magnetic_diffuse(const DiffuseState &state, const AnisotropySpec &spec) {
  return magnetic_diffuse(state, spec, build_deformation(state.u, state.eps));
}

double magnetic_diffuse(const DiffuseState &state, const AnisotropySpec &spec,
                        const Deformation &def) {
  check_deformation(state, def, "magnetic_diffuse");
  const Grid &g = state.u.grid;
  const MatrixField dmu = gradient(state.mu);
  const double w_phi = std::pow(state.eps, -state.beta);
  const double w_exc = std::pow(state.eps, state.beta);
  std::atomic<bool> singular{false};
  const double sum = deterministic_cell_sum(g, [&](std::size_t c) {
    const Mat3 f = Mat3::identity() + def.grad_u[c] * state.eps;
    const double jac = det(f);
    if (!(jac > 1e-12)) {
      singular.store(true, std::memory_order_relaxed);
      return 0.0;
    }
    const Vec3 pullback = transpose(f) * state.mu[c];
    const Mat3 dm_eulerian = dmu[c] * inverse(f);
    return (w_phi * spec.phi(pullback) +
            w_exc * ddot(dm_eulerian, dm_eulerian)) *
           jac;
  });
  if (singular.load())
    throw std::runtime_error(
        "magnetic_diffuse: singular deformation gradient");
  return sum * g.cell_volume();
}

double elastic_limit(const LimitState &state, const MaterialLaw &law,
                     const AnisotropySpec &spec) {
  law.validate();
  check_same_grid(state.u.grid, state.m.grid, "elastic_limit");
  check_labels(state.m, int(spec.wells.size()), "elastic_limit");
  const std::vector<Mat3> lam = well_strains(spec, law);
  const MatrixField strain = symmetric_gradient(state.u);
  const double sum = deterministic_cell_sum(state.u.grid, [&](std::size_t c) {
    return quadratic_form(strain[c] - lam[state.m[c] - 1], law);
  });
  return 0.5 * sum * state.u.grid.cell_volume();
}

double magnetic_limit(const LabelField &m,
                      const std::vector<std::vector<double>> &sigma) {
  const int wells = int(sigma.size());
  for (int r = 0; r < wells; ++r) {
    if (int(sigma[r].size()) != wells)
      throw std::invalid_argument("magnetic_limit: tension table not square");
    if (sigma[r][r] != 0.0)
      throw std::invalid_argument(
          "magnetic_limit: tension table has a nonzero diagonal");
    for (int c = 0; c < r; ++c)
      if (std::abs(sigma[r][c] - sigma[c][r]) > 1e-12)
        throw std::invalid_argument(
            "magnetic_limit: tension table not symmetric");
  }
  check_labels(m, wells, "magnetic_limit");
  double value = 0.0;
  for (int i = 1; i <= wells; ++i)
    for (int j = i + 1; j <= wells; ++j)
      if (sigma[i - 1][j - 1] != 0.0)
        value += sigma[i - 1][j - 1] * interface_area(m, i, j);
  return value;
}

double lub_estimator(const VectorField &mu, const AnisotropySpec &spec,
                     const SphereMesh &mesh) {
  check_unit(mu, "lub_estimator");
  const Grid &g = mu.grid;
  const int wells = int(spec.wells.size());
  std::vector<VectorField> grads;
  grads.reserve(wells);
  for (int i = 1; i <= wells; ++i) {
    const std::vector<double> fi = well_distance_field(spec, i, mesh);
    ScalarField w(g);
    parallel_cells(g.size(), [&](std::size_t lo, std::size_t hi) {
      for (std::size_t c = lo; c < hi; ++c)
        w[c] = mesh.interpolate(fi, mu[c]);
    });
    grads.push_back(gradient(w));
  }
  const double sum = deterministic_cell_sum(g, [&](std::size_t c) {
    double best = 0.0;
    for (int i = 0; i < wells; ++i)
      best = std::max(best, norm(grads[i][c]));
    return best;
  });
  return sum * g.cell_volume();
}

double zeeman_energy(const VectorField &m, const ScalarField &mask,
                     const VectorField &f) {
  check_same_grid(m.grid, mask.grid, "zeeman_energy");
  check_same_grid(m.grid, f.grid, "zeeman_energy");
  const double sum = deterministic_cell_sum(m.grid, [&](std::size_t c) {
    return mask[c] != 0.0 ? mask[c] * dot(f[c], m[c]) : 0.0;
  });
  return sum * m.grid.cell_volume();
}

EnergyBreakdown diffuse_breakdown(const DiffuseState &state,
                                  const MaterialLaw &law,
                                  const AnisotropySpec &spec, double lambda,
                                  const AppliedField &f) {
  if (lambda < 0.0)
    throw std::invalid_argument("diffuse_breakdown: lambda must be >= 0");
  const Deformation def = build_deformation(state.u, state.eps);
  EnergyBreakdown b;
  b.lambda = lambda;
  b.elastic = elastic_diffuse(state, law, def);
  b.magnetic = magnetic_diffuse(state, spec, def);
  if (lambda > 0.0) {
    // The magnetization fills the whole reference box, so at padding 2 the
    // exterior field's tail past the padded grid is a ~5% energy deficit;
    // the deeper collar keeps the weak-form cross check comfortably inside
    // its tolerance for box-filling data.
    StrayProblem p = make_stray_problem(state.u.grid, deep_padding(state.u.grid));
    p.zeta = magnetization_datum(def, state.mu, p);
    solve_stray_field(p);
    b.stray = stray_energy(p.h, p.zeta);
  }
  if (f) {
    // Zeeman term pulled back to reference coordinates:
    // int f(y(x)) . mu(x) det F(x) dx.
    const Grid &g = state.u.grid;
    b.zeeman = deterministic_cell_sum(g, [&](std::size_t c) {
                 const Mat3 fm = Mat3::identity() + def.grad_u[c] * state.eps;
                 return dot(f(def.y[c]), state.mu[c]) * det(fm);
               }) *
               g.cell_volume();
  }
  return b;
}

double total_diffuse(const DiffuseState &state, const MaterialLaw &law,
                     const AnisotropySpec &spec, double lambda,
                     const AppliedField &f) {
  return diffuse_breakdown(state, law, spec, lambda, f).total();
}

EnergyBreakdown limit_breakdown(const LimitState &state, const MaterialLaw &law,
                                const AnisotropySpec &spec,
                                const std::vector<std::vector<double>> &sigma,
                                double lambda, const AppliedField &f) {
  if (lambda < 0.0)
    throw std::invalid_argument("limit_breakdown: lambda must be >= 0");
  EnergyBreakdown b;
  b.lambda = lambda;
  b.elastic = elastic_limit(state, law, spec);
  b.magnetic = magnetic_limit(state.m, sigma);
  const Grid &g = state.u.grid;
  if (lambda > 0.0 || f) {
    VectorField mvec(g);
    parallel_cells(g.size(), [&](std::size_t lo, std::size_t hi) {
      for (std::size_t c = lo; c < hi; ++c)
        mvec[c] = spec.wells[state.m[c] - 1];
    });
    if (lambda > 0.0) {
      // Same padding note as in diffuse_breakdown: box-filling data need a
      // deeper collar than the default.
      StrayProblem p = make_stray_problem(g, deep_padding(g));
      p.zeta = magnetization_datum(mvec, p);
      solve_stray_field(p);
      b.stray = stray_energy(p.h, p.zeta);
    }
    if (f)
      b.zeeman = deterministic_cell_sum(g, [&](std::size_t c) {
                   const int k = int(c % g.n[2]);
                   const int j = int((c / g.n[2]) % g.n[1]);
                   const int i = int(c / (std::size_t(g.n[1]) * g.n[2]));
                   return dot(f(g.center(i, j, k)), mvec[c]);
                 }) *
                 g.cell_volume();
  }
  return b;
}

double total_limit(const LimitState &state, const MaterialLaw &law,
                   const AnisotropySpec &spec,
                   const std::vector<std::vector<double>> &sigma, double lambda,
                   const AppliedField &f) {
  return limit_breakdown(state, law, spec, sigma, lambda, f).total();
}

} // namespace magelas
