#include "magelas/minimize.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "magelas/material.hpp"
#include "magelas/stray.hpp"

namespace magelas {

namespace {

constexpr int kCgCap = 20000;
// Inner CG tolerance of the alternating minimizer: tight enough that the
// Galerkin error never competes with a single-cell flip increment.
constexpr double kAlternatingTol = 1e-8;

void check_labels(const LabelField &m, int wells, const char *who) {
  for (int l : m.data)
    if (l < 1 || l > wells)
      throw std::invalid_argument(std::string(who) +
                                  ": label outside 1..wells");
}

std::vector<Mat3> well_strains(const AnisotropySpec &spec,
                               const MaterialLaw &law) {
  std::vector<Mat3> lam;
  lam.reserve(spec.wells.size());
  for (const Vec3 &b : spec.wells)
    lam.push_back(spontaneous_strain(b, law));
  return lam;
}

// Transposed one-dimensional derivative stencil: the value gathered at
// sample idx collects the coefficient every forward row assigns to that
// sample (interior rows read their two neighbours, the two boundary rows
// read their three nearest samples one-sidedly).
template <class Get>
double line_adjoint(const Get &get, int idx, int m, double h) {
  double acc = 0.0;
  if (idx >= 2 && idx <= m - 1) // interior row idx-1 reads idx with +1
    acc += get(idx - 1);
  if (idx <= m - 3)             // interior row idx+1 reads idx with -1
    acc -= get(idx + 1);
  if (idx == 0)
    acc -= 3.0 * get(0);
  if (idx == 1)
    acc += 4.0 * get(0);
  if (idx == 2)
    acc -= get(0);
  if (idx == m - 1)
    acc += 3.0 * get(m - 1);
  if (idx == m - 2)
    acc -= 4.0 * get(m - 1);
  if (idx == m - 3)
    acc += get(m - 1);
  return acc / (2.0 * h);
}

double field_dot(const VectorField &a, const VectorField &b) {
  return deterministic_cell_sum(a.grid,
                                [&](std::size_t c) { return dot(a[c], b[c]); });
}

// 1 on the cells pinned by the Dirichlet slabs, 0 elsewhere.
std::vector<char> dirichlet_mask(const Grid &g, const BoundarySpec &bc) {
  std::vector<char> pinned(g.size(), 0);
  if (!bc.any())
    return pinned;
  for (int i = 0; i < g.n[0]; ++i)
    for (int j = 0; j < g.n[1]; ++j)
      for (int k = 0; k < g.n[2]; ++k)
        if (on_dirichlet_boundary(g, bc, i, j, k))
          pinned[g.index(i, j, k)] = 1;
  return pinned;
}

} // namespace

VectorField gradient_adjoint(const MatrixField &t) {
  const Grid &g = t.grid;
  g.validate();
  VectorField out(g);
  for (int i = 0; i < g.n[0]; ++i)
    for (int j = 0; j < g.n[1]; ++j)
      for (int k = 0; k < g.n[2]; ++k) {
        Vec3 acc;
        for (int r = 0; r < 3; ++r)
          acc[r] =
              line_adjoint([&](int s) { return t(s, j, k)(r, 0); }, i, g.n[0],
                           g.spacing.x) +
              line_adjoint([&](int s) { return t(i, s, k)(r, 1); }, j, g.n[1],
                           g.spacing.y) +
              line_adjoint([&](int s) { return t(i, j, s)(r, 2); }, k, g.n[2],
                           g.spacing.z);
        out(i, j, k) = acc;
      }
  return out;
}

VectorField solve_elastic_equilibrium(const LabelField &m,
                                      const BoundarySpec &bc,
                                      const AnisotropySpec &spec,
                                      const MaterialLaw &law, double tol,
                                      std::vector<double> *energy_trace) {
  law.validate();
  spec.validate();
  check_labels(m, int(spec.wells.size()), "solve_elastic_equilibrium");
  if (!bc.any())
    throw std::invalid_argument(
        "solve_elastic_equilibrium: at least one Dirichlet face is required");
  if (!(tol > 0.0))
    throw std::invalid_argument(
        "solve_elastic_equilibrium: tol must be positive");

  const Grid &g = m.grid;
  const double vol = g.cell_volume();
  const double tik = 1e-10;
  const std::vector<Mat3> lam = well_strains(spec, law);
  const std::vector<char> pinned = dirichlet_mask(g, bc);

  // Split u = u_D + v with the affine datum extended to every cell; v then
  // carries homogeneous data on the pinned slabs.
  VectorField ud(g);
  for (int i = 0; i < g.n[0]; ++i)
    for (int j = 0; j < g.n[1]; ++j)
      for (int k = 0; k < g.n[2]; ++k)
        ud(i, j, k) = bc.datum(g.center(i, j, k));

  // Reduced operator v -> P (D^T C_W D + tik) P v, matrix-free.
  const auto apply = [&](const VectorField &v) {
    MatrixField s = gradient(v);
    for (Mat3 &e : s.data)
      e = elastic_tensor_apply(e, law);
    VectorField av = gradient_adjoint(s);
    for (std::size_t c = 0; c < g.size(); ++c)
      av[c] = pinned[c] ? Vec3{} : (av[c] + v[c] * tik) * vol;
    return av;
  };

  // Right-hand side: minus the energy gradient at v = 0.
  VectorField b;
  {
    MatrixField s = gradient(ud);
    for (std::size_t c = 0; c < g.size(); ++c)
      s[c] = elastic_tensor_apply(s[c] - lam[m[c] - 1], law);
    b = gradient_adjoint(s);
    for (std::size_t c = 0; c < g.size(); ++c)
      b[c] = pinned[c] ? Vec3{} : b[c] * (-vol);
  }

  const auto energy_of = [&](const VectorField &v) {
    VectorField u = ud;
    for (std::size_t c = 0; c < g.size(); ++c)
      u[c] += v[c];
    const MatrixField s = symmetric_gradient(u);
    return 0.5 * vol * deterministic_cell_sum(g, [&](std::size_t c) {
             return quadratic_form(s[c] - lam[m[c] - 1], law);
           });
  };

  VectorField v(g);
  VectorField r = b;
  double rr = field_dot(r, r);
  const double rr0 = rr;
  const double stop = tol * tol * rr0;
  if (energy_trace) {
    energy_trace->clear();
    energy_trace->push_back(energy_of(v));
  }
  VectorField p = r;
  int it = 0;
  while (rr > stop) {
    if (++it > kCgCap)
      throw std::runtime_error(
          "solve_elastic_equilibrium: conjugate gradients exceeded " +
          std::to_string(kCgCap) + " iterations (relative residual " +
          std::to_string(std::sqrt(rr / rr0)) + ")");
    const VectorField ap = apply(p);
    const double pap = field_dot(p, ap);
    if (!(pap > 0.0))
      throw std::runtime_error("solve_elastic_equilibrium: search direction "
                               "with nonpositive curvature");
    const double alpha = rr / pap;
    for (std::size_t c = 0; c < g.size(); ++c) {
      v[c] += p[c] * alpha;
      r[c] -= ap[c] * alpha;
    }
    const double rr_next = field_dot(r, r);
    const double beta = rr_next / rr;
    rr = rr_next;
    for (std::size_t c = 0; c < g.size(); ++c)
      p[c] = r[c] + p[c] * beta;
    if (energy_trace)
      energy_trace->push_back(energy_of(v));
  }
  for (std::size_t c = 0; c < g.size(); ++c)
    ud[c] += v[c];
  return ud;
}

LimitState minimize_limit_alternating(const LimitState &init,
                                      const BoundarySpec &bc,
                                      const MaterialLaw &law,
                                      const AnisotropySpec &spec,
                                      const std::vector<std::vector<double>> &sigma,
                                      double lambda, const AppliedField &f,
                                      int sweeps, AlternatingReport *report) {
  law.validate();
  spec.validate();
  if (lambda < 0.0)
    throw std::invalid_argument(
        "minimize_limit_alternating: lambda must be >= 0");
  if (sweeps < 1)
    throw std::invalid_argument(
        "minimize_limit_alternating: sweeps must be >= 1");
  const int nwell = int(spec.wells.size());
  check_labels(init.m, nwell, "minimize_limit_alternating");
  if (int(sigma.size()) != nwell)
    throw std::invalid_argument("minimize_limit_alternating: tension table "
                                "size does not match the well count");
  magnetic_limit(init.m, sigma); // validates the table shape up front

  const Grid &g = init.m.grid;
  const double vol = g.cell_volume();
  const double ax = g.spacing.y * g.spacing.z; // face areas by normal axis
  const double ay = g.spacing.x * g.spacing.z;
  const double az = g.spacing.x * g.spacing.y;
  const std::vector<Mat3> lam = well_strains(spec, law);

  VectorField zf; // applied field sampled at the identity configuration
  if (f) {
    zf = VectorField(g);
    for (int i = 0; i < g.n[0]; ++i)
      for (int j = 0; j < g.n[1]; ++j)
        for (int k = 0; k < g.n[2]; ++k)
          zf(i, j, k) = f(g.center(i, j, k));
  }

  LabelField m = init.m;
  LimitState kept;
  double kept_total = 0.0;
  bool have_kept = false;
  AlternatingReport rep;

  for (int round = 1; round <= sweeps; ++round) {
    VectorField u =
        solve_elastic_equilibrium(m, bc, spec, law, kAlternatingTol);
    const MatrixField strain = symmetric_gradient(u);

    // Stray field of the incoming labels, frozen across this sweep; flips
    // see it only through the first variation -2 h . delta_zeta.
    StrayProblem sp;
    std::array<int, 3> off{{0, 0, 0}};
    if (lambda > 0.0) {
      sp = make_stray_problem(g, deep_padding(g));
      VectorField mvec(g);
      for (std::size_t c = 0; c < g.size(); ++c)
        mvec[c] = spec.wells[m[c] - 1];
      sp.zeta = magnetization_datum(mvec, sp);
      solve_stray_field(sp);
      for (int a = 0; a < 3; ++a)
        off[a] = (sp.padded.n[a] - g.n[a]) / 2;
    }

    long flips = 0;
    // Red cells then black cells, each subset in lexicographic order, so a
    // cell never competes with a simultaneously updated face neighbour.
    for (int color = 0; color < 2; ++color)
      for (int i = 0; i < g.n[0]; ++i)
        for (int j = 0; j < g.n[1]; ++j)
          for (int k = 0; k < g.n[2]; ++k) {
            if (((i + j + k) & 1) != color)
              continue;
            const std::size_t c = g.index(i, j, k);
            const int cur = m[c];
            const Mat3 ec = strain[c];
            const double w_cur = quadratic_form(ec - lam[cur - 1], law);
            double best_delta = 0.0;
            int best = cur;
            for (int t = 1; t <= nwell; ++t) {
              if (t == cur)
                continue;
              double d =
                  0.5 * vol * (quadratic_form(ec - lam[t - 1], law) - w_cur);
              const auto face = [&](int ni, int nj, int nk, double area) {
                if (ni < 0 || nj < 0 || nk < 0 || ni >= g.n[0] ||
                    nj >= g.n[1] || nk >= g.n[2])
                  return;
                const int nb = m(ni, nj, nk);
                d += area * (sigma[t - 1][nb - 1] - sigma[cur - 1][nb - 1]);
              };
              face(i - 1, j, k, ax);
              face(i + 1, j, k, ax);
              face(i, j - 1, k, ay);
              face(i, j + 1, k, ay);
              face(i, j, k - 1, az);
              face(i, j, k + 1, az);
              const Vec3 db = spec.wells[t - 1] - spec.wells[cur - 1];
              if (lambda > 0.0)
                d -= 2.0 * lambda * vol *
                     dot(sp.h(i + off[0], j + off[1], k + off[2]), db);
              if (f)
                d -= vol * dot(zf[c], db);
              if (d < best_delta) {
                best_delta = d;
                best = t;
              }
            }
            if (best != cur) {
              m[c] = best;
              ++flips;
            }
          }

    const LimitState cand = make_limit_state(u, m, spec);
    const double total = total_limit(cand, law, spec, sigma, lambda, f);
    if (have_kept && total > kept_total)
      break; // frozen-field sweep overshot; keep the previous round's state
    kept = cand;
    kept_total = total;
    have_kept = true;
    rep.rounds = round;
    rep.flips += flips;
    rep.energies.push_back(total);
    if (flips == 0) {
      rep.converged = true;
      break;
    }
  }
  if (report)
    *report = rep;
  return kept;
}

void diffuse_total_gradient(const DiffuseState &state, const MaterialLaw &law,
                            const AnisotropySpec &spec, double lambda,
                            const AppliedField &f, VectorField *grad_u,
                            VectorField *grad_mu) {
  law.validate();
  spec.validate();
  if (lambda < 0.0)
    throw std::invalid_argument("diffuse_total_gradient: lambda must be >= 0");
  const Grid &g = state.u.grid;
  const double vol = g.cell_volume();
  const double eps = state.eps;
  const Deformation def = build_deformation(state.u, eps);
  if (!def.certified)
    throw std::invalid_argument(
        "diffuse_total_gradient: injectivity certificate does not hold "
        "(need eps <= 1/(2L))");
  const MatrixField dmu = gradient(state.mu);
  const double w_phi = std::pow(eps, -state.beta);
  const double w_exc = std::pow(eps, state.beta);

  // Stray field of the current datum, read back at each cell's image, for
  // the frozen-field sensitivity with respect to mu.
  VectorField himg;
  if (lambda > 0.0) {
    StrayProblem p = make_stray_problem(g, deep_padding(g));
    p.zeta = magnetization_datum(def, state.mu, p);
    solve_stray_field(p);
    himg = VectorField(g);
    const Grid &pg = p.padded;
    for (std::size_t c = 0; c < g.size(); ++c) {
      // Same assignment cell as the datum deposit.
      const Vec3 pos = def.y[c];
      const int ii = int(std::floor((pos.x - pg.origin.x) / pg.spacing.x));
      const int jj = int(std::floor((pos.y - pg.origin.y) / pg.spacing.y));
      const int kk = int(std::floor((pos.z - pg.origin.z) / pg.spacing.z));
      himg[c] = p.h(ii, jj, kk);
    }
  }

  MatrixField pfield(g); // cell sensitivity with respect to F
  MatrixField xfield(g); // cell sensitivity with respect to Dmu
  VectorField gmu(g);    // pointwise mu parts (per unit volume)
  VectorField gup(g);    // pointwise u parts (already scaled by vol)
  for (std::size_t c = 0; c < g.size(); ++c) {
    const Mat3 fm = Mat3::identity() + def.grad_u[c] * eps;
    const double jac = det(fm);
    const Mat3 finv = inverse(fm);
    const Mat3 cof = cofactor(fm);
    const Vec3 mu = state.mu[c];

    // Scaled elastic part, W(Lambda_eps^{-1}(mu) F) / eps^2.
    const Mat3 a = scaled_strain_inverse(mu, eps, law);
    const Mat3 wp = stored_energy_gradient(a * fm, law);
    Mat3 pc = transpose(a) * wp * (1.0 / (eps * eps));
    Vec3 gm;
    for (int k = 0; k < 3; ++k)
      gm[k] = ddot(wp, scaled_strain_inverse_deriv(mu, eps, law, k) * fm) /
              (eps * eps);

    // Anisotropy, eps^-beta Phi(F^T mu) det F.
    const Vec3 pullback = transpose(fm) * mu;
    const Vec3 gphi = spec.grad_phi(pullback);
    pc += (outer(mu, gphi) * jac + cof * spec.phi(pullback)) * w_phi;
    gm += (fm * gphi) * (w_phi * jac);

    // Exchange, eps^beta |Dmu F^{-1}|^2 det F.
    const Mat3 kmat = dmu[c] * finv;
    pc += (transpose(kmat) * kmat * transpose(finv) * (-2.0 * jac) +
           cof * ddot(kmat, kmat)) *
          w_exc;
    xfield[c] = kmat * transpose(finv) * (2.0 * w_exc * jac);

    // Zeeman, -f(y) . mu det F; the applied field's Jacobian at the image
    // point by central differences (f is an opaque callable).
    if (f) {
      const Vec3 fy = f(def.y[c]);
      pc -= cof * dot(fy, mu);
      gm -= fy * jac;
      const double step = 1e-6;
      Mat3 dfy;
      for (int d = 0; d < 3; ++d) {
        Vec3 e;
        e[d] = step;
        const Vec3 fp = f(def.y[c] + e);
        const Vec3 fn = f(def.y[c] - e);
        for (int r = 0; r < 3; ++r)
          dfy(r, d) = (fp[r] - fn[r]) / (2.0 * step);
      }
      gup[c] = transpose(dfy) * mu * (-jac * eps * vol);
    }

    // Stray term, frozen-field variation: the datum carries mu / det F.
    if (lambda > 0.0)
      gm += himg[c] * (-2.0 * lambda / jac);

    pfield[c] = pc;
    gmu[c] = gm;
  }

  if (grad_u) {
    *grad_u = gradient_adjoint(pfield);
    for (std::size_t c = 0; c < g.size(); ++c)
      (*grad_u)[c] = (*grad_u)[c] * (eps * vol) + gup[c];
  }
  if (grad_mu) {
    *grad_mu = gradient_adjoint(xfield);
    for (std::size_t c = 0; c < g.size(); ++c)
      (*grad_mu)[c] = ((*grad_mu)[c] + gmu[c]) * vol;
  }
}

DiffuseState minimize_diffuse_descent(const DiffuseState &init,
                                      const MaterialLaw &law,
                                      const AnisotropySpec &spec,
                                      double lambda, const AppliedField &f,
                                      int steps, double step_size,
                                      const BoundarySpec &bc,
                                      DescentReport *report) {
  law.validate();
  spec.validate();
  if (lambda < 0.0)
    throw std::invalid_argument(
        "minimize_diffuse_descent: lambda must be >= 0");
  if (steps < 0)
    throw std::invalid_argument(
        "minimize_diffuse_descent: steps must be >= 0");
  if (!(step_size > 0.0))
    throw std::invalid_argument(
        "minimize_diffuse_descent: step size must be positive");

  const Grid &g = init.u.grid;
  const std::vector<char> pinned = dirichlet_mask(g, bc);

  // Trial states outside the certificate (or past the padded stray box, or
  // orientation-reversing) are infeasible; backtracking retreats from them.
  enum class Score { kOk, kUncertified, kInfeasible };
  const auto evaluate = [&](const DiffuseState &s, double *total) {
    const Deformation def = build_deformation(s.u, s.eps);
    if (!def.certified)
      return Score::kUncertified;
    double val = elastic_diffuse(s, law, def);
    if (!std::isfinite(val))
      return Score::kInfeasible;
    val += magnetic_diffuse(s, spec, def);
    if (lambda > 0.0) {
      StrayProblem p = make_stray_problem(g, deep_padding(g));
      try {
        p.zeta = magnetization_datum(def, s.mu, p);
      } catch (const std::domain_error &) {
        return Score::kInfeasible; // image left the padded box
      }
      solve_stray_field(p);
      val += lambda * stray_energy(p.h, p.zeta);
    }
    if (f)
      val -= deterministic_cell_sum(g, [&](std::size_t c) {
               const Mat3 fm = Mat3::identity() + def.grad_u[c] * s.eps;
               return dot(f(def.y[c]), s.mu[c]) * det(fm);
             }) *
             g.cell_volume();
    *total = val;
    return Score::kOk;
  };

  DiffuseState cur = init;
  double cur_total = 0.0;
  if (evaluate(cur, &cur_total) != Score::kOk)
    throw std::invalid_argument(
        "minimize_diffuse_descent: initial state is infeasible "
        "(certificate or orientation fails)");
  if (report) {
    *report = DescentReport{};
    report->energies.push_back(cur_total);
  }

  double trial_step = step_size;
  for (int k = 0; k < steps; ++k) {
    VectorField gu, gm;
    diffuse_total_gradient(cur, law, spec, lambda, f, &gu, &gm);
    bool accepted = false;
    double s = trial_step;
    for (int half = 0; half < 40 && !accepted; ++half, s *= 0.5) {
      DiffuseState trial = cur;
      for (std::size_t c = 0; c < g.size(); ++c) {
        if (!pinned[c])
          trial.u[c] -= gu[c] * s;
        const Vec3 moved = trial.mu[c] - gm[c] * s;
        const double n = norm(moved);
        if (n > 1e-12)
          trial.mu[c] = moved / n;
      }
      double trial_total = 0.0;
      const Score score = evaluate(trial, &trial_total);
      if (score == Score::kUncertified) {
        if (report)
          ++report->certificate_rejections;
        continue;
      }
      if (score == Score::kInfeasible)
        continue;
      if (trial_total < cur_total) {
        cur = std::move(trial);
        cur_total = trial_total;
        accepted = true;
        trial_step = 2.0 * s;
        if (report) {
          ++report->accepted;
          report->energies.push_back(cur_total);
        }
      }
    }
    if (!accepted)
      break; // no decrease at any admissible step size
  }
  return make_diffuse_state(std::move(cur.u), std::move(cur.mu), init.eps,
                            init.beta, law);
}

} // namespace magelas
