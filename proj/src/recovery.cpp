#include "magelas/recovery.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <utility>

#include "magelas/grid.hpp"
#include "magelas/material.hpp"

namespace magelas {

namespace {

// Piecewise-linear evaluation of a transition profile at the signed layer
// coordinate s, renormalized onto the sphere; clamps to the wells outside
// the sampled range.
Vec3 profile_point(const TransitionProfile &prof, double s) {
  if (s <= prof.param.front())
    return prof.points.front();
  if (s >= prof.param.back())
    return prof.points.back();
  const auto it =
      std::upper_bound(prof.param.begin(), prof.param.end(), s);
  const std::size_t hi = std::size_t(it - prof.param.begin());
  const double ds = prof.param[hi] - prof.param[hi - 1];
  const double t = ds > 0.0 ? (s - prof.param[hi - 1]) / ds : 0.0;
  const Vec3 z = (1.0 - t) * prof.points[hi - 1] + t * prof.points[hi];
  const double len = norm(z);
  if (len < 1e-12)
    return prof.points[hi - 1]; // antipodal samples cannot occur within a step
  return (1.0 / len) * z;
}

void check_labels(const LabelField &m, const AnisotropySpec &spec,
                  const char *who) {
  const int wells = int(spec.wells.size());
  for (std::size_t c = 0; c < m.data.size(); ++c)
    if (m[c] < 1 || m[c] > wells)
      throw std::invalid_argument(std::string(who) +
                                  ": label field is not 1..M for this "
                                  "anisotropy");
}

} // namespace

DiffuseState build_recovery(const LimitState &limit, double eps, double beta,
                            const AnisotropySpec &spec,
                            const MaterialLaw &law) {
  spec.validate();
  law.validate();
  check_labels(limit.m, spec, "build_recovery");
  if (!limit.u.grid.same_layout(limit.m.grid))
    throw std::invalid_argument("build_recovery: displacement and label "
                                "grids differ");

  // Refuse uncertified eps before doing any work; the certificate is what
  // makes y = id + eps*u an admissible (injective, orientation-preserving)
  // deformation.
  const Deformation def = build_deformation(limit.u, eps);
  if (!def.certified)
    throw std::invalid_argument(
        "build_recovery: injectivity certificate does not hold (need eps <= "
        "1/(2L))");

  const Grid &g = limit.m.grid;
  const double layer = kProfileTheta * std::pow(eps, beta);
  const InterfaceDistance idist = interface_distance(limit.m);

  // Profiles for the label pairs actually smeared, keyed (i, j) with i < j.
  std::map<std::pair<int, int>, TransitionProfile> profiles;
  for (std::size_t c = 0; c < g.size(); ++c) {
    const int l = limit.m[c], p = idist.partner[c];
    if (idist.distance[c] >= layer || p < 1 || p == l)
      continue;
    const std::pair<int, int> key{std::min(l, p), std::max(l, p)};
    if (!profiles.count(key))
      profiles.emplace(key, optimal_profile(spec, key.first, key.second, eps,
                                            beta, 1001));
  }

  VectorField mu(g);
  for (std::size_t c = 0; c < g.size(); ++c) {
    const int l = limit.m[c], p = idist.partner[c];
    const double d = idist.distance[c];
    if (d >= layer || p < 1 || p == l) {
      mu[c] = spec.wells[l - 1];
      continue;
    }
    const int i = std::min(l, p), j = std::max(l, p);
    // The profile runs from well i at -layer to well j at +layer; a cell sits
    // on the side of its own label.
    const double s = (l == i) ? -d : d;
    mu[c] = profile_point(profiles.at({i, j}), s);
  }

  return make_diffuse_state(limit.u, mu, eps, beta, law);
}

RecoveryFamily build_recovery_family(const LimitState &limit,
                                     const std::vector<double> &schedule,
                                     double beta, const AnisotropySpec &spec,
                                     const MaterialLaw &law) {
  if (schedule.empty())
    throw std::invalid_argument("build_recovery_family: empty schedule");
  for (std::size_t r = 1; r < schedule.size(); ++r)
    if (!(schedule[r] < schedule[r - 1]))
      throw std::invalid_argument(
          "build_recovery_family: schedule must be strictly decreasing");

  RecoveryFamily fam;
  fam.base = limit;
  fam.eps = schedule;
  fam.beta = beta;
  fam.states.reserve(schedule.size());
  for (double eps : schedule)
    fam.states.push_back(build_recovery(limit, eps, beta, spec, law));
  return fam;
}

double magnetization_l1_distance(const VectorField &mu, const LabelField &m,
                                 const AnisotropySpec &spec) {
  if (!mu.grid.same_layout(m.grid))
    throw std::invalid_argument("magnetization_l1_distance: grids differ");
  check_labels(m, spec, "magnetization_l1_distance");
  const double sum = deterministic_cell_sum(
      m.grid, [&](std::size_t c) { return norm(mu[c] - spec.wells[m[c] - 1]); });
  return sum * m.grid.cell_volume();
}

double displacement_w12_distance(const VectorField &a, const VectorField &b) {
  if (!a.grid.same_layout(b.grid))
    throw std::invalid_argument("displacement_w12_distance: grids differ");
  VectorField diff(a.grid);
  for (std::size_t c = 0; c < diff.data.size(); ++c)
    diff[c] = a[c] - b[c];
  const MatrixField dd = gradient(diff);
  const double l2 = deterministic_cell_sum(
      a.grid, [&](std::size_t c) { return dot(diff[c], diff[c]); });
  const double h1 = deterministic_cell_sum(
      a.grid, [&](std::size_t c) { return ddot(dd[c], dd[c]); });
  return std::sqrt((l2 + h1) * a.grid.cell_volume());
}

double layer_volume(const VectorField &mu, const LabelField &m,
                    const AnisotropySpec &spec) {
  if (!mu.grid.same_layout(m.grid))
    throw std::invalid_argument("layer_volume: grids differ");
  check_labels(m, spec, "layer_volume");
  const double count = deterministic_cell_sum(m.grid, [&](std::size_t c) {
    const Vec3 w = spec.wells[m[c] - 1];
    return (mu[c].x == w.x && mu[c].y == w.y && mu[c].z == w.z) ? 0.0 : 1.0;
  });
  return count * m.grid.cell_volume();
}

StudyTable gamma_study(const LimitState &limit,
                       const std::vector<double> &schedule, double beta,
                       const MaterialLaw &law, const AnisotropySpec &spec,
                       double lambda, const AppliedField &f,
                       const StateVisitor &visit) {
  if (schedule.empty())
    throw std::invalid_argument("gamma_study: empty schedule");
  for (std::size_t r = 1; r < schedule.size(); ++r)
    if (!(schedule[r] < schedule[r - 1]))
      throw std::invalid_argument(
          "gamma_study: schedule must be strictly decreasing");
  if (!(beta > 0.0) || !(beta < beta_limit(law)))
    throw std::invalid_argument(
        "gamma_study: beta must satisfy 0 < beta < min(2(q-1)/q, 1)");
  if (lambda < 0.0)
    throw std::invalid_argument("gamma_study: lambda must be nonnegative");
  spec.validate();
  check_labels(limit.m, spec, "gamma_study");

  StudyTable table;

  const int wells = int(spec.wells.size());
  double best_area = 0.0;
  for (int i = 1; i <= wells; ++i)
    for (int j = i + 1; j <= wells; ++j) {
      const double a = interface_area(limit.m, i, j);
      table.interface_area += a;
      if (a > best_area) {
        best_area = a;
        table.pair_i = i;
        table.pair_j = j;
      }
    }

  const std::vector<std::vector<double>> sigma =
      surface_tension_table(spec, kStudyTensionLevel);

  const EnergyBreakdown bl = limit_breakdown(limit, law, spec, sigma, lambda, f);
  table.elastic_limit = bl.elastic;
  table.magnetic_limit = bl.magnetic;
  table.stray_limit = bl.stray;
  table.zeeman_limit = bl.zeeman;
  table.total_limit = bl.total();

  if (table.pair_i > 0) {
    table.tension = sigma[table.pair_i - 1][table.pair_j - 1];
    table.profile_cost = optimal_profile(spec, table.pair_i, table.pair_j,
                                         schedule.back(), beta, 1001)
                             .cost;
    table.oracle_cost = profile_cost_oracle(spec, table.pair_i, table.pair_j,
                                            schedule.back(), beta, 320);
  }

  for (std::size_t r = 0; r < schedule.size(); ++r) {
    const DiffuseState state =
        build_recovery(limit, schedule[r], beta, spec, law);
    const EnergyBreakdown b = diffuse_breakdown(state, law, spec, lambda, f);
    StudyRow row;
    row.eps = schedule[r];
    row.elastic = b.elastic;
    row.magnetic = b.magnetic;
    row.stray = b.stray;
    row.zeeman = b.zeeman;
    row.total = b.total();
    row.magnetic_per_area =
        table.interface_area > 0.0 ? b.magnetic / table.interface_area : 0.0;
    row.mu_l1 = magnetization_l1_distance(state.mu, limit.m, spec);
    row.disp_w12 = displacement_w12_distance(state.u, limit.u);
    row.layer_volume = layer_volume(state.mu, limit.m, spec);
    table.rows.push_back(row);
    if (visit)
      visit(r, state);
  }
  return table;
}

} // namespace magelas
