#include "magelas/sphere.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <queue>
#include <stdexcept>
#include <string>

namespace magelas {

namespace {

double sqrt_phi(const AnisotropySpec &spec, const Vec3 &z) {
  // Phi can round off to a tiny negative value at the wells.
  return std::sqrt(std::max(spec.phi(z), 0.0));
}

// Deterministic unit vector orthogonal to z (used to fix one of the many
// geodesics between antipodal points).
Vec3 orthogonal_unit(const Vec3 &z) {
  const double ax = std::abs(z.x), ay = std::abs(z.y), az = std::abs(z.z);
  Vec3 e{1, 0, 0};
  if (ay <= ax && ay <= az)
    e = Vec3{0, 1, 0};
  else if (az <= ax && az <= ay)
    e = Vec3{0, 0, 1};
  return normalized(e - z * dot(e, z));
}

// Great-circle arc z(t) = z0 cos(t theta) + w sin(t theta), t in [0,1].
struct Arc {
  Vec3 z0, w;
  double theta = 0.0;
  Vec3 at(double t) const {
    const double a = theta * t;
    return z0 * std::cos(a) + w * std::sin(a);
  }
};

Arc make_arc(const Vec3 &z0, const Vec3 &z1) {
  Arc arc;
  arc.z0 = z0;
  const double c = std::clamp(dot(z0, z1), -1.0, 1.0);
  arc.theta = std::acos(c);
  if (arc.theta < 1e-12 || arc.theta > M_PI - 1e-9) {
    arc.w = orthogonal_unit(z0);
    if (arc.theta > M_PI - 1e-9)
      arc.theta = M_PI;
  } else {
    arc.w = normalized(z1 - z0 * c);
  }
  return arc;
}

bool lex_less(const Vec3 &a, const Vec3 &b) {
  if (a.x != b.x)
    return a.x < b.x;
  if (a.y != b.y)
    return a.y < b.y;
  return a.z < b.z;
}

void check_unit(const Vec3 &z, const char *who) {
  if (std::abs(norm(z) - 1.0) > 1e-9)
    throw std::invalid_argument(std::string(who) +
                                ": direction must be a unit vector");
}

const SphereMesh &cached_mesh(int level) {
  static std::mutex guard;
  static std::map<int, std::unique_ptr<SphereMesh>> cache;
  std::lock_guard<std::mutex> lock(guard);
  auto &slot = cache[level];
  if (!slot)
    slot = std::make_unique<SphereMesh>(SphereMesh::icosphere(level));
  return *slot;
}

// Average-endpoint action of a straight (chordal) segment.
double segment_cost(const AnisotropySpec &spec, const Vec3 &a, const Vec3 &b) {
  return 0.5 * (sqrt_phi(spec, a) + sqrt_phi(spec, b)) * norm(a - b);
}

double polyline_action(const AnisotropySpec &spec,
                       const std::vector<Vec3> &p) {
  double a = 0.0;
  for (std::size_t i = 0; i + 1 < p.size(); ++i)
    a += segment_cost(spec, p[i], p[i + 1]);
  return a;
}

// Action of the polyline lifted segmentwise onto great-circle arcs, with a
// composite midpoint rule in arc length.  The chordal sum above drives the
// polish, but chords undercut arcs by O(1/k^2) for k segments, and the
// running minimum across refinement levels would lock that bias in; every
// *reported* path value therefore goes through this evaluator, which is the
// action of an admissible path up to quadrature error.
double path_action_fine(const AnisotropySpec &spec,
                        const std::vector<Vec3> &p) {
  constexpr int kNodes = 8; // midpoint nodes per segment
  double a = 0.0;
  for (std::size_t i = 0; i + 1 < p.size(); ++i) {
    const Arc arc = make_arc(p[i], p[i + 1]);
    if (arc.theta < 1e-15)
      continue;
    double s = 0.0;
    for (int k = 0; k < kNodes; ++k)
      s += sqrt_phi(spec, arc.at((k + 0.5) / kNodes));
    a += arc.theta * s / kNodes;
  }
  return a;
}

// Chord-lerp-and-project interpolation between two nearby unit vectors.
Vec3 sphere_lerp(const Vec3 &a, const Vec3 &b, double t) {
  return normalized(a * (1.0 - t) + b * t);
}

// Resample a polyline to `segments`+1 points equidistributed in chord length.
std::vector<Vec3> resample_polyline(const std::vector<Vec3> &p, int segments) {
  std::vector<double> cum(p.size(), 0.0);
  for (std::size_t i = 1; i < p.size(); ++i)
    cum[i] = cum[i - 1] + norm(p[i] - p[i - 1]);
  const double total = cum.back();
  std::vector<Vec3> out;
  out.reserve(segments + 1);
  out.push_back(p.front());
  std::size_t seg = 0;
  for (int k = 1; k < segments; ++k) {
    const double target = total * k / segments;
    while (seg + 2 < p.size() && cum[seg + 1] < target)
      ++seg;
    const double len = cum[seg + 1] - cum[seg];
    const double t = len > 0.0 ? (target - cum[seg]) / len : 0.0;
    out.push_back(sphere_lerp(p[seg], p[seg + 1], t));
  }
  out.push_back(p.back());
  return out;
}

// Projected-gradient polish of the discrete action with fixed endpoints:
// up to 200 sweeps, step 0.1 h^2, stop when a sweep gains less than 1e-10.
double relax_path(const AnisotropySpec &spec, std::vector<Vec3> &p,
                  double mesh_h) {
  const double step = 0.1 * mesh_h * mesh_h;
  double prev = polyline_action(spec, p);
  for (int sweep = 0; sweep < 200; ++sweep) {
    for (std::size_t i = 1; i + 1 < p.size(); ++i) {
      const Vec3 &a = p[i - 1];
      const Vec3 &c = p[i + 1];
      Vec3 &x = p[i];
      const double la = std::max(norm(x - a), 1e-30);
      const double lc = std::max(norm(x - c), 1e-30);
      const double sx = sqrt_phi(spec, x);
      const double wa = 0.5 * (sqrt_phi(spec, a) + sx);
      const double wc = 0.5 * (sqrt_phi(spec, c) + sx);
      // d sqrt(Phi) = grad Phi / (2 sqrt(Phi)), floored near the wells
      const Vec3 dsp = spec.grad_phi(x) * (0.5 / std::max(sx, 1e-9));
      Vec3 g = dsp * (0.5 * (la + lc)) + (x - a) * (wa / la) +
               (x - c) * (wc / lc);
      g = g - x * dot(g, x); // keep the step tangential
      x = normalized(x - g * step);
    }
    const double cur = polyline_action(spec, p);
    if (prev - cur < 1e-10) {
      prev = std::min(prev, cur);
      break;
    }
    prev = cur;
  }
  return prev;
}

struct GraphPath {
  double value = 0.0;
  std::vector<Vec3> points;
};

// Dijkstra between two off-mesh endpoints attached through the vertices of
// their containing faces (plus those vertices' neighbors, for safety).
GraphPath graph_shortest_path(const AnisotropySpec &spec,
                              const SphereMesh &mesh, const Vec3 &z0,
                              const Vec3 &z1) {
  const int nv = int(mesh.vertices.size());
  const int src = nv, dst = nv + 1;
  std::vector<double> sp(nv);
  for (int v = 0; v < nv; ++v)
    sp[v] = sqrt_phi(spec, mesh.vertices[v]);

  auto attach = [&](const Vec3 &z) {
    std::vector<int> verts;
    const int f = mesh.locate_face(z);
    for (int v : mesh.faces[f]) {
      verts.push_back(v);
      for (const auto &nb : mesh.neighbors[v])
        verts.push_back(nb.first);
    }
    std::sort(verts.begin(), verts.end());
    verts.erase(std::unique(verts.begin(), verts.end()), verts.end());
    return verts;
  };
  const std::vector<int> from_src = attach(z0);
  const std::vector<int> from_dst = attach(z1);
  const double sp0 = sqrt_phi(spec, z0), sp1 = sqrt_phi(spec, z1);

  std::vector<double> dist(nv + 2, std::numeric_limits<double>::infinity());
  std::vector<int> prev(nv + 2, -1);
  using Item = std::pair<double, int>;
  std::priority_queue<Item, std::vector<Item>, std::greater<Item>> pq;
  dist[src] = 0.0;
  pq.push({0.0, src});
  while (!pq.empty()) {
    auto [d, u] = pq.top();
    pq.pop();
    if (d > dist[u])
      continue;
    if (u == dst)
      break;
    auto relax_to = [&](int v, double w) {
      if (d + w < dist[v]) {
        dist[v] = d + w;
        prev[v] = u;
        pq.push({dist[v], v});
      }
    };
    if (u == src) {
      for (int v : from_src)
        relax_to(v, 0.5 * (sp0 + sp[v]) * norm(z0 - mesh.vertices[v]));
    } else {
      for (const auto &[v, len] : mesh.neighbors[u])
        relax_to(v, 0.5 * (sp[u] + sp[v]) * len);
      // terminal hop
      if (std::find(from_dst.begin(), from_dst.end(), u) != from_dst.end())
        relax_to(dst, 0.5 * (sp[u] + sp1) * norm(z1 - mesh.vertices[u]));
    }
  }

  GraphPath out;
  out.value = dist[dst];
  std::vector<int> chain;
  for (int v = dst; v != -1; v = prev[v])
    chain.push_back(v);
  std::reverse(chain.begin(), chain.end());
  for (int v : chain) {
    if (v == src)
      out.points.push_back(z0);
    else if (v == dst)
      out.points.push_back(z1);
    else
      out.points.push_back(mesh.vertices[v]);
  }
  return out;
}

// Graph value at one refinement level, polished by path relaxation.
double single_level_distance(const AnisotropySpec &spec, int level,
                             const Vec3 &z0, const Vec3 &z1,
                             std::vector<Vec3> *path_out = nullptr) {
  const SphereMesh &mesh = cached_mesh(level);
  GraphPath gp = graph_shortest_path(spec, mesh, z0, z1);
  const double h = mesh.mean_edge_length();
  double len = 0.0;
  for (std::size_t i = 0; i + 1 < gp.points.size(); ++i)
    len += norm(gp.points[i + 1] - gp.points[i]);
  const int segments = std::clamp(int(std::lround(len / h)) + 1, 8, 256);
  std::vector<Vec3> pts = resample_polyline(gp.points, segments);
  relax_path(spec, pts, h);
  const double value = path_action_fine(spec, pts);
  if (path_out)
    *path_out = std::move(pts);
  return value;
}

} // namespace

SphereMesh SphereMesh::icosphere(int level) {
  if (level < 0 || level > 8)
    throw std::invalid_argument("icosphere: level must be in [0, 8]");
  const double t = 0.5 * (1.0 + std::sqrt(5.0));
  std::vector<Vec3> verts = {
      {-1, t, 0}, {1, t, 0},   {-1, -t, 0}, {1, -t, 0},
      {0, -1, t}, {0, 1, t},   {0, -1, -t}, {0, 1, -t},
      {t, 0, -1}, {t, 0, 1},   {-t, 0, -1}, {-t, 0, 1}};
  for (Vec3 &v : verts)
    v = normalized(v);
  std::vector<std::array<int, 3>> faces = {
      {0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
      {1, 5, 9},  {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
      {3, 9, 4},  {3, 4, 2},  {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
      {4, 9, 5},  {2, 4, 11}, {6, 2, 10},  {8, 6, 7},  {9, 8, 1}};

  for (int l = 0; l < level; ++l) {
    std::map<std::pair<int, int>, int> midpoint;
    auto mid = [&](int a, int b) {
      const auto key = std::minmax(a, b);
      auto it = midpoint.find(key);
      if (it != midpoint.end())
        return it->second;
      const int idx = int(verts.size());
      verts.push_back(normalized(verts[a] + verts[b]));
      midpoint.emplace(key, idx);
      return idx;
    };
    std::vector<std::array<int, 3>> next;
    next.reserve(faces.size() * 4);
    for (const auto &f : faces) {
      const int ab = mid(f[0], f[1]), bc = mid(f[1], f[2]),
                ca = mid(f[2], f[0]);
      next.push_back({f[0], ab, ca});
      next.push_back({f[1], bc, ab});
      next.push_back({f[2], ca, bc});
      next.push_back({ab, bc, ca});
    }
    faces = std::move(next);
  }

  SphereMesh m;
  m.level = level;
  m.vertices = std::move(verts);
  m.faces = std::move(faces);

  std::map<std::pair<int, int>, bool> seen;
  m.vertex_faces.assign(m.vertices.size(), {});
  for (std::size_t f = 0; f < m.faces.size(); ++f) {
    const auto &face = m.faces[f];
    for (int c = 0; c < 3; ++c) {
      m.vertex_faces[face[c]].push_back(int(f));
      const auto key = std::minmax(face[c], face[(c + 1) % 3]);
      if (!seen.emplace(key, true).second)
        continue;
      m.edges.push_back({key.first, key.second});
    }
  }
  std::sort(m.edges.begin(), m.edges.end());
  m.edge_lengths.reserve(m.edges.size());
  m.neighbors.assign(m.vertices.size(), {});
  for (const auto &e : m.edges) {
    const double len = norm(m.vertices[e[0]] - m.vertices[e[1]]);
    m.edge_lengths.push_back(len);
    m.neighbors[e[0]].push_back({e[1], len});
    m.neighbors[e[1]].push_back({e[0], len});
  }
  m.validate();
  return m;
}

void SphereMesh::validate() const {
  for (const Vec3 &v : vertices)
    if (std::abs(norm(v) - 1.0) > 1e-12)
      throw std::runtime_error("SphereMesh: vertex not on the unit sphere");
  // connectivity of the edge graph
  std::vector<char> seen(vertices.size(), 0);
  std::vector<int> stack = {0};
  seen[0] = 1;
  std::size_t reached = 1;
  while (!stack.empty()) {
    const int u = stack.back();
    stack.pop_back();
    for (const auto &[v, len] : neighbors[u]) {
      (void)len;
      if (!seen[v]) {
        seen[v] = 1;
        ++reached;
        stack.push_back(v);
      }
    }
  }
  if (reached != vertices.size())
    throw std::runtime_error("SphereMesh: edge graph is not connected");
}

int SphereMesh::nearest_vertex(const Vec3 &z) const {
  int best = 0;
  double best_dot = -2.0;
  for (std::size_t v = 0; v < vertices.size(); ++v) {
    const double d = dot(vertices[v], z);
    if (d > best_dot) {
      best_dot = d;
      best = int(v);
    }
  }
  return best;
}

int SphereMesh::locate_face(const Vec3 &z, Vec3 *weights) const {
  auto bary = [&](int f, Vec3 &w) {
    const auto &face = faces[f];
    Mat3 m;
    for (int c = 0; c < 3; ++c)
      for (int r = 0; r < 3; ++r)
        m(r, c) = vertices[face[c]][r];
    w = inverse(m) * z;
    return std::min({w.x, w.y, w.z});
  };
  auto pick = [&](const std::vector<int> &candidates, int &best_f,
                  Vec3 &best_w) {
    double best_min = -std::numeric_limits<double>::infinity();
    for (int f : candidates) {
      Vec3 w;
      const double mn = bary(f, w);
      if (mn > best_min) {
        best_min = mn;
        best_f = f;
        best_w = w;
      }
    }
    return best_min;
  };

  int best_f = -1;
  Vec3 best_w{0, 0, 0};
  double best_min = pick(vertex_faces[nearest_vertex(z)], best_f, best_w);
  if (best_min < -1e-9) {
    // rare: z sits in a face not incident to its nearest vertex
    std::vector<int> all(faces.size());
    for (std::size_t f = 0; f < faces.size(); ++f)
      all[f] = int(f);
    pick(all, best_f, best_w);
  }
  if (weights) {
    const double s = best_w.x + best_w.y + best_w.z;
    *weights = best_w * (1.0 / s);
  }
  return best_f;
}

double SphereMesh::interpolate(const std::vector<double> &vertex_values,
                               const Vec3 &z) const {
  if (vertex_values.size() != vertices.size())
    throw std::invalid_argument("interpolate: value count != vertex count");
  Vec3 w;
  const int f = locate_face(z, &w);
  const auto &face = faces[f];
  return w.x * vertex_values[face[0]] + w.y * vertex_values[face[1]] +
         w.z * vertex_values[face[2]];
}

double SphereMesh::mean_edge_length() const {
  double s = 0.0;
  for (double l : edge_lengths)
    s += l;
  return s / double(edge_lengths.size());
}

double great_circle_cost(const AnisotropySpec &spec, const Vec3 &z0,
                         const Vec3 &z1) {
  const Arc arc = make_arc(z0, z1);
  if (arc.theta < 1e-12)
    return 0.0;
  // composite Simpson on sqrt(Phi) along the arc; |gamma'| = theta
  const int n = 4096; // intervals (even)
  double s = sqrt_phi(spec, arc.at(0.0)) + sqrt_phi(spec, arc.at(1.0));
  for (int k = 1; k < n; ++k)
    s += sqrt_phi(spec, arc.at(double(k) / n)) * (k % 2 ? 4.0 : 2.0);
  return arc.theta * s / (3.0 * n);
}

double geodesic_distance(const AnisotropySpec &spec, const Vec3 &z0,
                         const Vec3 &z1, int level) {
  check_unit(z0, "geodesic_distance");
  check_unit(z1, "geodesic_distance");
  if (level < 2)
    throw std::invalid_argument(
        "geodesic_distance: level < 2 is too coarse for a meaningful bound");
  if (level > 8)
    throw std::invalid_argument("geodesic_distance: level must be <= 8");
  if (norm(z0 - z1) < 1e-15)
    return 0.0;
  // canonical endpoint order makes d(z0,z1) == d(z1,z0) bit for bit
  Vec3 a = z0, b = z1;
  if (lex_less(b, a))
    std::swap(a, b);
  double best = great_circle_cost(spec, a, b);
  for (int l = 2; l <= level; ++l)
    best = std::min(best, single_level_distance(spec, l, a, b));
  return best;
}

std::vector<std::vector<double>> surface_tension_table(
    const AnisotropySpec &spec, int level) {
  spec.validate();
  const int m = int(spec.wells.size());
  std::vector<std::vector<double>> sigma(m, std::vector<double>(m, 0.0));
  for (int i = 0; i < m; ++i)
    for (int j = i + 1; j < m; ++j) {
      const double d =
          geodesic_distance(spec, spec.wells[i], spec.wells[j], level);
      sigma[i][j] = d;
      sigma[j][i] = d;
    }
  return sigma;
}

std::vector<double> well_distance_field(const AnisotropySpec &spec, int well,
                                        const SphereMesh &mesh) {
  const int m = int(spec.wells.size());
  if (well < 1 || well > m)
    throw std::invalid_argument("well_distance_field: well index out of range");
  const Vec3 b = spec.wells[well - 1];
  const int nv = int(mesh.vertices.size());
  std::vector<double> sp(nv);
  for (int v = 0; v < nv; ++v)
    sp[v] = sqrt_phi(spec, mesh.vertices[v]);
  const double spb = sqrt_phi(spec, b);

  std::vector<double> dist(nv, std::numeric_limits<double>::infinity());
  using Item = std::pair<double, int>;
  std::priority_queue<Item, std::vector<Item>, std::greater<Item>> pq;
  {
    // seed through the faces around the source
    const int f = mesh.locate_face(b);
    std::vector<int> seeds;
    for (int v : mesh.faces[f]) {
      seeds.push_back(v);
      for (const auto &nb : mesh.neighbors[v])
        seeds.push_back(nb.first);
    }
    std::sort(seeds.begin(), seeds.end());
    seeds.erase(std::unique(seeds.begin(), seeds.end()), seeds.end());
    // Dense quadrature for the seed hops: they are up to two mesh spacings
    // long and sit where sqrt(Phi) bends the most (at the well itself).
    for (int v : seeds) {
      const Vec3 &target = mesh.vertices[v];
      double w = 0.0;
      Vec3 prev_pt = b;
      double prev_sp = spb;
      const int sub = 16;
      for (int k = 1; k <= sub; ++k) {
        const Vec3 pt = sphere_lerp(b, target, double(k) / sub);
        const double s = sqrt_phi(spec, pt);
        w += 0.5 * (prev_sp + s) * norm(pt - prev_pt);
        prev_pt = pt;
        prev_sp = s;
      }
      if (w < dist[v]) {
        dist[v] = w;
        pq.push({w, v});
      }
    }
  }
  while (!pq.empty()) {
    auto [d, u] = pq.top();
    pq.pop();
    if (d > dist[u])
      continue;
    for (const auto &[v, len] : mesh.neighbors[u]) {
      const double nd = d + 0.5 * (sp[u] + sp[v]) * len;
      if (nd < dist[v]) {
        dist[v] = nd;
        pq.push({nd, v});
      }
    }
  }

  // Label-correcting triangle updates: allow the front to enter a vertex
  // through the interior of the opposite edge, which removes the upward bias
  // of edge-bound paths. Sweeps alternate face order; stop at a fixed point.
  auto update_from_edge = [&](int va, int vb, int vc) {
    const double da = dist[va], db = dist[vb];
    if (std::min(da, db) >= dist[vc])
      return false; // positive edge weights: no improvement possible
    const Vec3 &a = mesh.vertices[va];
    const Vec3 &b2 = mesh.vertices[vb];
    const Vec3 &c = mesh.vertices[vc];
    const double spc = sp[vc];
    auto through = [&](double t) {
      const Vec3 x = sphere_lerp(a, b2, t);
      return (1.0 - t) * da + t * db +
             0.5 * (sqrt_phi(spec, x) + spc) * norm(x - c);
    };
    double bt = 0.0, bv = through(0.0);
    for (int k = 1; k <= 8; ++k) {
      const double t = double(k) / 8.0;
      const double v = through(t);
      if (v < bv) {
        bv = v;
        bt = t;
      }
    }
    double lo = std::max(0.0, bt - 0.125), hi = std::min(1.0, bt + 0.125);
    for (int it = 0; it < 20; ++it) {
      const double t1 = lo + (hi - lo) / 3.0, t2 = hi - (hi - lo) / 3.0;
      if (through(t1) < through(t2))
        hi = t2;
      else
        lo = t1;
    }
    bv = std::min(bv, through(0.5 * (lo + hi)));
    if (bv < dist[vc] - 1e-12) {
      dist[vc] = bv;
      return true;
    }
    return false;
  };
  const int nf = int(mesh.faces.size());
  for (int sweep = 0; sweep < 600; ++sweep) {
    bool changed = false;
    for (int s = 0; s < nf; ++s) {
      const int f = (sweep % 2 == 0) ? s : nf - 1 - s;
      const auto &face = mesh.faces[f];
      changed |= update_from_edge(face[0], face[1], face[2]);
      changed |= update_from_edge(face[1], face[2], face[0]);
      changed |= update_from_edge(face[2], face[0], face[1]);
    }
    if (!changed)
      break;
  }
  return dist;
}

TransitionProfile optimal_profile(const AnisotropySpec &spec, int i, int j,
                                  double eps, double beta, int n) {
  const int m = int(spec.wells.size());
  if (i < 1 || i > m || j < 1 || j > m)
    throw std::invalid_argument("optimal_profile: well index out of range");
  if (i == j)
    throw std::invalid_argument("optimal_profile: wells must differ");
  if (!(eps > 0.0))
    throw std::invalid_argument("optimal_profile: eps must be positive");
  if (!(beta > 0.0) || !(beta < 1.0))
    throw std::invalid_argument(
        "optimal_profile: exponent must satisfy 0 < beta < 1");
  if (n < 16)
    throw std::invalid_argument("optimal_profile: need at least 16 samples");

  const Vec3 b0 = spec.wells[i - 1], b1 = spec.wells[j - 1];

  // Transition geometry: the better of the relaxed level-4 graph geodesic
  // and the plain great-circle arc.
  std::vector<Vec3> path;
  const double graph_val = single_level_distance(spec, 4, b0, b1, &path);
  if (great_circle_cost(spec, b0, b1) < graph_val) {
    const Arc arc = make_arc(b0, b1);
    path.clear();
    for (int k = 0; k <= 256; ++k)
      path.push_back(arc.at(double(k) / 256.0));
  }

  // Dense tables along the path: chord arclength tau, action cost, and the
  // equipartition coordinate u with du = dtau / sqrt(Phi) (closed form per
  // substep assuming sqrt(Phi) linear there, which is exact at the wells).
  const int dense_n = 4096;
  std::vector<Vec3> q = resample_polyline(path, dense_n);
  std::vector<double> s(dense_n + 1), cost(dense_n + 1, 0.0),
      u(dense_n + 1, 0.0);
  for (int k = 0; k <= dense_n; ++k)
    s[k] = sqrt_phi(spec, q[k]);
  double phi_max = 0.0;
  for (int k = 0; k <= dense_n; ++k)
    phi_max = std::max(phi_max, s[k] * s[k]);
  for (int k = 1; k <= dense_n; ++k) {
    const double dtau = norm(q[k] - q[k - 1]);
    const double s0 = std::max(s[k - 1], 1e-16), s1 = std::max(s[k], 1e-16);
    cost[k] = cost[k - 1] + 0.5 * (s[k - 1] + s[k]) * dtau;
    const double du = (std::abs(s1 - s0) < 1e-12 * std::max(s0, s1))
                          ? dtau / (0.5 * (s0 + s1))
                          : dtau * std::log(s1 / s0) / (s1 - s0);
    u[k] = u[k - 1] + du;
  }
  const double total_cost = cost[dense_n];

  // The equipartition speed 1 / sqrt(Phi) must be integrable: refuse paths
  // along which the density vanishes away from the wells.
  for (int k = 0; k <= dense_n; ++k) {
    const double frac = total_cost > 0.0 ? cost[k] / total_cost : 0.0;
    if (frac > 0.05 && frac < 0.95 && s[k] * s[k] < 1e-4 * phi_max)
      throw std::runtime_error(
          "optimal_profile: anisotropy density vanishes in the interior of "
          "the transition path; no single layer connects these wells");
  }

  // Center the layer where half the action has been spent.
  double u_center = u[dense_n];
  for (int k = 1; k <= dense_n; ++k) {
    if (cost[k] >= 0.5 * total_cost) {
      const double seg = cost[k] - cost[k - 1];
      const double t = seg > 0.0 ? (0.5 * total_cost - cost[k - 1]) / seg : 0.0;
      u_center = u[k - 1] + t * (u[k] - u[k - 1]);
      break;
    }
  }
  for (int k = 0; k <= dense_n; ++k)
    u[k] -= u_center;

  const double scale = std::pow(eps, beta);
  const double layer = kProfileTheta * scale;

  auto point_at_u = [&](double uk) -> Vec3 {
    if (uk <= u.front())
      return q.front();
    if (uk >= u.back())
      return q.back();
    const auto it = std::upper_bound(u.begin(), u.end(), uk);
    const int hi = int(it - u.begin());
    const double du = u[hi] - u[hi - 1];
    const double t = du > 0.0 ? (uk - u[hi - 1]) / du : 0.0;
    return sphere_lerp(q[hi - 1], q[hi], t);
  };

  // Equipartition holds on |u| <= (1-snap) THETA; across the outer 5% of the
  // layer the profile is blended onto the exact well, which it reaches at the
  // layer edge (the exact profile only gets there as s -> +-inf).
  const double u_snap = (1.0 - kProfileSnap) * kProfileTheta;
  const Vec3 anchor0 = point_at_u(-u_snap), anchor1 = point_at_u(u_snap);

  TransitionProfile prof;
  prof.n = n;
  prof.eps = eps;
  prof.beta = beta;
  prof.points.resize(n);
  prof.param.resize(n);
  for (int k = 0; k < n; ++k) {
    const double sk = -layer + 2.0 * layer * k / (n - 1);
    prof.param[k] = sk;
    if (k == 0 || k == n - 1) {
      prof.points[k] = (k == 0) ? b0 : b1;
      continue;
    }
    const double uk = sk / scale;
    if (uk <= -u_snap) {
      const double t = (-uk - u_snap) / (kProfileSnap * kProfileTheta);
      prof.points[k] = sphere_lerp(anchor0, b0, std::min(t, 1.0));
    } else if (uk >= u_snap) {
      const double t = (uk - u_snap) / (kProfileSnap * kProfileTheta);
      prof.points[k] = sphere_lerp(anchor1, b1, std::min(t, 1.0));
    } else {
      prof.points[k] = point_at_u(uk);
    }
  }

  // Per-area diffuse cost of the sampled (piecewise-linear) profile.
  const double ds = 2.0 * layer / (n - 1);
  const double pen = 1.0 / scale, reg = scale; // eps^-beta, eps^beta
  double c = 0.0;
  double phi_prev = std::max(spec.phi(prof.points[0]), 0.0);
  for (int k = 1; k < n; ++k) {
    const double phi_cur = std::max(spec.phi(prof.points[k]), 0.0);
    const double chord = norm(prof.points[k] - prof.points[k - 1]);
    c += ds * (pen * 0.5 * (phi_prev + phi_cur) + reg * (chord / ds) * (chord / ds));
    phi_prev = phi_cur;
  }
  prof.cost = c;
  return prof;
}

double profile_cost_oracle(const AnisotropySpec &spec, int i, int j,
                           double eps, double beta, int n) {
  const int m = int(spec.wells.size());
  if (i < 1 || i > m || j < 1 || j > m || i == j)
    throw std::invalid_argument("profile_cost_oracle: bad well pair");
  if (!(eps > 0.0) || !(beta > 0.0) || !(beta < 1.0) || n < 16)
    throw std::invalid_argument("profile_cost_oracle: bad parameters");
  const Vec3 b0 = spec.wells[i - 1], b1 = spec.wells[j - 1];
  const double layer = kProfileTheta * std::pow(eps, beta);
  const double ds = 2.0 * layer / (n - 1);
  const double pen = std::pow(eps, -beta), reg = std::pow(eps, beta);

  // uniformly parametrized great-circle start; endpoints stay pinned
  const Arc arc = make_arc(b0, b1);
  std::vector<Vec3> p(n);
  for (int k = 0; k < n; ++k)
    p[k] = arc.at(double(k) / (n - 1));
  p[0] = b0;
  p[n - 1] = b1;

  auto objective = [&](const std::vector<Vec3> &x) {
    double c = 0.0;
    double phi_prev = std::max(spec.phi(x[0]), 0.0);
    for (int k = 1; k < n; ++k) {
      const double phi_cur = std::max(spec.phi(x[k]), 0.0);
      const double chord = norm(x[k] - x[k - 1]);
      c += ds * (pen * 0.5 * (phi_prev + phi_cur)) + reg * chord * chord / ds;
      phi_prev = phi_cur;
    }
    return c;
  };

  std::vector<Vec3> grad(n, Vec3{0, 0, 0});
  std::vector<Vec3> trial(n);
  double J = objective(p);
  double step = 0.01 * ds;
  int stagnant = 0;
  for (int it = 0; it < 40000 && stagnant < 25; ++it) {
    for (int k = 1; k + 1 < n; ++k) {
      Vec3 g = spec.grad_phi(p[k]) * (pen * ds) +
               (p[k] * 2.0 - p[k - 1] - p[k + 1]) * (2.0 * reg / ds);
      grad[k] = g - p[k] * dot(g, p[k]);
    }
    bool accepted = false;
    for (int half = 0; half < 60; ++half) {
      trial[0] = p[0];
      trial[n - 1] = p[n - 1];
      for (int k = 1; k + 1 < n; ++k)
        trial[k] = normalized(p[k] - grad[k] * step);
      const double Jt = objective(trial);
      if (Jt < J) {
        p.swap(trial);
        stagnant = (J - Jt < 1e-13 * (1.0 + J)) ? stagnant + 1 : 0;
        J = Jt;
        step *= 1.25;
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted)
      break;
  }
  return J;
}

} // namespace magelas
