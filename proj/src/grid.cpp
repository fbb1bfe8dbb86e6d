#include "magelas/grid.hpp"

#include <atomic>
#include <cmath>
#include <stdexcept>
#include <thread>

namespace magelas {

namespace {
std::atomic<int> g_threads{1};
constexpr std::size_t kChunk = 4096; // fixed: reduction layout never changes
} // namespace

void set_thread_count(int threads) {
  if (threads < 1)
    throw std::invalid_argument("set_thread_count: threads must be >= 1");
  g_threads.store(threads);
}

int thread_count() { return g_threads.load(); }

Grid Grid::unit_cube(int cells_per_axis) {
  return box({0, 0, 0}, {1, 1, 1},
             {cells_per_axis, cells_per_axis, cells_per_axis});
}

Grid Grid::box(const Vec3 &lo, const Vec3 &hi, std::array<int, 3> cells) {
  Grid g;
  g.n = cells;
  g.origin = lo;
  g.spacing = {(hi.x - lo.x) / cells[0], (hi.y - lo.y) / cells[1],
               (hi.z - lo.z) / cells[2]};
  g.validate();
  return g;
}

bool Grid::same_layout(const Grid &o) const {
  return n == o.n && norm(origin - o.origin) < 1e-14 &&
         norm(spacing - o.spacing) < 1e-14;
}

void Grid::validate() const {
  for (int a = 0; a < 3; ++a)
    if (n[a] < 4)
      throw std::invalid_argument("Grid: need at least 4 cells per axis");
  if (!(spacing.x > 0.0) || !(spacing.y > 0.0) || !(spacing.z > 0.0))
    throw std::invalid_argument("Grid: spacing must be positive");
}

double kahan_sum(const double *v, std::size_t n) {
  double s = 0.0, c = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double y = v[i] - c;
    const double t = s + y;
    c = (t - s) - y;
    s = t;
  }
  return s;
}

double deterministic_cell_sum(const Grid &g,
                              const std::function<double(std::size_t)> &fn) {
  const std::size_t total = g.size();
  const std::size_t nchunks = (total + kChunk - 1) / kChunk;
  std::vector<double> partial(nchunks, 0.0);

  auto run_chunk = [&](std::size_t c) {
    const std::size_t lo = c * kChunk;
    const std::size_t hi = std::min(lo + kChunk, total);
    double s = 0.0, comp = 0.0;
    for (std::size_t i = lo; i < hi; ++i) {
      const double y = fn(i) - comp;
      const double t = s + y;
      comp = (t - s) - y;
      s = t;
    }
    partial[c] = s;
  };

  const int workers = std::min<int>(thread_count(), int(nchunks));
  if (workers <= 1) {
    for (std::size_t c = 0; c < nchunks; ++c)
      run_chunk(c);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w)
      pool.emplace_back([&] {
        for (std::size_t c = next.fetch_add(1); c < nchunks;
             c = next.fetch_add(1))
          run_chunk(c);
      });
    for (auto &t : pool)
      t.join();
  }
  // Combine partials serially, in chunk order, with compensation again.
  return kahan_sum(partial.data(), partial.size());
}

double integrate(const ScalarField &f) {
  const double r = deterministic_cell_sum(f.grid, [&](std::size_t i) {
                     return f.data[i];
                   }) *
                   f.grid.cell_volume();
  // A single NaN/inf cell value poisons the sum, so one check suffices.
  if (!std::isfinite(r))
    throw std::runtime_error("integrate: field contains nonfinite values");
  return r;
}

namespace {
// One-dimensional stencil: derivative of `get` along a line of m samples at
// position idx with spacing h.
template <class Get>
double line_derivative(const Get &get, int idx, int m, double h) {
  if (idx == 0)
    return (-3.0 * get(0) + 4.0 * get(1) - get(2)) / (2.0 * h);
  if (idx == m - 1)
    return (3.0 * get(m - 1) - 4.0 * get(m - 2) + get(m - 3)) / (2.0 * h);
  return (get(idx + 1) - get(idx - 1)) / (2.0 * h);
}
} // namespace

VectorField gradient(const ScalarField &f) {
  const Grid &g = f.grid;
  VectorField out(g);
  for (int i = 0; i < g.n[0]; ++i)
    for (int j = 0; j < g.n[1]; ++j)
      for (int k = 0; k < g.n[2]; ++k) {
        Vec3 d;
        d.x = line_derivative([&](int t) { return f(t, j, k); }, i, g.n[0],
                              g.spacing.x);
        d.y = line_derivative([&](int t) { return f(i, t, k); }, j, g.n[1],
                              g.spacing.y);
        d.z = line_derivative([&](int t) { return f(i, j, t); }, k, g.n[2],
                              g.spacing.z);
        out(i, j, k) = d;
      }
  return out;
}

MatrixField gradient(const VectorField &u) {
  const Grid &g = u.grid;
  MatrixField out(g);
  for (int i = 0; i < g.n[0]; ++i)
    for (int j = 0; j < g.n[1]; ++j)
      for (int k = 0; k < g.n[2]; ++k) {
        Mat3 m;
        for (int r = 0; r < 3; ++r) {
          m(r, 0) = line_derivative([&](int t) { return u(t, j, k)[r]; }, i,
                                    g.n[0], g.spacing.x);
          m(r, 1) = line_derivative([&](int t) { return u(i, t, k)[r]; }, j,
                                    g.n[1], g.spacing.y);
          m(r, 2) = line_derivative([&](int t) { return u(i, j, t)[r]; }, k,
                                    g.n[2], g.spacing.z);
        }
        out(i, j, k) = m;
      }
  return out;
}

MatrixField symmetric_gradient(const VectorField &u) {
  MatrixField g = gradient(u);
  for (Mat3 &m : g.data)
    m = sym(m);
  return g;
}

double interface_area(const LabelField &labels, int li, int lj) {
  if (li == lj)
    throw std::invalid_argument("interface_area: labels must differ");
  const Grid &g = labels.grid;
  const double ax = g.spacing.y * g.spacing.z;
  const double ay = g.spacing.x * g.spacing.z;
  const double az = g.spacing.x * g.spacing.y;
  double area = 0.0;
  auto match = [&](int a, int b) {
    return (a == li && b == lj) || (a == lj && b == li);
  };
  for (int i = 0; i < g.n[0]; ++i)
    for (int j = 0; j < g.n[1]; ++j)
      for (int k = 0; k < g.n[2]; ++k) {
        const int c = labels(i, j, k);
        if (i + 1 < g.n[0] && match(c, labels(i + 1, j, k)))
          area += ax;
        if (j + 1 < g.n[1] && match(c, labels(i, j + 1, k)))
          area += ay;
        if (k + 1 < g.n[2] && match(c, labels(i, j, k + 1)))
          area += az;
      }
  return area;
}

Deformation build_deformation(const VectorField &u, double eps) {
  if (!(eps > 0.0))
    throw std::invalid_argument("build_deformation: eps must be positive");
  Deformation d;
  d.eps = eps;
  d.grad_u = gradient(u);
  double l0 = 0.0; // max per-cell operator norm of Du
  for (const Mat3 &m : d.grad_u.data)
    l0 = std::max(l0, spectral_norm(m));
  d.lipschitz = std::max(1.0, l0); // L = ||Du||_inf v 1
  // Du == 0 means y is a translation of the identity: injective for any eps.
  d.certified = (l0 == 0.0) || eps <= 1.0 / (2.0 * d.lipschitz);
  const Grid &g = u.grid;
  d.y = VectorField(g);
  for (int i = 0; i < g.n[0]; ++i)
    for (int j = 0; j < g.n[1]; ++j)
      for (int k = 0; k < g.n[2]; ++k)
        d.y(i, j, k) = g.center(i, j, k) + u(i, j, k) * eps;
  return d;
}

DetExpansion determinant_expansion(const Mat3 &g) {
  DetExpansion e;
  e.p1 = trace(g);
  e.p2 = 0.5 * (trace(g) * trace(g) - trace(g * g));
  e.p3 = det(g);
  return e;
}

InterfaceDistance interface_distance(const LabelField &labels) {
  const Grid &g = labels.grid;
  InterfaceDistance out;
  out.distance = ScalarField(g, std::numeric_limits<double>::infinity());
  out.partner = LabelField(g, -1);

  // Seed: half a spacing to each face shared with a differing label.
  const double hx = g.spacing.x, hy = g.spacing.y, hz = g.spacing.z;
  for (int i = 0; i < g.n[0]; ++i)
    for (int j = 0; j < g.n[1]; ++j)
      for (int k = 0; k < g.n[2]; ++k) {
        const int c = labels(i, j, k);
        auto seed = [&](int ni, int nj, int nk, double w) {
          if (ni < 0 || nj < 0 || nk < 0 || ni >= g.n[0] || nj >= g.n[1] ||
              nk >= g.n[2])
            return;
          const int nb = labels(ni, nj, nk);
          if (nb != c && w < out.distance(i, j, k)) {
            out.distance(i, j, k) = w;
            out.partner(i, j, k) = nb;
          }
        };
        seed(i - 1, j, k, 0.5 * hx);
        seed(i + 1, j, k, 0.5 * hx);
        seed(i, j - 1, k, 0.5 * hy);
        seed(i, j + 1, k, 0.5 * hy);
        seed(i, j, k - 1, 0.5 * hz);
        seed(i, j, k + 1, 0.5 * hz);
      }

  // Offsets with positive lexicographic order; the forward pass relaxes from
  // the negative ones, the backward pass from the positive ones.
  struct Off {
    int di, dj, dk;
    double w;
  };
  std::vector<Off> half;
  for (int di = -1; di <= 1; ++di)
    for (int dj = -1; dj <= 1; ++dj)
      for (int dk = -1; dk <= 1; ++dk) {
        if (di == 0 && dj == 0 && dk == 0)
          continue;
        if (di < 0 || (di == 0 && (dj < 0 || (dj == 0 && dk < 0)))) {
          const double w = std::sqrt((di * hx) * (di * hx) +
                                     (dj * hy) * (dj * hy) +
                                     (dk * hz) * (dk * hz));
          half.push_back({di, dj, dk, w});
        }
      }

  auto relax = [&](int i, int j, int k, int di, int dj, int dk, double w) {
    const int ni = i + di, nj = j + dj, nk = k + dk;
    if (ni < 0 || nj < 0 || nk < 0 || ni >= g.n[0] || nj >= g.n[1] ||
        nk >= g.n[2])
      return;
    const double cand = out.distance(ni, nj, nk) + w;
    if (cand < out.distance(i, j, k)) {
      out.distance(i, j, k) = cand;
      out.partner(i, j, k) = out.partner(ni, nj, nk);
    }
  };

  for (int i = 0; i < g.n[0]; ++i)
    for (int j = 0; j < g.n[1]; ++j)
      for (int k = 0; k < g.n[2]; ++k)
        for (const Off &o : half)
          relax(i, j, k, o.di, o.dj, o.dk, o.w);
  for (int i = g.n[0] - 1; i >= 0; --i)
    for (int j = g.n[1] - 1; j >= 0; --j)
      for (int k = g.n[2] - 1; k >= 0; --k)
        for (const Off &o : half)
          relax(i, j, k, -o.di, -o.dj, -o.dk, o.w);
  return out;
}

bool on_dirichlet_boundary(const Grid &g, const BoundarySpec &bc, int i, int j,
                           int k) {
  return (bc.faces[0] && i == 0) || (bc.faces[1] && i == g.n[0] - 1) ||
         (bc.faces[2] && j == 0) || (bc.faces[3] && j == g.n[1] - 1) ||
         (bc.faces[4] && k == 0) || (bc.faces[5] && k == g.n[2] - 1);
}

} // namespace magelas
