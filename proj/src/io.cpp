#include "magelas/io.hpp"

#include <charconv>
#include <fstream>
#include <stdexcept>

namespace magelas {

namespace {

std::ofstream open_or_throw(const std::string &path) {
  std::ofstream out(path, std::ios::binary); // "\n" stays "\n" everywhere
  if (!out)
    throw std::runtime_error("cannot open for writing: " + path);
  return out;
}

void finish_or_throw(std::ofstream &out, const std::string &path) {
  out.flush();
  if (!out)
    throw std::runtime_error("write failed: " + path);
}

// Shared STRUCTURED_POINTS preamble; data are attached to cells, so the
// point lattice has one more sample per axis.
void vtk_header(std::ofstream &out, const std::string &title, const Grid &g) {
  out << "# vtk DataFile Version 3.0\n"
      << title << "\nASCII\nDATASET STRUCTURED_POINTS\n"
      << "DIMENSIONS " << g.n[0] + 1 << ' ' << g.n[1] + 1 << ' ' << g.n[2] + 1
      << "\nORIGIN " << format_number(g.origin.x) << ' '
      << format_number(g.origin.y) << ' ' << format_number(g.origin.z)
      << "\nSPACING " << format_number(g.spacing.x) << ' '
      << format_number(g.spacing.y) << ' ' << format_number(g.spacing.z)
      << "\nCELL_DATA " << g.size() << '\n';
}

// VTK cell order runs x fastest; our storage runs z fastest.
template <class Fn> void for_cells_vtk_order(const Grid &g, Fn &&fn) {
  for (int k = 0; k < g.n[2]; ++k)
    for (int j = 0; j < g.n[1]; ++j)
      for (int i = 0; i < g.n[0]; ++i)
        fn(i, j, k);
}

} // namespace

std::string format_number(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string csv_escape(const std::string &field) {
  if (field.find_first_of(",\"\r\n") == std::string::npos)
    return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"')
      out += '"';
    out += c;
  }
  out += '"';
  return out;
}

void write_csv(const std::string &path, const std::vector<std::string> &header,
               const std::vector<std::vector<std::string>> &rows) {
  auto out = open_or_throw(path);
  const auto emit = [&](const std::vector<std::string> &row) {
    if (row.size() != header.size())
      throw std::runtime_error("csv row width " + std::to_string(row.size()) +
                               " does not match header width " +
                               std::to_string(header.size()) + ": " + path);
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i)
        out << ',';
      out << csv_escape(row[i]);
    }
    out << '\n';
  };
  emit(header);
  for (const auto &row : rows)
    emit(row);
  finish_or_throw(out, path);
}

void write_vtk_scalar(const std::string &path, const std::string &title,
                      const ScalarField &f, const std::string &name) {
  auto out = open_or_throw(path);
  vtk_header(out, title, f.grid);
  out << "SCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
  for_cells_vtk_order(f.grid, [&](int i, int j, int k) {
    out << format_number(f(i, j, k)) << '\n';
  });
  finish_or_throw(out, path);
}

void write_vtk_vector(const std::string &path, const std::string &title,
                      const VectorField &f, const std::string &name) {
  auto out = open_or_throw(path);
  vtk_header(out, title, f.grid);
  out << "VECTORS " << name << " double\n";
  for_cells_vtk_order(f.grid, [&](int i, int j, int k) {
    const Vec3 &v = f(i, j, k);
    out << format_number(v.x) << ' ' << format_number(v.y) << ' '
        << format_number(v.z) << '\n';
  });
  finish_or_throw(out, path);
}

void write_vtk_labels(const std::string &path, const std::string &title,
                      const LabelField &m, const std::string &name) {
  auto out = open_or_throw(path);
  vtk_header(out, title, m.grid);
  out << "SCALARS " << name << " int 1\nLOOKUP_TABLE default\n";
  for_cells_vtk_order(m.grid,
                      [&](int i, int j, int k) { out << m(i, j, k) << '\n'; });
  finish_or_throw(out, path);
}

} // namespace magelas
