// Machine-readable output writers shared by the experiment driver: CSV
// tables with RFC-4180 quoting and VTK legacy ASCII snapshots of cell
// fields.  Numbers are printed with round-trip precision ("%.17g", C
// locale), so identical doubles always serialize to identical bytes.
#pragma once

#include <string>
#include <vector>

#include "magelas/grid.hpp"

namespace magelas {

// Round-trip decimal form of v; "inf"/"nan" for nonfinite values.
std::string format_number(double v);

// RFC-4180 quoting: fields containing a comma, a double quote, or a line
// break are wrapped in quotes with inner quotes doubled; all other fields
// pass through unchanged.
std::string csv_escape(const std::string &field);

// Writes header + rows, "\n" line ends, every row checked against the
// header width.  Throws std::runtime_error when the file cannot be written
// or a row width disagrees.
void write_csv(const std::string &path, const std::vector<std::string> &header,
               const std::vector<std::vector<std::string>> &rows);

// VTK legacy ASCII STRUCTURED_POINTS snapshots.  The lattice is the cell
// grid (point dimensions n+1 per axis) and all data live on cells.
void write_vtk_scalar(const std::string &path, const std::string &title,
                      const ScalarField &f, const std::string &name);
void write_vtk_vector(const std::string &path, const std::string &title,
                      const VectorField &f, const std::string &name);
void write_vtk_labels(const std::string &path, const std::string &title,
                      const LabelField &m, const std::string &name);

} // namespace magelas
