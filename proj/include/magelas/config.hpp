// Experiment configuration and the batch driver behind the CLI: JSON in,
// validated struct out, results.csv + manifest.json (+ optional VTK
// snapshots) in the output directory.
//
// The manifest echoes the full resolved configuration together with the
// library version and is itself a valid configuration file, so any run can
// be reproduced from its manifest alone.
#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "magelas/anisotropy.hpp"
#include "magelas/energy.hpp"
#include "magelas/grid.hpp"
#include "magelas/material.hpp"

namespace magelas {

inline constexpr const char *kLibraryVersion = "0.1.0";

// One experiment.  Every field has a usable default except `kind`; see the
// README for the per-experiment CSV schemas (frozen per minor version).
struct ExperimentConfig {
  // gamma-study | stray-check | geodesic | minimize-limit |
  // minimize-diffuse | almost-min-study
  std::string kind;

  int n = 32;      // cells per axis on the unit cube
  MaterialLaw law; // p, q, c_w, a, b

  std::string anisotropy = "uniaxial"; // uniaxial | cubic
  double kappa = 4.0;                  // uniaxial strength / cubic k1
  double kappa2 = 0.0;                 // cubic k2
  Vec3 axis{1, 0, 0};                  // uniaxial easy axis
  Mat3 axes = Mat3::identity();        // cubic easy axes (columns)

  double beta = 0.5;
  std::vector<double> eps_schedule{0.2, 0.1, 0.05, 0.025};
  double lambda = 0.0; // stray-field weight

  std::string field = "none"; // none | uniform
  Vec3 field_vector{0, 0, 0}; // the uniform applied field

  BoundarySpec boundary; // Dirichlet faces + affine datum (minimizers)

  std::string init_labels = "half-split"; // half-split | constant

  int sweeps = 20;        // alternating-minimizer round cap
  int steps = 200;        // descent step cap
  double step_size = 0.5; // initial descent trial step
  int level = 5;          // geodesic mesh refinement (geodesic experiment)
  double jitter = 0.0;    // seeded tangential magnetization jitter applied
                          // to the minimize-diffuse starting state

  std::uint64_t seed = 0;
  bool snapshots = false;
  std::string outdir = ".";

  // Throws std::invalid_argument naming the offending field; in particular
  // the admissible-exponent check reports the inequality
  // 0 < beta < min(2(q-1)/q, 1) with the configured values.
  void validate() const;

  AnisotropySpec make_anisotropy() const;
  AppliedField make_field() const; // empty function for "none"
};

// Strict parsing: unknown keys are rejected (the "version" key a manifest
// carries is the one exception).  Throws std::invalid_argument on malformed
// JSON, wrong types, or failed validation.
ExperimentConfig parse_config(const std::string &json_text);
ExperimentConfig load_config(const std::string &path);

// The resolved configuration plus the library version, as pretty JSON.
std::string manifest_json(const ExperimentConfig &config);

// Runs one experiment and writes its artifacts into config.outdir
// (created if missing).  Progress and failure messages go to `log`.
// Returns the process exit status: 0 on success, 2 when validation fails,
// 3 when a numeric guard trips mid-run.
int run_experiment(const ExperimentConfig &config, std::ostream &log);

} // namespace magelas
