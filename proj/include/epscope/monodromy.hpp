#pragma once

#include <vector>

#include "epscope/core.hpp"
#include "epscope/ep_locator.hpp"
#include "epscope/matrix_model.hpp"

namespace epscope {

struct LambdaPath {
  std::vector<Cplx> samples;
  bool closed = false;

  void validate() const;
};

// Circle of `turns` revolutions around center, base samples per turn before
// adaptive refinement; the final sample repeats the first bitwise so closure
// comparisons are exact.
LambdaPath circle_path(Cplx center, double radius, int turns, int direction,
                       int base_per_turn = 64);

LambdaPath segment_path(Cplx from, Cplx to, int n_samples);

// Eigenvalue/eigenvector branches continued along a path. Samples hold the
// refined path (midpoints inserted by the tracker included). frames[t] has
// the branch vectors as columns, Euclidean-normalized with phase fixed by
// parallel transport against the previous sample.
struct SheetTrace {
  std::vector<Cplx> samples;
  std::vector<CVec> energies;  // per sample, branch order
  std::vector<CMat> frames;    // per sample, branch vectors in columns
  Index step_subdivisions = 0;

  Index n_branches() const { return energies.empty() ? 0 : energies[0].size(); }
};

struct LoopReport {
  std::vector<int> permutation;   // branch j ends on initial branch permutation[j]
  CVec phase_factors;             // accumulated branch factors, unit modulus
  std::vector<int> enclosed_eps;  // indices into the located-EP list
  bool multi_ep_warning = false;
};

struct CrossingLeg {
  bool real_part_crosses = false;
  bool imag_part_crosses = false;
};

struct CrossingReport {
  CrossingLeg above;
  CrossingLeg below;
  double offset = 0.0;
  double span = 0.0;
  // per-sample tracked branch difference, for export
  std::vector<Cplx> lambda_above, diff_above, lambda_below, diff_below;
};

SheetTrace track_spectrum(const MatrixPencil& pencil, const LambdaPath& path);

// Permutation and per-branch phase factors accumulated by one traversal of a
// circle around ep. Phases are measured against the bilinear-normalized
// (v^T v = 1) frames, where analytic continuation yields exact +-1 factors
// for a loop that closes.
LoopReport loop_monodromy(const MatrixPencil& pencil, const ExceptionalPoint& ep,
                          double radius, int direction, int turns,
                          const std::vector<ExceptionalPoint>* located = nullptr);

// Tracks the coalescing branch pair along horizontal segments at
// Im(lambda) = Im(lambda_c) +- offset spanning Re(lambda_c) +- 5*offset and
// reports sign changes of Re and Im of the branch difference per leg.
CrossingReport crossing_scan(const MatrixPencil& pencil,
                             const ExceptionalPoint& ep, double offset,
                             const std::vector<ExceptionalPoint>* located = nullptr);

// Winding number of a closed sampled path around a point.
int winding_number(const std::vector<Cplx>& samples, Cplx point);

}  // namespace epscope
