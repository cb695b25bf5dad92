#pragma once

#include "epscope/core.hpp"
#include "epscope/ep_locator.hpp"
#include "epscope/matrix_model.hpp"

namespace epscope {

// The (unique up to phase) null direction of H(lambda_c) - E_c at a refined
// EP, with its local witnesses.
struct EpEigenvector {
  CVec vector;                    // Euclidean norm 1
  double self_orthogonality = 0;  // |v^T v|
  double second_singular = 0;     // 2nd-smallest singular value / gap scale;
                                  // bounded away from zero iff geometric
                                  // multiplicity is 1
  int chirality_sign = 0;         // +-1 once decomposed, 0 before
  double decomposition_error = 0; // 1 - best overlap with (psi1 +- i psi2)/sqrt2
};

struct ChiralityResult {
  int sign = 0;
  double error = 0.0;
  double capture = 0.0;  // norm fraction of v inside span{psi1, psi2}
};

// |v^T v| / (v^dagger v): 1 for any globally-phased real vector, 0 for a
// perfect chiral combination.
double phase_rigidity(const CVec& v);

EpEigenvector ep_eigenvector(const MatrixPencil& pencil,
                             const ExceptionalPoint& ep);

// Identifies the two levels that coalesce at the EP by tracking the spectrum
// from the real axis up to lambda_c - i*delta-ish, takes their real
// orthonormal eigenvectors at Re(lambda_c) as the reference pair, and picks
// the sign s maximizing |<(psi1 + s*i*psi2)/sqrt2, v>|.
ChiralityResult chirality_decompose(const MatrixPencil& pencil,
                                    const ExceptionalPoint& ep,
                                    double delta = 1e-3);

// Convenience: ep_eigenvector + chirality_decompose merged for reporting.
EpEigenvector ep_local_report(const MatrixPencil& pencil,
                              const ExceptionalPoint& ep, double delta = 1e-3);

}  // namespace epscope
