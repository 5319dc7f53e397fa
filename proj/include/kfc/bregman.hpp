#pragma once

#include "kfc/errors.hpp"
#include "kfc/types.hpp"

#include <string>

namespace kfc::bregman {

// The four closed-form divergences, each with its admissible domain C:
//   Euclid       phi = ||x||^2                          C = R^d
//   GKL          phi = sum x ln x                       C = (0, inf)^d
//   Logit        phi = sum [x ln x + (1-x) ln(1-x)]     C = (0, 1)^d
//   ItakuraSaito phi = -sum ln x                        C = (0, inf)^d
enum class Kind { Euclid, GKL, Logit, ItakuraSaito };

constexpr Kind kAllKinds[] = {Kind::Euclid, Kind::GKL, Kind::Logit,
                              Kind::ItakuraSaito};

std::string kind_name(Kind k);
Kind kind_from_name(const std::string& name); // "euclid"|"gkl"|"logit"|"itakura", case-insensitive

// First arguments may sit on the closure of C wherever the divergence extends
// by the 0 ln 0 = 0 convention (GKL and Logit); second arguments must be
// strictly interior since the formulas involve grad phi(y). Itakura-Saito has
// no such extension: x = 0 sends the formula to infinity, so its first
// argument stays strictly positive as well.
bool in_domain(Kind k, const Vector& x, bool interior_required);

// Generator value phi(x). Throws DomainError outside the (extended) domain.
double phi(Kind k, const Vector& x);

// grad phi(y); y strictly interior.
Vector grad_phi(Kind k, const Vector& y);

// Closed-form d_phi(x, y); never computed by differentiating phi numerically.
double divergence(Kind k, const Vector& x, const Vector& y);

// D(i, j) = d_phi(X_i, C_j) for all pairs, via the same closed forms
// rearranged around one matrix product. Rows of C must be interior; entries
// are clamped at 0 to absorb cancellation roundoff.
Matrix divergence_matrix(Kind k, const Matrix& X, const Matrix& C);

enum class RepairStrategy { None, L1Normalize, ShiftPositive, DropViolations };

std::string repair_name(RepairStrategy s);
RepairStrategy repair_from_name(const std::string& name);

// Default repair per divergence: nothing for Euclid, a positivity shift for
// GKL and Itakura-Saito, L1 normalization (then interior clamping) for Logit.
RepairStrategy default_repair(Kind k);

// A fitted row transform. Parameters are learned once on training data and
// re-applied verbatim to queries; apply_row additionally clamps a query into
// the interior of C so that points just outside the training range (or rows
// a DropViolations fit would have discarded) stay evaluable.
struct RepairTransform {
  Kind div = Kind::Euclid;
  RepairStrategy strategy = RepairStrategy::None;
  double shift = 0.0;          // ShiftPositive offset, 0 when no violation seen
  double interior_eps = 1e-6;  // clamp margin
  bool zero_row_error = true;  // L1Normalize: throw on a zero-norm row

  Vector apply_row(const Vector& x) const;
  Matrix apply(const Matrix& X) const;
};

struct RepairResult {
  Matrix data;             // repaired rows, all strictly interior to C
  RepairTransform transform;
  Index dropped = 0;       // DropViolations only
};

// Fits the transform on X and returns the repaired rows. zero_row_error
// controls the L1Normalize zero-norm case: when false, such rows follow the
// 0/0 = 0 convention and land on the clamp floor instead of throwing.
RepairResult fit_repair(const Matrix& X, Kind div, RepairStrategy strategy,
                        double eps0 = 1e-6, bool zero_row_error = true);

Dataset repair_to_domain(const Dataset& data, Kind div, RepairStrategy strategy);

} // namespace kfc::bregman
