#pragma once

// Fixed points of psi on [0,1], interpretability, criticality, iteration and
// tangency search in parameterized families.

#include <optional>
#include <string>
#include <vector>

#include "rts/admap.hpp"
#include "rts/core.hpp"

namespace rts {

struct FixedPointOptions {
  double tol = 1e-12;            // bisection width for simple roots
  double residual_tol = 1e-10;   // |psi(x) - x| accepted after refinement
  double tangency_tol = 1e-9;    // |psi(x) - x| at a critical point of psi(x) - x
  double boundary_tol = 1e-9;    // |psi'(x) - 1| flagged as boundary interpretability
  bool detect_tangency = true;
};

struct FixedPoint {
  double x = 0.0;
  double psi_prime = 0.0;
  int multiplicity = 1;  // 1 or 2 (higher multiplicities are reported as 2)
  bool interpretable = true;
  bool boundary = false;  // |psi'(x) - 1| within boundary_tol at an interior point
  std::vector<std::string> tags;  // zero, smallest_nonzero, largest
  double lo = 0.0, hi = 0.0;      // isolating interval
  double residual = 0.0;
  std::optional<Rational> exact;  // verified rational root (rational mode)
};

struct FixedPointReport {
  bool continuum = false;  // psi(x) == x: every point is fixed
  std::vector<FixedPoint> points;
  double residual_bound = 0.0;

  /// Fixed points with x > 0.
  std::vector<double> nonzero() const;
  const FixedPoint* smallest_nonzero() const;
};

FixedPointReport find_fixed_points(const RecursiveTreeSystem& system, const FixedPointOptions& options = {});
FixedPointReport find_fixed_points(const AdmMap& map, const FixedPointOptions& options = {});

/// Derivative criterion at a fixed point; endpoints are always interpretable.
/// Throws ValidationError when x0 is not a fixed point (residual above 1e-8).
bool interpretable(const RecursiveTreeSystem& system, double x0, double tol = 1e-9);

struct Criticality {
  bool critical = false;
  double d1 = 0.0, d2 = 0.0;  // psi'(0), psi''(0)
  std::optional<Rational> d1_exact, d2_exact;
};

/// psi'(0) == 1 and psi''(0) <= 0; exact in rational mode, tolerance 1e-9
/// otherwise. Throws ValidationError when chi is a point mass.
Criticality is_critical(const RecursiveTreeSystem& system);

/// (x, psi(x), ..., psi^n(x)).
std::vector<double> iterate_psi(const RecursiveTreeSystem& system, double x_start, int n);

enum class TransitionKind { continuous, first_order };
std::string to_string(TransitionKind kind);

struct TransitionFinding {
  double t_star = 0.0;
  double x_star = 0.0;
  TransitionKind kind = TransitionKind::continuous;
  double jump = 0.0;
  double t_lo = 0.0, t_hi = 0.0;  // final bracket
};

struct TangencyOptions {
  double t_tol = 1e-8;
  double x_tol = 1e-8;
  double delta = 1e-6;  // fixed points below delta are not counted
};

/// Locates the parameter at which the number of nonzero fixed points changes
/// and classifies the change. Throws ValidationError when the counts at t_lo
/// and t_hi agree.
TransitionFinding find_tangency(const FamilyFn& family, double t_lo, double t_hi, const TangencyOptions& options = {});

/// Nonzero fixed points at or above delta, simple roots only.
int count_nonzero_fixed_points(const RecursiveTreeSystem& system, double delta);

}  // namespace rts
