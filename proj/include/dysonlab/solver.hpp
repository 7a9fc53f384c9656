#pragma once

#include "dysonlab/model.hpp"

#include <optional>
#include <string>
#include <vector>

namespace dyson {

struct SolveOptions {
  double tol = 1e-11;           // on ||m (z - a + S[m]) + 1||
  int max_iter = 20000;
  double damping = 0.5;
  bool newton = true;
  double newton_switch = 1e-4;  // residual below which Newton takes over
  double eta_floor = 1e-9;      // finest rung of the boundary ladder
  double eta_start = 0.1;       // coarsest rung of a cold ladder
  int short_ladder = 5;         // rungs used when a warm start is available

  void validate() const;
};

struct Solution {
  cplx z;
  Matrix m;
  double residual = 0.0;
  int iterations = 0;
  bool converged = false;
  int newton_steps = 0;
};

/// Residual ||m (z - a + S[m]) + 1|| in the Frobenius norm.
double dyson_residual(const ModelSpec& spec, cplx z, const Matrix& m);

/// Solves the Dyson equation at Im z > 0. Throws NumericalError on failure.
Solution solve_at(const ModelSpec& spec, cplx z, const SolveOptions& opts = {},
                  const std::optional<Matrix>& warm_start = std::nullopt);

/// Newton iteration for the Dyson equation at real z = tau, started from m_init.
/// Meant for points outside the support where the limit m(tau) is Hermitian.
Solution solve_real_axis(const ModelSpec& spec, double tau, const Matrix& m_init,
                         const SolveOptions& opts = {});

/// Solves (Id - C_{g,g} S)[x] = rhs on the model's layout.
Matrix solve_stability(const ModelSpec& spec, const Matrix& g, const Matrix& rhs);

struct BoundaryValue {
  double tau = 0.0;
  Solution finest;         // solution at tau + i eta_eff
  Matrix m0;               // extrapolated eta -> 0 limit
  double eta_eff = 0.0;
  double exponent = 1.0;   // fitted local exponent, clipped to [1/3, 1]
  double raw_exponent = 1.0;
  double extrapolation_error = 0.0;
  bool flagged = false;    // non-Lipschitz behaviour in eta
  std::vector<double> etas;      // rungs, coarse to fine
  std::vector<double> im_norms;  // ||Im m|| at each rung
  std::vector<Matrix> rungs;     // the three finest solutions, coarse to fine

  double rho() const;      // <Im m0>/pi, clipped at 0
};

/// eta-ladder continuation to the real axis with Richardson extrapolation.
/// A warm start (from a nearby tau) enables the short ladder.
BoundaryValue boundary_value(const ModelSpec& spec, double tau, const SolveOptions& opts = {},
                             const std::optional<Matrix>& warm_start = std::nullopt);

/// Extends an existing ladder by `halvings` further rungs below its finest one.
BoundaryValue extend_ladder(const ModelSpec& spec, const BoundaryValue& bv, int halvings,
                            const SolveOptions& opts = {});

struct GridPoint {
  std::optional<Solution> solution;
  std::string error;
};

inline constexpr int kChunkSize = 64;

/// Warm-started solves along sorted taus at fixed eta. Chunks of kChunkSize points
/// are chained sequentially and distributed over `jobs` workers; results do not
/// depend on `jobs`.
std::vector<GridPoint> solve_grid(const ModelSpec& spec, const std::vector<double>& taus, double eta,
                                  const SolveOptions& opts = {}, int jobs = 1);

struct StabilityCheck {
  double defect = 0.0;
  double condition = 0.0;
  bool flagged = false;  // B close to singular
};

/// Central-difference check of (Id - C_m S)[dm/dz] = m^2.
StabilityCheck stability_residual_check(const ModelSpec& spec, cplx z, double h,
                                        const SolveOptions& opts = {});

/// Runs fn(i) for i in [0, count) on up to `jobs` threads.
void parallel_for(int count, int jobs, const std::function<void(int)>& fn);
int default_jobs();

}  // namespace dyson
