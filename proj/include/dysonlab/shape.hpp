#pragma once

// Shape parameters at small local minima of the density, the universal shape
// functions and the local classification of singularities.

#include "dysonlab/density.hpp"
#include "dysonlab/spectral.hpp"

#include <memory>
#include <string>
#include <vector>

namespace dyson {

struct ShapeParams {
  double sigma = 0.0;
  double sigma_imag = 0.0;   // discarded imaginary part of <s f_u^3>
  double psi = 0.0;
  double psi_imag = 0.0;
  double gamma_big = 0.0;    // sqrt(27) pi / (2 psi)
  double rho0 = 0.0;         // rho(tau0) from the boundary ladder
  double kappa = M_PI;
  double fu2 = 0.0;          // <f_u^2>
  double separation = 0.0;   // isolation of the small eigenvalue of Id - C_s F
};

/// sigma = <s f_u^3> and psi = <x, (Id + F)(Id - C_s F)^{-1} Q x> with x = s f_u^2,
/// evaluated at tau0 + i eta_floor. Throws DomainError when Re u has an eigenvalue
/// near zero and NumericalError when the small eigenvalue of Id - C_s F is not isolated.
ShapeParams shape_params(const ModelSpec& spec, double tau0, const SolveOptions& opts = {});

double psi_edge(double lambda);
double psi_min(double lambda);

struct CardanoRoots {
  cplx plus, minus, zero;
};

/// Roots of Omega^3 - 3 Omega + 2 zeta with the branch convention of the shape analysis.
CardanoRoots cardano_roots(cplx zeta);
/// Phi_odd + i sqrt(3) Phi_even with Phi(zeta) = (sqrt(1 + zeta^2) + zeta)^{1/3}.
cplx omega_hat_min(double lambda);

enum class SingularityKind { LeftEdge, RightEdge, Cusp, InternalMin, Ambiguous };
const char* to_string(SingularityKind k);

struct LocalFit {
  double exponent = 0.0;
  double coefficient = 0.0;
  double r2 = 0.0;
  int points = 0;
};

struct ClassifyOptions {
  double rho_tol = 1e-4;     // density below which tau0 counts as a zero
  double sigma_star = 1.0;   // regular-edge gate
  double sigma_band = 0.05;  // |sigma| below which a zero is a cusp candidate
  double edge_match = 1e-5;  // distance to a band endpoint that counts as the endpoint
};

struct SingularityReport {
  double tau0 = 0.0;
  SingularityKind kind = SingularityKind::Ambiguous;
  double delta_gap = 0.0;  // edges: gap length, 1 at extreme edges
  double sigma_star = 1.0;
  double rho0 = 0.0;
  double rho_tilde = 0.0;  // internal minimum: rho0 / Gamma^{1/3}
  ShapeParams params;
  LocalFit fit;            // fit on the support side(s)
  LocalFit fit_left, fit_right;
  std::vector<SingularityKind> candidates;  // filled when Ambiguous
  std::string note;
};

SingularityReport classify(const ModelSpec& spec, const BandStructure& structure, double tau0,
                           const SolveOptions& opts = {}, const ClassifyOptions& copts = {});

/// Leading-order density at tau0 + omega.
double predict_density(const SingularityReport& report, double omega);

enum class Side { Left, Right };

/// Least-squares slope of log(rho(tau0 +- w) - baseline) against log w on `points`
/// log-spaced w in [w_lo, w_hi]. Throws DomainError with fewer than 8 usable points.
LocalFit fit_local_exponent(const ModelSpec& spec, double tau0, Side side, double w_lo,
                            double w_hi, int points = 12, double baseline = 0.0,
                            const SolveOptions& opts = {});
/// Same, reading the density from a profile (no interpolation; grid points in the window).
LocalFit fit_local_exponent(const DensityProfile& profile, double tau0, Side side, double w_lo,
                            double w_hi, double baseline = 0.0, double rho_floor = 1e-7);

struct CubicResidual {
  double residual = 0.0;  // |mu3 Theta^3 + mu2 Theta^2 + mu1 Theta + pi omega|
  double theta = 0.0;     // |Theta(omega)|
  cplx theta_value;
};

/// Theta(omega) = <l, m(tau0 + omega) - m(tau0)> / <l, b> with the eigentriple at tau0.
CubicResidual cubic_residual(const ModelSpec& spec, double tau0, double omega,
                             const SolveOptions& opts = {});

}  // namespace dyson
