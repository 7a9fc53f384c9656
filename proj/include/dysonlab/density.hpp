#pragma once

#include "dysonlab/solver.hpp"

#include <string>
#include <utility>
#include <vector>

namespace dyson {

double density_at(const ModelSpec& spec, double tau, const SolveOptions& opts = {});

enum class SupportKind { Inside, Outside, Inconclusive };
const char* to_string(SupportKind k);

/// Support test from the trend of r(eta) = eta / ||Im m(tau + i eta)|| along the ladder.
/// `limit` is the linear extrapolation 2 r(eta) - r(2 eta); `order` is log2(r(2 eta) / r(eta)),
/// close to 1 inside the support and to 0 outside.
struct SupportDecision {
  SupportKind kind = SupportKind::Inconclusive;
  double limit = 0.0;
  double order = 0.0;
  double eta = 0.0;
  double margin = 0.0;  // limit / eta
};

SupportDecision decide_support(const BoundaryValue& bv);
/// Uses the ladder already in bv and extends it by 4 halvings if the first look is undecided.
SupportDecision classify_point(const ModelSpec& spec, BoundaryValue& bv, const SolveOptions& opts = {});
SupportDecision classify_point(const ModelSpec& spec, double tau, const SolveOptions& opts = {});

struct DensityProfile {
  std::vector<double> taus;
  std::vector<double> rho;
  std::vector<double> eta_used;
  std::vector<bool> inside;
  std::vector<bool> inconclusive;
  std::vector<std::string> errors;  // empty string when the point solved
  int failures() const;
};

DensityProfile scan(const ModelSpec& spec, double lo, double hi, int points,
                    const SolveOptions& opts = {}, int jobs = 1);

struct Minimum {
  double tau = 0.0;
  double rho = 0.0;
};

struct BandStructure {
  std::vector<std::pair<double, double>> bands;
  std::vector<std::pair<double, double>> gaps;
  std::vector<Minimum> minima;
  std::vector<std::string> warnings;  // unresolved edges and similar
};

/// Bands from runs of inside points, edges bisected with classify_point down to
/// `edge_tol`, grid minima refined by Brent's method between the neighbouring grid points.
BandStructure band_structure(const ModelSpec& spec, const DensityProfile& profile,
                             const SolveOptions& opts = {}, double edge_tol = 1e-7);

/// Trapezoid integral of rho. Throws DomainError if the profile does not cover the
/// support bound spectrum(a) + [-2 sqrt||S||, 2 sqrt||S||].
double total_mass(const ModelSpec& spec, const DensityProfile& profile);
/// Trapezoid integral of rho over [lo, hi] (clipped to the profile's window).
double partial_mass(const DensityProfile& profile, double lo, double hi);

}  // namespace dyson
