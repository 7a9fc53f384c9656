#pragma once

// Band masses from the sign pattern of the Hermitian boundary value m(tau) in gaps.

#include "dysonlab/density.hpp"

#include <utility>
#include <vector>

namespace dyson {

inline constexpr double kIndexTolerance = 1e-8;
inline constexpr double kEdgeClearance = 0.02;

struct BandMassReport {
  double tau = 0.0;
  Matrix m_real;
  double residual = 0.0;           // real-axis Dyson residual
  double min_abs_eigenvalue = 0.0;
  double mass_left_formula = 0.0;  // <1_(-inf,0)(m(tau))>
  double mass_left_integral = 0.0;
};

/// Throws DomainError when tau is not classified outside the support or when m(tau)
/// has an eigenvalue within 1e-8 of zero. The integral uses `profile`.
BandMassReport band_mass_left(const ModelSpec& spec, double tau, const DensityProfile& profile,
                              const SolveOptions& opts = {});

/// Hermitian boundary value at a real tau outside the support.
Solution real_boundary_value(const ModelSpec& spec, double tau, const SolveOptions& opts = {},
                             const std::optional<Matrix>& warm = std::nullopt);

struct BandEntry {
  std::pair<double, double> interval;
  double mass = 0.0;           // from the formula
  double mass_integral = 0.0;
  double n_mass = 0.0;
  double defect = 0.0;         // |n mass - round(n mass)|
};

struct BandMassSummary {
  std::vector<BandEntry> bands;
  std::vector<BandMassReport> evaluations;  // below, in each gap, above
  double max_formula_vs_integral = 0.0;
  double max_gap_spread = 0.0;              // formula variation inside each gap
};

/// Formula evaluated below the support, at each gap midpoint and above the support.
/// Throws DomainError if the structure has unresolved edges or a gap narrower than
/// twice kEdgeClearance.
BandMassSummary band_masses(const ModelSpec& spec, const BandStructure& structure,
                            const DensityProfile& profile, const SolveOptions& opts = {});

/// ||m(tau) - (m(tau - h)/3 + m(tau + h) - m(tau + 2h)/3)||_2, an O(h^3) quantity
/// when m is analytic near tau.
double analytic_continuation_check(const ModelSpec& spec, double tau, double h,
                                   const SolveOptions& opts = {});

}  // namespace dyson
