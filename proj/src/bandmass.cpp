#include "dysonlab/bandmass.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace dyson {

namespace {

// Normalized count of negative eigenvalues; throws when an eigenvalue is too close to 0.
double negative_fraction(const BlockLayout& L, const Matrix& m, double& min_abs) {
  min_abs = INFINITY;
  Matrix ind = L.apply_hermitian(m, [&min_abs](double t) {
    min_abs = std::min(min_abs, std::abs(t));
    if (std::abs(t) < kIndexTolerance) throw DomainError("band mass: indeterminate index, m(tau) has an eigenvalue near 0");
    return t < 0 ? 1.0 : 0.0;
  });
  return normalized_trace(ind).real();
}

}  // namespace

Solution real_boundary_value(const ModelSpec& spec, double tau, const SolveOptions& opts,
                             const std::optional<Matrix>& warm) {
  BoundaryValue bv = boundary_value(spec, tau, opts, warm);
  return solve_real_axis(spec, tau, bv.m0, opts);
}

BandMassReport band_mass_left(const ModelSpec& spec, double tau, const DensityProfile& profile,
                              const SolveOptions& opts) {
  BoundaryValue bv = boundary_value(spec, tau, opts);
  SupportDecision d = classify_point(spec, bv, opts);
  if (d.kind != SupportKind::Outside) {
    std::ostringstream os;
    os << "band_mass_left: tau = " << tau << " is not outside the support (" << to_string(d.kind) << ")";
    throw DomainError(os.str());
  }
  Solution sol = solve_real_axis(spec, tau, bv.m0, opts);
  if (!is_hermitian(sol.m, 1e-8)) throw NumericalError("band_mass_left: real boundary value not Hermitian");

  BandMassReport r;
  r.tau = tau;
  r.m_real = (sol.m + sol.m.adjoint()) / 2.0;
  r.residual = sol.residual;
  r.mass_left_formula = negative_fraction(spec.layout(), r.m_real, r.min_abs_eigenvalue);
  const double lo = spec.support_hull().first;
  if (!profile.taus.empty() && profile.taus.front() <= lo)
    r.mass_left_integral = partial_mass(profile, profile.taus.front(), tau);
  else if (!profile.taus.empty() && tau <= lo)
    r.mass_left_integral = 0.0;
  else
    throw DomainError("band_mass_left: profile does not reach below the support");
  return r;
}

BandMassSummary band_masses(const ModelSpec& spec, const BandStructure& structure,
                            const DensityProfile& profile, const SolveOptions& opts) {
  for (const auto& w : structure.warnings)
    if (w.find("unresolved") != std::string::npos) throw DomainError("band_masses: " + w);
  const auto& bands = structure.bands;
  if (bands.empty()) throw DomainError("band_masses: no bands");

  std::vector<double> points;
  points.push_back(bands.front().first - 0.5);
  for (std::size_t g = 0; g + 1 < bands.size(); ++g) {
    const double a = bands[g].second, b = bands[g + 1].first;
    if (b - a < 2.0 * kEdgeClearance) {
      std::ostringstream os;
      os << "band_masses: gap [" << a << ", " << b << "] is narrower than " << 2.0 * kEdgeClearance;
      throw DomainError(os.str());
    }
    points.push_back(0.5 * (a + b));
  }
  points.push_back(bands.back().second + 0.5);

  BandMassSummary out;
  for (double tau : points) out.evaluations.push_back(band_mass_left(spec, tau, profile, opts));
  const double n = spec.dim();
  for (std::size_t b = 0; b < bands.size(); ++b) {
    BandEntry e;
    e.interval = bands[b];
    e.mass = out.evaluations[b + 1].mass_left_formula - out.evaluations[b].mass_left_formula;
    e.mass_integral =
        out.evaluations[b + 1].mass_left_integral - out.evaluations[b].mass_left_integral;
    e.n_mass = n * e.mass;
    e.defect = std::abs(e.n_mass - std::round(e.n_mass));
    out.bands.push_back(e);
  }
  for (const auto& ev : out.evaluations)
    out.max_formula_vs_integral =
        std::max(out.max_formula_vs_integral, std::abs(ev.mass_left_formula - ev.mass_left_integral));

  // Three points in the part of each gap that keeps the edge clearance.
  for (std::size_t g = 0; g + 1 < bands.size(); ++g) {
    const double a = bands[g].second + kEdgeClearance, b = bands[g + 1].first - kEdgeClearance;
    double lo = INFINITY, hi = -INFINITY;
    for (double t : {a, 0.5 * (a + b), b}) {
      BandMassReport r = band_mass_left(spec, t, profile, opts);
      lo = std::min(lo, r.mass_left_formula);
      hi = std::max(hi, r.mass_left_formula);
    }
    out.max_gap_spread = std::max(out.max_gap_spread, hi - lo);
  }
  return out;
}

double analytic_continuation_check(const ModelSpec& spec, double tau, double h,
                                   const SolveOptions& opts) {
  Solution c = real_boundary_value(spec, tau, opts);
  auto at = [&](double t) { return solve_real_axis(spec, t, c.m, opts).m; };
  const Matrix extrap = at(tau - h) / 3.0 + at(tau + h) - at(tau + 2.0 * h) / 3.0;
  return norm2(c.m - extrap);
}

}  // namespace dyson
