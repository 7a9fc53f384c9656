#pragma once

#include "dysonlab/density.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace dyson {

enum class EntryLaw { ComplexGaussian, RealGaussian, Rademacher };
const char* to_string(EntryLaw law);
EntryLaw parse_entry_law(const std::string& name);

/// H = A + sum_mu X_mu (x) alpha_mu + sum_nu (Y_nu (x) beta_nu + Y_nu^* (x) beta_nu^*)
/// in index-major ordering (row i K + a), with E|X_mu(i,j)|^2 = s_mu(i,j)/N and
/// E|Y_nu(i,j)|^2 = t_nu(i,j)/N. The data layout matches KroneckerSelfEnergy.
struct EnsembleSpec {
  KroneckerSelfEnergy kernel;
  std::vector<Matrix> bare_blocks;  // N blocks of size K x K, or empty for zero
  EntryLaw law = EntryLaw::ComplexGaussian;
  std::uint64_t seed = 7;

  void validate() const;
  ModelSpec model() const;
};

EnsembleSpec wigner_ensemble(int N, std::uint64_t seed = 7);
EnsembleSpec two_component_ensemble(double delta, double alpha, int N, std::uint64_t seed = 7);

/// Draw number `draw`; the stream depends only on (seed, draw).
Matrix sample(const EnsembleSpec& ens, std::uint64_t draw = 0);

/// Sorted eigenvalues of a Hermitian matrix.
std::vector<double> esd(const Matrix& H);

struct Comparison {
  double ks = 0.0;
  double l1_hist = 0.0;
  double bin_width = 0.0;
  int n = 0;
};

/// Kolmogorov-Smirnov distance to the trapezoid CDF of the profile (normalized to mass 1)
/// and the L1 distance between histograms with the given bin width. Throws DomainError
/// when an eigenvalue lies outside the profile window.
Comparison compare(const std::vector<double>& eigenvalues, const DensityProfile& profile,
                   double bin_width = 0.05);

/// Fraction of eigenvalues inside [lo, hi].
double mass_in(const std::vector<double>& eigenvalues, double lo, double hi);

}  // namespace dyson
