#include "dysonlab/montecarlo.hpp"

#include <boost/random/normal_distribution.hpp>

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

namespace dyson {

namespace {

class EntrySource {
 public:
  EntrySource(std::uint64_t seed, std::uint64_t draw, EntryLaw law) : law_(law) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(draw), static_cast<std::uint32_t>(draw >> 32)};
    rng_.seed(seq);
  }

  // Unit-variance real entry (used on the diagonal of Hermitian components).
  double real() {
    if (law_ == EntryLaw::Rademacher) return (rng_() >> 63) ? 1.0 : -1.0;
    return gauss_(rng_);
  }

  // E|xi|^2 = 1.
  cplx entry() {
    if (law_ == EntryLaw::ComplexGaussian) {
      const double re = gauss_(rng_), im = gauss_(rng_);
      return cplx(re, im) * M_SQRT1_2;
    }
    return real();
  }

 private:
  EntryLaw law_;
  std::mt19937_64 rng_;
  boost::random::normal_distribution<double> gauss_{0.0, 1.0};
};

}  // namespace

const char* to_string(EntryLaw law) {
  switch (law) {
    case EntryLaw::ComplexGaussian: return "complex_gaussian";
    case EntryLaw::RealGaussian: return "real_gaussian";
    default: return "rademacher";
  }
}

EntryLaw parse_entry_law(const std::string& name) {
  if (name == "complex_gaussian") return EntryLaw::ComplexGaussian;
  if (name == "real_gaussian") return EntryLaw::RealGaussian;
  if (name == "rademacher") return EntryLaw::Rademacher;
  throw DomainError("unknown entry law '" + name + "'");
}

void EnsembleSpec::validate() const {
  const int K = kernel.K, N = kernel.N;
  if (K < 1 || N < 1) throw DimensionError("ensemble: K and N must be positive");
  if (kernel.alpha.size() != kernel.s.size() || kernel.beta.size() != kernel.t.size())
    throw DimensionError("ensemble: one variance profile per coefficient matrix");
  for (std::size_t mu = 0; mu < kernel.alpha.size(); ++mu) {
    const Matrix& a = kernel.alpha[mu];
    if (a.rows() != K || a.cols() != K) throw DimensionError("ensemble: alpha must be K x K");
    if (!is_hermitian(a, 1e-12)) throw DomainError("ensemble: alpha must be Hermitian");
    const Eigen::MatrixXd& s = kernel.s[mu];
    if (s.rows() != N || s.cols() != N) throw DimensionError("ensemble: s must be N x N");
    if ((s - s.transpose()).norm() > 1e-12 * (1.0 + s.norm()))
      throw DomainError("ensemble: s must be symmetric");
    if (s.minCoeff() < 0) throw DomainError("ensemble: s must be non-negative");
  }
  for (std::size_t nu = 0; nu < kernel.beta.size(); ++nu) {
    if (kernel.beta[nu].rows() != K || kernel.beta[nu].cols() != K)
      throw DimensionError("ensemble: beta must be K x K");
    const Eigen::MatrixXd& t = kernel.t[nu];
    if (t.rows() != N || t.cols() != N) throw DimensionError("ensemble: t must be N x N");
    if (t.minCoeff() < 0) throw DomainError("ensemble: t must be non-negative");
  }
  if (!bare_blocks.empty()) {
    if (static_cast<int>(bare_blocks.size()) != N) throw DimensionError("ensemble: need N bare blocks");
    for (const auto& b : bare_blocks) {
      if (b.rows() != K || b.cols() != K) throw DimensionError("ensemble: bare block must be K x K");
      if (!is_hermitian(b, 1e-12)) throw DomainError("ensemble: bare block must be Hermitian");
    }
  }
}

ModelSpec EnsembleSpec::model() const {
  validate();
  std::vector<Matrix> bare = bare_blocks;
  if (bare.empty()) bare.assign(kernel.N, Matrix::Zero(kernel.K, kernel.K));
  auto [k, b] = reduce_kronecker(kernel, bare);
  return ModelSpec::kronecker(std::move(k), b);
}

EnsembleSpec wigner_ensemble(int N, std::uint64_t seed) {
  EnsembleSpec e;
  e.kernel.K = 1;
  e.kernel.N = N;
  e.kernel.alpha.push_back(Matrix::Identity(1, 1));
  e.kernel.s.push_back(Eigen::MatrixXd::Ones(N, N));
  e.seed = seed;
  return e;
}

EnsembleSpec two_component_ensemble(double delta, double alpha, int N, std::uint64_t seed) {
  EnsembleSpec e;
  e.kernel = two_component_kronecker(delta, alpha, N);
  e.seed = seed;
  return e;
}

Matrix sample(const EnsembleSpec& ens, std::uint64_t draw) {
  ens.validate();
  const int K = ens.kernel.K, N = ens.kernel.N;
  const double scale = 1.0 / std::sqrt(static_cast<double>(N));
  EntrySource src(ens.seed, draw, ens.law);
  Matrix H = Matrix::Zero(K * N, K * N);
  for (int i = 0; i < N && !ens.bare_blocks.empty(); ++i)
    H.block(i * K, i * K, K, K) = ens.bare_blocks[i];

  for (std::size_t mu = 0; mu < ens.kernel.alpha.size(); ++mu) {
    const Matrix& a = ens.kernel.alpha[mu];
    const Eigen::MatrixXd& s = ens.kernel.s[mu];
    for (int i = 0; i < N; ++i) {
      const double d = std::sqrt(s(i, i)) * scale * src.real();
      H.block(i * K, i * K, K, K) += d * a;
      for (int j = i + 1; j < N; ++j) {
        const cplx x = std::sqrt(s(i, j)) * scale * src.entry();
        H.block(i * K, j * K, K, K) += x * a;
        H.block(j * K, i * K, K, K) += std::conj(x) * a;
      }
    }
  }
  for (std::size_t nu = 0; nu < ens.kernel.beta.size(); ++nu) {
    const Matrix& b = ens.kernel.beta[nu];
    const Matrix bs = b.adjoint();
    const Eigen::MatrixXd& t = ens.kernel.t[nu];
    for (int i = 0; i < N; ++i)
      for (int j = 0; j < N; ++j) {
        const cplx y = std::sqrt(t(i, j)) * scale * src.entry();
        H.block(i * K, j * K, K, K) += y * b;
        H.block(j * K, i * K, K, K) += std::conj(y) * bs;
      }
  }
  return H;
}

std::vector<double> esd(const Matrix& H) {
  if (!is_hermitian(H, 1e-10)) throw DomainError("esd: matrix is not Hermitian");
  Eigen::SelfAdjointEigenSolver<Matrix> es(H, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw NumericalError("esd: eigensolver failed");
  std::vector<double> ev(es.eigenvalues().data(), es.eigenvalues().data() + es.eigenvalues().size());
  std::sort(ev.begin(), ev.end());
  return ev;
}

Comparison compare(const std::vector<double>& eigenvalues, const DensityProfile& profile,
                   double bin_width) {
  const auto& t = profile.taus;
  const auto& r = profile.rho;
  if (t.size() < 2 || eigenvalues.empty()) throw DomainError("compare: empty input");
  if (!(bin_width > 0)) throw DomainError("compare: bin width must be positive");
  std::vector<double> ev = eigenvalues;
  std::sort(ev.begin(), ev.end());
  if (ev.front() < t.front() || ev.back() > t.back()) {
    std::ostringstream os;
    os << "compare: eigenvalues [" << ev.front() << ", " << ev.back()
       << "] exceed the profile window [" << t.front() << ", " << t.back() << "]";
    throw DomainError(os.str());
  }

  // Cumulative trapezoid integral of the piecewise linear interpolant.
  std::vector<double> cum(t.size(), 0.0);
  for (std::size_t i = 1; i < t.size(); ++i) cum[i] = cum[i - 1] + 0.5 * (t[i] - t[i - 1]) * (r[i] + r[i - 1]);
  const double total = cum.back();
  if (!(total > 0)) throw DomainError("compare: profile has no mass");
  auto cdf = [&](double x) {
    if (x <= t.front()) return 0.0;
    if (x >= t.back()) return 1.0;
    const std::size_t i = std::upper_bound(t.begin(), t.end(), x) - t.begin();
    const double h = t[i] - t[i - 1], d = x - t[i - 1];
    const double rx = r[i - 1] + (r[i] - r[i - 1]) * d / h;
    return (cum[i - 1] + 0.5 * d * (r[i - 1] + rx)) / total;
  };

  Comparison c;
  c.n = static_cast<int>(ev.size());
  c.bin_width = bin_width;
  const double n = ev.size();
  for (std::size_t k = 0; k < ev.size(); ++k) {
    const double F = cdf(ev[k]);
    c.ks = std::max({c.ks, std::abs(F - k / n), std::abs(F - (k + 1) / n)});
  }
  const int bins = static_cast<int>(std::ceil((t.back() - t.front()) / bin_width));
  std::size_t k = 0;
  for (int b = 0; b < bins; ++b) {
    const double lo = t.front() + b * bin_width, hi = std::min(t.back(), lo + bin_width);
    std::size_t count = 0;
    while (k < ev.size() && (ev[k] < hi || (b == bins - 1 && ev[k] <= hi))) ++count, ++k;
    c.l1_hist += std::abs(count / n - (cdf(hi) - cdf(lo)));
  }
  return c;
}

double mass_in(const std::vector<double>& eigenvalues, double lo, double hi) {
  if (eigenvalues.empty()) return 0.0;
  const auto n = std::count_if(eigenvalues.begin(), eigenvalues.end(),
                               [&](double x) { return x >= lo && x <= hi; });
  return static_cast<double>(n) / eigenvalues.size();
}

}  // namespace dyson
