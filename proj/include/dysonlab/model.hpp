#pragma once

// The data pair (a, S): a Hermitian bare matrix and a symmetric,
// positivity-preserving self-energy, in four structural variants.

#include "dysonlab/algebra.hpp"

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace dyson {

/// S[x] = strength * <x> * 1
struct FlatSelfEnergy {
  double strength = 1.0;
};

/// Arbitrary S given by its matrix form on the full algebra.
struct DenseSelfEnergy {
  SuperOperator op;
};

/// Commutative two-component model on C^2 with weights (delta, 1 - delta),
/// S[(x1, x2)] = R (x1, x2), realized on diagonal n x n matrices.
struct TwoComponentSelfEnergy {
  double delta = 0.1;
  Eigen::Matrix2d R = Eigen::Matrix2d::Zero();
  int n0 = 20;
  int small_block = 0;  // size of the delta-weighted block
};

/// S[x]_i = sum_mu alpha_mu ((1/N) sum_j s_mu(i,j) x_j) alpha_mu
///        + sum_nu beta_nu ((1/N) sum_j t_nu(i,j) x_j) beta_nu^*
///        + beta_nu^* ((1/N) sum_j t_nu(j,i) x_j) beta_nu
/// on block-diagonal x = diag(x_1, ..., x_N) with K x K blocks.
struct KroneckerSelfEnergy {
  int K = 1;
  int N = 1;
  std::vector<Matrix> alpha;
  std::vector<Eigen::MatrixXd> s;
  std::vector<Matrix> beta;
  std::vector<Eigen::MatrixXd> t;
};

using SelfEnergy =
    std::variant<FlatSelfEnergy, DenseSelfEnergy, TwoComponentSelfEnergy, KroneckerSelfEnergy>;

/// S[x] = sum_{k,l} U_k shat(k,l) <V_l, x>
struct LowRankForm {
  std::vector<Matrix> U;
  std::vector<Matrix> V;
  Eigen::MatrixXcd shat;
};

struct FlatnessCertificate {
  double c1 = 0.0;
  double c2 = 0.0;
  std::string method;  // "exact" or "sampled"
  int samples = 0;
  double worst_ratio = 0.0;  // smallest sampled lambda_min(S[x]) / <x>
  bool flat() const { return c1 > 0.0; }
};

struct CertificationResult {
  bool pass = false;
  double defect = 0.0;
  int samples = 0;
};

class ModelSpec {
 public:
  ModelSpec(Matrix bare, SelfEnergy self_energy);

  static ModelSpec flat(Matrix bare, double strength = 1.0);
  static ModelSpec dense(Matrix bare, SuperOperator op);
  static ModelSpec kronecker(KroneckerSelfEnergy data, const std::vector<Matrix>& bare_blocks);

  int dim() const { return static_cast<int>(bare_.rows()); }
  const Matrix& bare() const { return bare_; }
  const SelfEnergy& self_energy() const { return se_; }
  std::string kind() const;

  /// Smallest block subalgebra that contains a, the range of S and the solution m.
  const BlockLayout& layout() const { return layout_; }

  Matrix apply_S(const Matrix& x) const;
  /// Matrix form of S restricted to layout().
  SuperOperator S_operator() const;
  const std::optional<LowRankForm>& low_rank() const { return low_rank_; }

  /// ||S|| = ||S[1]|| for positivity-preserving S.
  double S_norm() const { return s_norm_; }
  double bare_norm() const { return bare_norm_; }
  const RVector& bare_spectrum() const { return bare_spec_; }

  /// spectrum(a) + [-2 sqrt||S||, 2 sqrt||S||] as a sorted union of disjoint intervals.
  std::vector<std::pair<double, double>> support_bound() const;
  /// Convex hull of support_bound().
  std::pair<double, double> support_hull() const;
  bool in_support_bound(double tau, double slack = 0.0) const;

 private:
  Matrix bare_;
  SelfEnergy se_;
  BlockLayout layout_;
  std::optional<LowRankForm> low_rank_;
  std::shared_ptr<const SuperOperator> s_cache_;
  double s_norm_ = 0.0;
  double bare_norm_ = 0.0;
  RVector bare_spec_;
};

/// Diagonal realization on n = 2 n0 sites, 2 n0 delta of them in the small block.
/// Throws DomainError unless 0 < delta < 1 and 2 n0 delta is an integer.
ModelSpec build_two_component(double delta, double alpha, int n0 = 20);
ModelSpec build_two_component(double delta, const Eigen::Matrix2d& R, int n0 = 20);

/// Kronecker data with K = 1, one Hermitian component and the two-component profile.
KroneckerSelfEnergy two_component_kronecker(double delta, double alpha, int N);

/// Merges indices of a K-block Kronecker model whose kernel rows and bare blocks coincide,
/// shrinking N by the gcd of the group sizes. The Dyson equations are equivalent.
std::pair<KroneckerSelfEnergy, std::vector<Matrix>> reduce_kronecker(
    const KroneckerSelfEnergy& data, const std::vector<Matrix>& bare_blocks);

using LinearMap = std::function<Matrix(const Matrix&)>;

CertificationResult certify_symmetry(const LinearMap& S, int n, int samples = 200,
                                     std::uint64_t seed = 1);
CertificationResult certify_symmetry(const SuperOperator& S, int samples = 200,
                                     std::uint64_t seed = 1);
CertificationResult certify_symmetry(const ModelSpec& spec, int samples = 200,
                                     std::uint64_t seed = 1);

CertificationResult certify_positivity(const LinearMap& S, int n, int samples = 200,
                                       std::uint64_t seed = 2);
CertificationResult certify_positivity(const SuperOperator& S, int samples = 200,
                                       std::uint64_t seed = 2);
CertificationResult certify_positivity(const ModelSpec& spec, int samples = 200,
                                       std::uint64_t seed = 2);

FlatnessCertificate flatness_bounds(const ModelSpec& spec, int samples = 200,
                                    std::uint64_t seed = 3);

}  // namespace dyson
