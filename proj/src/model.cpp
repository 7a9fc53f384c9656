#include "dysonlab/model.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

namespace dyson {

namespace {

Matrix gaussian_matrix(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  Matrix x(n, n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) x(i, j) = cplx(g(rng), g(rng)) / std::sqrt(2.0);
  return x;
}

CVector unit_vector(int k, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  CVector v(k);
  for (int i = 0; i < k; ++i) v(i) = cplx(g(rng), g(rng));
  return v / v.norm();
}

BlockLayout natural_layout(const Matrix& a, const SelfEnergy& se) {
  const int n = static_cast<int>(a.rows());
  BlockLayout candidate = BlockLayout::full(n);
  if (std::holds_alternative<FlatSelfEnergy>(se) || std::holds_alternative<TwoComponentSelfEnergy>(se)) {
    candidate = BlockLayout::diagonal(n);
  } else if (const auto* k = std::get_if<KroneckerSelfEnergy>(&se)) {
    candidate = BlockLayout::uniform(k->N, k->K);
  }
  if (!candidate.contains(a, 0.0)) return BlockLayout::full(n);
  return candidate;
}

Matrix block_projection(int n, int begin, int end) {
  Matrix p = Matrix::Zero(n, n);
  for (int i = begin; i < end; ++i) p(i, i) = 1.0;
  return p;
}

void validate_kronecker(const KroneckerSelfEnergy& k) {
  if (k.K <= 0 || k.N <= 0) throw DomainError("kronecker: K and N must be positive");
  if (k.alpha.size() != k.s.size()) throw DomainError("kronecker: alpha/s count mismatch");
  if (k.beta.size() != k.t.size()) throw DomainError("kronecker: beta/t count mismatch");
  for (std::size_t mu = 0; mu < k.alpha.size(); ++mu) {
    if (k.alpha[mu].rows() != k.K || k.alpha[mu].cols() != k.K)
      throw DimensionError("kronecker: alpha has wrong size");
    if (!is_hermitian(k.alpha[mu], 1e-12)) throw DomainError("kronecker: alpha must be Hermitian");
    if (k.s[mu].rows() != k.N || k.s[mu].cols() != k.N)
      throw DimensionError("kronecker: s has wrong size");
    if ((k.s[mu] - k.s[mu].transpose()).cwiseAbs().maxCoeff() > 1e-12)
      throw DomainError("kronecker: s must be symmetric");
    if (k.s[mu].minCoeff() < 0) throw DomainError("kronecker: s must be nonnegative");
  }
  for (std::size_t nu = 0; nu < k.beta.size(); ++nu) {
    if (k.beta[nu].rows() != k.K || k.beta[nu].cols() != k.K)
      throw DimensionError("kronecker: beta has wrong size");
    if (k.t[nu].rows() != k.N || k.t[nu].cols() != k.N)
      throw DimensionError("kronecker: t has wrong size");
    if (k.t[nu].minCoeff() < 0) throw DomainError("kronecker: t must be nonnegative");
  }
}

Matrix kronecker_apply(const KroneckerSelfEnergy& k, const Matrix& x) {
  const int K = k.K, N = k.N, n = K * N;
  // Columns of xs are vec(x_j).
  Eigen::MatrixXcd xs(K * K, N);
  for (int j = 0; j < N; ++j)
    xs.col(j) = Eigen::Map<const CVector>(Matrix(x.block(j * K, j * K, K, K)).data(), K * K);
  Matrix out = Matrix::Zero(n, n);
  auto block_of = [K](const Eigen::MatrixXcd& ys, int i) {
    return Eigen::Map<const Matrix>(ys.col(i).data(), K, K);
  };
  const double invN = 1.0 / N;
  for (std::size_t mu = 0; mu < k.alpha.size(); ++mu) {
    Eigen::MatrixXcd ys = xs * k.s[mu].transpose().cast<cplx>() * invN;
    for (int i = 0; i < N; ++i)
      out.block(i * K, i * K, K, K) += k.alpha[mu] * block_of(ys, i) * k.alpha[mu];
  }
  for (std::size_t nu = 0; nu < k.beta.size(); ++nu) {
    Eigen::MatrixXcd y1 = xs * k.t[nu].transpose().cast<cplx>() * invN;
    Eigen::MatrixXcd y2 = xs * k.t[nu].cast<cplx>() * invN;
    const Matrix& b = k.beta[nu];
    for (int i = 0; i < N; ++i)
      out.block(i * K, i * K, K, K) +=
          b * block_of(y1, i) * b.adjoint() + b.adjoint() * block_of(y2, i) * b;
  }
  return out;
}

// sum_mu w_mu alpha kappa alpha + sum_nu v_nu (beta kappa beta^* + beta^* kappa beta)
Matrix kronecker_congruence(const KroneckerSelfEnergy& k, const Matrix& kappa,
                            const std::vector<double>& w, const std::vector<double>& v) {
  Matrix out = Matrix::Zero(k.K, k.K);
  for (std::size_t mu = 0; mu < k.alpha.size(); ++mu)
    out += w[mu] * k.alpha[mu] * kappa * k.alpha[mu];
  for (std::size_t nu = 0; nu < k.beta.size(); ++nu)
    out += v[nu] * (k.beta[nu] * kappa * k.beta[nu].adjoint() +
                    k.beta[nu].adjoint() * kappa * k.beta[nu]);
  return out;
}

double extreme_eigenvalue(const Matrix& h, bool smallest) {
  Eigen::SelfAdjointEigenSolver<Matrix> es((h + h.adjoint()) / 2.0, Eigen::EigenvaluesOnly);
  return smallest ? es.eigenvalues()(0) : es.eigenvalues()(es.eigenvalues().size() - 1);
}

// Optimizes the extreme eigenvalue of a congruence sum over rank-one kappa = v v^*.
double optimize_rank_one(const KroneckerSelfEnergy& k, const std::vector<double>& w,
                         const std::vector<double>& v, bool minimize, int samples,
                         std::mt19937_64& rng) {
  auto objective = [&](const CVector& x) {
    Matrix kappa = x * x.adjoint();
    double e = extreme_eigenvalue(kronecker_congruence(k, kappa, w, v), minimize);
    return minimize ? e : -e;
  };
  CVector best = CVector::Zero(k.K);
  best(0) = 1.0;
  double best_val = objective(best);
  for (int i = 0; i < k.K; ++i) {
    CVector e = CVector::Zero(k.K);
    e(i) = 1.0;
    double val = objective(e);
    if (val < best_val) best_val = val, best = e;
  }
  for (int s = 0; s < samples; ++s) {
    CVector x = unit_vector(k.K, rng);
    double val = objective(x);
    if (val < best_val) best_val = val, best = x;
  }
  // Local random search with a shrinking step.
  double step = 0.5;
  for (int it = 0; it < 400 && step > 1e-9; ++it) {
    CVector x = best + step * unit_vector(k.K, rng);
    x /= x.norm();
    double val = objective(x);
    if (val < best_val) {
      best_val = val;
      best = x;
    } else if (it % 20 == 19) {
      step *= 0.5;
    }
  }
  return minimize ? best_val : -best_val;
}

}  // namespace

ModelSpec::ModelSpec(Matrix bare, SelfEnergy self_energy)
    : bare_(std::move(bare)), se_(std::move(self_energy)), layout_(BlockLayout::full(1)) {
  if (bare_.rows() == 0 || bare_.rows() != bare_.cols())
    throw DimensionError("ModelSpec: bare matrix must be square and nonempty");
  if (!bare_.allFinite()) throw DomainError("ModelSpec: bare matrix has non-finite entries");
  if (!is_hermitian(bare_, 1e-12)) throw DomainError("ModelSpec: bare matrix must be Hermitian");
  bare_ = (bare_ + bare_.adjoint()) / 2.0;
  const int n = dim();

  if (const auto* f = std::get_if<FlatSelfEnergy>(&se_)) {
    if (!(f->strength > 0)) throw DomainError("flat self-energy needs a positive strength");
    low_rank_ = LowRankForm{{identity(n)}, {identity(n)}, Eigen::MatrixXcd::Constant(1, 1, f->strength)};
  } else if (const auto* d = std::get_if<DenseSelfEnergy>(&se_)) {
    if (!d->op.layout().is_full() || d->op.layout().matrix_dim() != n)
      throw DimensionError("dense self-energy must act on the full n x n algebra");
  } else if (const auto* t = std::get_if<TwoComponentSelfEnergy>(&se_)) {
    if (n != 2 * t->n0) throw DimensionError("two-component model: n must equal 2 n0");
    if (t->small_block <= 0 || t->small_block >= n)
      throw DomainError("two-component model: invalid block split");
    const double w[2] = {t->delta, 1.0 - t->delta};
    Eigen::MatrixXcd shat(2, 2);
    for (int kk = 0; kk < 2; ++kk)
      for (int l = 0; l < 2; ++l) shat(kk, l) = t->R(kk, l) / w[l];
    Matrix p0 = block_projection(n, 0, t->small_block);
    Matrix p1 = block_projection(n, t->small_block, n);
    low_rank_ = LowRankForm{{p0, p1}, {p0, p1}, shat};
  } else if (const auto* k = std::get_if<KroneckerSelfEnergy>(&se_)) {
    validate_kronecker(*k);
    if (n != k->K * k->N) throw DimensionError("kronecker model: bare must be KN x KN");
  }

  layout_ = natural_layout(bare_, se_);
  bare_spec_ = hermitian_eigen(bare_).values;
  bare_norm_ = bare_spec_.cwiseAbs().maxCoeff();
  s_norm_ = layout_.max_eigenvalue(apply_S(identity(n)));
  if (!low_rank_ && layout_.vector_dim() <= 4096) s_cache_ = std::make_shared<SuperOperator>(S_operator());
}

ModelSpec ModelSpec::flat(Matrix bare, double strength) {
  return ModelSpec(std::move(bare), FlatSelfEnergy{strength});
}

ModelSpec ModelSpec::dense(Matrix bare, SuperOperator op) {
  return ModelSpec(std::move(bare), DenseSelfEnergy{std::move(op)});
}

ModelSpec ModelSpec::kronecker(KroneckerSelfEnergy data, const std::vector<Matrix>& bare_blocks) {
  const int K = data.K, N = data.N;
  if (static_cast<int>(bare_blocks.size()) != N)
    throw DimensionError("kronecker model: need one bare block per index");
  Matrix a = Matrix::Zero(K * N, K * N);
  for (int i = 0; i < N; ++i) {
    if (bare_blocks[i].rows() != K || bare_blocks[i].cols() != K)
      throw DimensionError("kronecker model: bare block has wrong size");
    a.block(i * K, i * K, K, K) = bare_blocks[i];
  }
  return ModelSpec(std::move(a), std::move(data));
}

std::string ModelSpec::kind() const {
  switch (se_.index()) {
    case 0: return "flat";
    case 1: return "dense";
    case 2: return "two_component";
    default: return "kronecker";
  }
}

Matrix ModelSpec::apply_S(const Matrix& x) const {
  const int n = dim();
  if (x.rows() != n || x.cols() != n) throw DimensionError("apply_S: size mismatch");
  if (const auto* f = std::get_if<FlatSelfEnergy>(&se_)) {
    return identity(n) * (f->strength * normalized_trace(x));
  }
  if (const auto* d = std::get_if<DenseSelfEnergy>(&se_)) return d->op.apply(x);
  if (const auto* t = std::get_if<TwoComponentSelfEnergy>(&se_)) {
    const int ns = t->small_block;
    cplx avg0 = x.diagonal().head(ns).sum() / static_cast<double>(ns);
    cplx avg1 = x.diagonal().tail(n - ns).sum() / static_cast<double>(n - ns);
    Matrix out = Matrix::Zero(n, n);
    cplx v0 = t->R(0, 0) * avg0 + t->R(0, 1) * avg1;
    cplx v1 = t->R(1, 0) * avg0 + t->R(1, 1) * avg1;
    for (int i = 0; i < n; ++i) out(i, i) = i < ns ? v0 : v1;
    return out;
  }
  return kronecker_apply(std::get<KroneckerSelfEnergy>(se_), x);
}

SuperOperator ModelSpec::S_operator() const {
  if (s_cache_) return *s_cache_;
  if (const auto* d = std::get_if<DenseSelfEnergy>(&se_)) {
    if (layout_.is_full()) return d->op;
  }
  if (low_rank_) {
    const int dd = layout_.vector_dim();
    const double n = dim();
    const std::size_t r = low_rank_->U.size();
    Eigen::MatrixXcd u(dd, r), v(dd, r);
    for (std::size_t k = 0; k < r; ++k) {
      u.col(k) = layout_.vec(low_rank_->U[k]);
      v.col(k) = layout_.vec(low_rank_->V[k]);
    }
    return SuperOperator(layout_, u * low_rank_->shat * v.adjoint() / n);
  }
  return SuperOperator::from_map(layout_, [this](const Matrix& x) { return apply_S(x); });
}

std::vector<std::pair<double, double>> ModelSpec::support_bound() const {
  const double r = 2.0 * std::sqrt(s_norm_);
  std::vector<std::pair<double, double>> out;
  for (Eigen::Index i = 0; i < bare_spec_.size(); ++i) {
    double lo = bare_spec_(i) - r, hi = bare_spec_(i) + r;
    if (!out.empty() && lo <= out.back().second) {
      out.back().second = std::max(out.back().second, hi);
    } else {
      out.emplace_back(lo, hi);
    }
  }
  return out;
}

std::pair<double, double> ModelSpec::support_hull() const {
  auto b = support_bound();
  return {b.front().first, b.back().second};
}

bool ModelSpec::in_support_bound(double tau, double slack) const {
  for (const auto& [lo, hi] : support_bound())
    if (tau >= lo - slack && tau <= hi + slack) return true;
  return false;
}

ModelSpec build_two_component(double delta, const Eigen::Matrix2d& R, int n0) {
  if (!(delta > 0.0 && delta < 1.0)) throw DomainError("two-component model: delta must lie in (0,1)");
  if (n0 <= 0) throw DomainError("two-component model: n0 must be positive");
  if ((R.array() < 0).any()) throw DomainError("two-component model: R must be nonnegative");
  if (std::abs(delta * R(0, 1) - (1.0 - delta) * R(1, 0)) > 1e-12 * std::max(1.0, R.norm()))
    throw DomainError("two-component model: R is not symmetric for the weighted trace");
  const int n = 2 * n0;
  const double small = delta * n;
  const int ns = static_cast<int>(std::lround(small));
  if (std::abs(small - ns) > 1e-9 || ns == 0 || ns == n) {
    std::ostringstream os;
    os << "two-component model: 2*n0*delta = " << small << " must be an integer in (0, " << n << ")";
    throw DomainError(os.str());
  }
  TwoComponentSelfEnergy t;
  t.delta = delta;
  t.R = R;
  t.n0 = n0;
  t.small_block = ns;
  return ModelSpec(Matrix::Zero(n, n), t);
}

ModelSpec build_two_component(double delta, double alpha, int n0) {
  if (!(alpha > 0.0)) throw DomainError("two-component model: alpha must be positive");
  Eigen::Matrix2d R;
  R << alpha * delta, 1.0 - delta, delta, alpha * (1.0 - delta);
  return build_two_component(delta, R, n0);
}

KroneckerSelfEnergy two_component_kronecker(double delta, double alpha, int N) {
  if (!(delta > 0.0 && delta < 1.0)) throw DomainError("two-component model: delta must lie in (0,1)");
  const double small = delta * N;
  const int ns = static_cast<int>(std::lround(small));
  if (std::abs(small - ns) > 1e-9 || ns == 0 || ns == N)
    throw DomainError("two-component Kronecker model: N*delta must be an integer in (0, N)");
  KroneckerSelfEnergy k;
  k.K = 1;
  k.N = N;
  k.alpha.push_back(Matrix::Identity(1, 1));
  Eigen::MatrixXd s(N, N);
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j) s(i, j) = ((i < ns) == (j < ns)) ? alpha : 1.0;
  k.s.push_back(std::move(s));
  return k;
}

std::pair<KroneckerSelfEnergy, std::vector<Matrix>> reduce_kronecker(
    const KroneckerSelfEnergy& data, const std::vector<Matrix>& bare_blocks) {
  validate_kronecker(data);
  const int N = data.N;
  if (static_cast<int>(bare_blocks.size()) != N)
    throw DimensionError("reduce_kronecker: need one bare block per index");

  auto same_index = [&](int i, int j) {
    if ((bare_blocks[i] - bare_blocks[j]).norm() != 0.0) return false;
    for (const auto& s : data.s)
      if (s.row(i) != s.row(j)) return false;
    for (const auto& t : data.t)
      if (t.row(i) != t.row(j) || t.col(i) != t.col(j)) return false;
    return true;
  };

  std::vector<int> rep;    // representative index of each group
  std::vector<int> count;  // group sizes
  for (int i = 0; i < N; ++i) {
    bool placed = false;
    for (std::size_t g = 0; g < rep.size(); ++g)
      if (same_index(i, rep[g])) {
        ++count[g];
        placed = true;
        break;
      }
    if (!placed) {
      rep.push_back(i);
      count.push_back(1);
    }
  }
  int g = 0;
  for (int c : count) g = std::gcd(g, c);

  std::vector<int> source;  // original representative for each reduced index
  for (std::size_t k = 0; k < rep.size(); ++k)
    for (int c = 0; c < count[k] / g; ++c) source.push_back(rep[k]);
  const int M = static_cast<int>(source.size());

  KroneckerSelfEnergy out;
  out.K = data.K;
  out.N = M;
  out.alpha = data.alpha;
  out.beta = data.beta;
  auto shrink = [&](const Eigen::MatrixXd& m) {
    Eigen::MatrixXd r(M, M);
    for (int i = 0; i < M; ++i)
      for (int j = 0; j < M; ++j) r(i, j) = m(source[i], source[j]);
    return r;
  };
  for (const auto& s : data.s) out.s.push_back(shrink(s));
  for (const auto& t : data.t) out.t.push_back(shrink(t));
  std::vector<Matrix> blocks;
  for (int i = 0; i < M; ++i) blocks.push_back(bare_blocks[source[i]]);
  return {std::move(out), std::move(blocks)};
}

// ---------------------------------------------------------------------------

CertificationResult certify_symmetry(const LinearMap& S, int n, int samples, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  CertificationResult res;
  res.samples = samples;
  for (int s = 0; s < samples; ++s) {
    Matrix x = gaussian_matrix(n, rng);
    Matrix y = gaussian_matrix(n, rng);
    x /= norm2(x);
    y /= norm2(y);
    double d = std::abs(inner_product(x, S(y)) - inner_product(S(x), y));
    res.defect = std::max(res.defect, d);
  }
  res.pass = res.defect <= 1e-10;
  return res;
}

CertificationResult certify_symmetry(const SuperOperator& S, int samples, std::uint64_t seed) {
  const BlockLayout& L = S.layout();
  return certify_symmetry([&](const Matrix& x) { return S.apply(L.project(x)); }, L.matrix_dim(),
                          samples, seed);
}

CertificationResult certify_symmetry(const ModelSpec& spec, int samples, std::uint64_t seed) {
  return certify_symmetry([&](const Matrix& x) { return spec.apply_S(x); }, spec.dim(), samples,
                          seed);
}

CertificationResult certify_positivity(const LinearMap& S, int n, int samples, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  CertificationResult res;
  res.samples = samples;
  res.pass = true;
  for (int s = 0; s < samples; ++s) {
    Matrix g = gaussian_matrix(n, rng);
    if (s % 2 == 1) g.rightCols(n - 1).setZero();  // rank-one samples probe the cone boundary
    Matrix x = g * g.adjoint();
    Matrix sx = S(x);
    Matrix h = (sx + sx.adjoint()) / 2.0;
    double lam = extreme_eigenvalue(h, true);
    double scale = operator_norm(h);
    if (lam < -1e-10 * scale) {
      res.pass = false;
      res.defect = std::max(res.defect, -lam);
    }
  }
  return res;
}

CertificationResult certify_positivity(const SuperOperator& S, int samples, std::uint64_t seed) {
  const BlockLayout& L = S.layout();
  return certify_positivity([&](const Matrix& x) { return S.apply(L.project(x)); }, L.matrix_dim(),
                            samples, seed);
}

CertificationResult certify_positivity(const ModelSpec& spec, int samples, std::uint64_t seed) {
  return certify_positivity([&](const Matrix& x) { return spec.apply_S(x); }, spec.dim(), samples,
                            seed);
}

FlatnessCertificate flatness_bounds(const ModelSpec& spec, int samples, std::uint64_t seed) {
  FlatnessCertificate cert;
  const SelfEnergy& se = spec.self_energy();
  if (const auto* f = std::get_if<FlatSelfEnergy>(&se)) {
    cert.c1 = cert.c2 = f->strength;
    cert.method = "exact";
    cert.worst_ratio = cert.c1;
    return cert;
  }
  if (const auto* t = std::get_if<TwoComponentSelfEnergy>(&se)) {
    const double w[2] = {t->delta, 1.0 - t->delta};
    cert.c1 = std::numeric_limits<double>::infinity();
    cert.c2 = 0.0;
    for (int k = 0; k < 2; ++k)
      for (int l = 0; l < 2; ++l) {
        cert.c1 = std::min(cert.c1, t->R(k, l) / w[l]);
        cert.c2 = std::max(cert.c2, t->R(k, l) / w[l]);
      }
    cert.method = "exact";
    cert.worst_ratio = cert.c1;
    return cert;
  }
  std::mt19937_64 rng(seed);
  if (const auto* k = std::get_if<KroneckerSelfEnergy>(&se)) {
    // With kappa = (1/N) sum_j x_j, the congruence sums with the kernel minima (maxima)
    // bound S[x] from below (above). lambda_min is concave in kappa, so the infimum over
    // {kappa >= 0, tr kappa = K} sits at a rank-one extreme point; likewise for lambda_max.
    std::vector<double> wmin, wmax, vmin, vmax;
    for (const auto& s : k->s) wmin.push_back(s.minCoeff()), wmax.push_back(s.maxCoeff());
    for (const auto& t : k->t) vmin.push_back(t.minCoeff()), vmax.push_back(t.maxCoeff());
    if (k->K == 1) {
      Matrix one = Matrix::Identity(1, 1);
      cert.c1 = kronecker_congruence(*k, one, wmin, vmin)(0, 0).real();
      cert.c2 = kronecker_congruence(*k, one, wmax, vmax)(0, 0).real();
      cert.method = "exact";
    } else {
      cert.c1 = k->K * optimize_rank_one(*k, wmin, vmin, true, samples, rng);
      cert.c2 = k->K * optimize_rank_one(*k, wmax, vmax, false, samples, rng);
      cert.method = "sampled";
      cert.samples = samples;
    }
    cert.c1 = std::max(cert.c1, 0.0);
    cert.worst_ratio = cert.c1;
    return cert;
  }
  // Dense: sampled ratios over the PSD cone.
  const int n = spec.dim();
  cert.c1 = std::numeric_limits<double>::infinity();
  cert.c2 = 0.0;
  for (int s = 0; s < samples; ++s) {
    Matrix g = gaussian_matrix(n, rng);
    if (s % 2 == 1) g.rightCols(n - 1).setZero();
    Matrix x = g * g.adjoint();
    double tr = normalized_trace(x).real();
    Matrix sx = spec.apply_S(x);
    cert.c1 = std::min(cert.c1, extreme_eigenvalue(sx, true) / tr);
    cert.c2 = std::max(cert.c2, extreme_eigenvalue(sx, false) / tr);
  }
  cert.worst_ratio = cert.c1;
  cert.c1 = std::max(cert.c1, 0.0);
  cert.method = "sampled";
  cert.samples = samples;
  return cert;
}

}  // namespace dyson
