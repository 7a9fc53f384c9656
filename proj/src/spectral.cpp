#include "dysonlab/spectral.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <random>

namespace dyson {

namespace {

Matrix positive_power(const BlockLayout& L, const Matrix& x, double p) {
  return L.apply_hermitian(x, [p](double t) {
    if (t <= 0) throw DomainError("polar decomposition: Im m is not positive definite");
    return std::pow(t, p);
  });
}

}  // namespace

PolarData polar_decompose(const Matrix& m, const BlockLayout& L, bool force_safe) {
  PolarData pd;
  pd.m = m;
  const int n = static_cast<int>(m.rows());
  const Matrix re = real_part(m);
  const Matrix im = imag_part(m);
  const double tr_im = normalized_trace(im).real();
  if (!(tr_im > 0.0)) throw DomainError("polar decomposition: <Im m> must be positive");
  pd.rho = tr_im / M_PI;
  const cplx I(0.0, 1.0);

  Matrix re_u;
  if (force_safe || tr_im < kBoundarySafeThreshold) {
    pd.boundary_safe = true;
    const Matrix fm = im / pd.rho;
    const Matrix fm_mh = positive_power(L, fm, -0.5);
    const Matrix x = hermitize(L.multiply(L.multiply(fm_mh, re), fm_mh));
    const double r2 = pd.rho * pd.rho;
    const Matrix x_abs_inv = L.apply_hermitian(x, [r2](double t) { return 1.0 / std::sqrt(t * t + r2); });
    pd.u = L.multiply(x + I * pd.rho * identity(n), x_abs_inv);
    pd.q = L.multiply(L.apply_hermitian(x, [r2](double t) { return std::pow(t * t + r2, 0.25); }),
                      positive_power(L, fm, 0.5));
    pd.w = (x + I * pd.rho * identity(n)) / pd.rho;
    pd.f_u = x_abs_inv;
    re_u = L.multiply(x, x_abs_inv);
  } else {
    const Matrix h_mh = positive_power(L, im, -0.5);
    const Matrix y = hermitize(L.multiply(L.multiply(h_mh, re), h_mh));
    pd.w = y + I * identity(n);
    const Matrix w_abs_inv = L.apply_hermitian(y, [](double t) { return 1.0 / std::sqrt(t * t + 1.0); });
    pd.u = L.multiply(pd.w, w_abs_inv);
    pd.q = L.multiply(L.apply_hermitian(y, [](double t) { return std::pow(t * t + 1.0, 0.25); }),
                      positive_power(L, im, 0.5));
    pd.f_u = w_abs_inv / pd.rho;
    re_u = L.multiply(y, w_abs_inv);
  }
  try {
    pd.s = L.apply_hermitian(re_u, [](double t) {
      if (std::abs(t) < kSignTolerance) throw DomainError("sign: eigenvalue too close to zero");
      return t > 0 ? 1.0 : -1.0;
    });
  } catch (const DomainError& e) {
    pd.sign_issue = e.what();
  }
  return pd;
}

PolarData polar_decompose(const Matrix& m) {
  return polar_decompose(m, BlockLayout::full(static_cast<int>(m.rows())));
}

FData saturated_F(const PolarData& polar, const ModelSpec& spec) {
  const BlockLayout& L = spec.layout();
  const Matrix qs = polar.q.adjoint();
  SuperOperator F = sandwich(polar.q, qs, L) * spec.S_operator() * sandwich(qs, polar.q, L);
  // F is self-adjoint for the trace inner product, i.e. Hermitian in vec coordinates.
  Eigen::MatrixXcd h = (F.matrix_form() + F.matrix_form().adjoint()) / 2.0;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h);
  if (es.info() != Eigen::Success) throw NumericalError("saturated_F: eigensolver failed");
  const Eigen::Index d = es.eigenvalues().size();
  FData out{F, es.eigenvalues()(d - 1), Matrix(), 0.0};
  Matrix f = L.unvec(es.eigenvectors().col(d - 1));
  const cplx tr = normalized_trace(f);
  if (std::abs(tr) > 0) f *= std::conj(tr) / std::abs(tr);
  f /= norm2(f);
  if (!is_psd(f, 1e-8)) throw NumericalError("saturated_F: Perron-Frobenius vector is not positive");
  out.f = (f + f.adjoint()) / 2.0;
  double rest = 0.0;
  if (d > 1) rest = std::max(std::abs(es.eigenvalues()(d - 2)), std::abs(es.eigenvalues()(0)));
  out.gap = out.norm2F > 0 ? 1.0 - rest / out.norm2F : 0.0;
  return out;
}

IsolatedEigen isolated_eigen(const SuperOperator& T) {
  IsolatedEigen out;
  out.all = superop_eigendata(T);
  const CVector& ev = out.all.values;
  const Eigen::Index d = ev.size();
  Eigen::Index k0 = 0;
  for (Eigen::Index k = 1; k < d; ++k)
    if (std::abs(ev(k)) < std::abs(ev(k0))) k0 = k;
  double second = INFINITY;
  for (Eigen::Index k = 0; k < d; ++k)
    if (k != k0) second = std::min(second, std::abs(ev(k)));
  out.index = static_cast<int>(k0);
  out.value = ev(k0);
  out.right = out.all.right.col(k0);
  out.left = out.all.left.col(k0);
  out.separation = second - std::abs(ev(k0));
  return out;
}

StabilityEigendata stability_eigendata(const Matrix& m, const ModelSpec& spec,
                                       const std::optional<PolarData>& polar) {
  const BlockLayout& L = spec.layout();
  const SuperOperator S = spec.S_operator();
  const SuperOperator id = SuperOperator::identity(L);
  SuperOperator B = id - sandwich(m, m, L) * S;
  IsolatedEigen iso = isolated_eigen(B);

  // Gauge: ||b||_2 = 1 and <l, b> = 1.
  CVector bv = iso.right;
  CVector lv = iso.left;
  const double n = L.matrix_dim();
  const double bnorm = bv.norm() / std::sqrt(n);
  bv /= bnorm;
  lv *= bnorm;
  // <l, b> = l^* b / n; the eigensolver gives l^* b = 1.
  lv *= n;
  const Eigen::MatrixXcd Pm = bv * lv.adjoint() / n;
  StabilityEigendata out{B, iso.value, L.unvec(bv), L.unvec(lv), SuperOperator(L, Pm),
                         id - SuperOperator(L, Pm), iso.separation,
                         iso.separation >= kIsolationGate, std::nullopt, std::nullopt};

  PolarData pd = polar ? *polar : polar_decompose(m, L);
  if (pd.s) {
    const Matrix& q = pd.q;
    const Matrix qs = q.adjoint();
    const Matrix qsq = L.multiply(L.multiply(qs, *pd.s), q);
    IsolatedEigen iso0 = isolated_eigen(id - sandwich(qsq, qsq, L) * S);
    const Eigen::MatrixXcd P0 = iso0.right * iso0.left.adjoint();
    const Matrix qinv = L.inverse(q);
    CVector b0 = P0 * L.vec(L.multiply(L.multiply(qs, pd.f_u), q));
    CVector l0 = P0.adjoint() * L.vec(L.multiply(L.multiply(qinv, pd.f_u), qinv.adjoint()));
    out.b_ref = L.unvec(Pm * b0);
    out.l_ref = L.unvec(Pm.adjoint() * l0);
  }
  return out;
}

PositivityCheck verify_Bstar_positivity(const Matrix& m, const SuperOperator& S, int samples,
                                        std::uint64_t seed) {
  const BlockLayout& L = S.layout();
  SuperOperator inv = (SuperOperator::identity(L) - sandwich(m.adjoint(), m, L) * S).inverse();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  const int n = L.matrix_dim();
  PositivityCheck out;
  out.samples = samples;
  out.pass = true;
  for (int k = 0; k < samples; ++k) {
    CVector y(n);
    for (int i = 0; i < n; ++i) y(i) = cplx(g(rng), g(rng));
    Matrix x = L.project(y * y.adjoint());
    Matrix r = inv.apply(x);
    if (!is_hermitian(r, 1e-8)) {
      out.pass = false;
      out.worst = -INFINITY;
      continue;
    }
    const double scale = std::max(1.0, operator_norm(r));
    const double e1 = L.min_eigenvalue(r) / scale;
    const double e2 = L.min_eigenvalue(r - x) / scale;
    out.worst = std::min({out.worst, e1, e2});
    if (e1 < -1e-10 || e2 < -1e-10) out.pass = false;
  }
  return out;
}

PositivityCheck verify_Bstar_positivity(const Matrix& m, const ModelSpec& spec, int samples,
                                        std::uint64_t seed) {
  return verify_Bstar_positivity(m, spec.S_operator(), samples, seed);
}

}  // namespace dyson
