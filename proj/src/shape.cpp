#include "dysonlab/shape.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace dyson {

namespace {

const double kSqrt3 = std::sqrt(3.0);

cplx cbrt_principal(cplx z) {
  if (z == cplx(0.0, 0.0)) return z;
  return std::pow(z, 1.0 / 3.0);
}

double phi_real(double zeta) {
  // (sqrt(1 + zeta^2) + zeta)^{1/3}, written without cancellation for zeta < 0.
  const double r = std::hypot(1.0, zeta);
  return zeta >= 0 ? std::cbrt(r + zeta) : 1.0 / std::cbrt(r - zeta);
}

struct Isolated {
  Eigen::MatrixXcd resolvent_q;  // T^{-1} Q in vec coordinates
  double separation = 0.0;
};

Isolated complement_resolvent(const SuperOperator& T) {
  IsolatedEigen iso = isolated_eigen(T);
  const Eigen::Index d = iso.all.values.size();
  Eigen::MatrixXcd R = Eigen::MatrixXcd::Zero(d, d);
  for (Eigen::Index k = 0; k < d; ++k) {
    if (k == iso.index) continue;
    R += iso.all.right.col(k) * iso.all.left.col(k).adjoint() / iso.all.values(k);
  }
  return {R, iso.separation};
}

}  // namespace

ShapeParams shape_params(const ModelSpec& spec, double tau0, const SolveOptions& opts) {
  const BlockLayout& L = spec.layout();
  BoundaryValue bv = boundary_value(spec, tau0, opts);
  PolarData pd = polar_decompose(bv.finest.m, L);
  if (!pd.s) throw DomainError("shape_params: " + pd.sign_issue);
  const Matrix& s = *pd.s;
  FData fd = saturated_F(pd, spec);

  const SuperOperator T = SuperOperator::identity(L) - sandwich(s, s, L) * fd.F;
  Isolated iso = complement_resolvent(T);
  if (iso.separation < kIsolationGate) {
    std::ostringstream os;
    os << "shape_params: small eigenvalue of Id - C_s F not isolated (separation "
       << iso.separation << ") at tau = " << tau0;
    throw NumericalError(os.str());
  }

  ShapeParams p;
  const Matrix fu2 = L.multiply(pd.f_u, pd.f_u);
  const cplx sig = normalized_trace(L.multiply(s, L.multiply(fu2, pd.f_u)));
  p.sigma = sig.real();
  p.sigma_imag = sig.imag();

  const CVector x = L.vec(L.multiply(s, fu2));
  const CVector y = iso.resolvent_q * x;
  const CVector z = y + fd.F.matrix_form() * y;
  const cplx ps = x.dot(z) / static_cast<double>(L.matrix_dim());
  p.psi = ps.real();
  p.psi_imag = ps.imag();
  p.gamma_big = p.psi > 0 ? std::sqrt(27.0) * M_PI / (2.0 * p.psi) : INFINITY;
  p.rho0 = bv.rho();
  p.fu2 = normalized_trace(fu2).real();
  p.separation = iso.separation;
  return p;
}

double psi_edge(double lambda) {
  if (lambda < 0) throw DomainError("psi_edge: lambda must be non-negative");
  const double root = std::sqrt((1.0 + lambda) * lambda);
  // 1 + 2 lambda -+ 2 root are (sqrt(1 + lambda) -+ sqrt(lambda))^2 and reciprocal.
  const double a = std::pow(std::sqrt(1.0 + lambda) + std::sqrt(lambda), 4.0 / 3.0);
  return root / (a + 1.0 / a + 1.0);
}

double psi_min(double lambda) {
  const double l = std::abs(lambda);
  const double r = std::hypot(1.0, l);
  const double a = std::cbrt((r + l) * (r + l));
  const double denom = a + 1.0 / a - 1.0;
  return (r - denom) / denom;
}

CardanoRoots cardano_roots(cplx zeta) {
  const cplx I(0.0, 1.0);
  cplx pp, pm;
  if (zeta.real() >= 1.0) {
    const cplx r = std::sqrt(zeta * zeta - 1.0);
    pp = cbrt_principal(zeta + r);
    pm = cbrt_principal(zeta - r);
  } else if (zeta.real() > -1.0) {
    const cplx r = std::sqrt(1.0 - zeta * zeta);
    pp = cbrt_principal(zeta + I * r);
    pm = cbrt_principal(zeta - I * r);
  } else {
    const cplx r = std::sqrt(zeta * zeta - 1.0);
    pp = -cbrt_principal(-zeta - r);
    pm = -cbrt_principal(-zeta + r);
  }
  const cplx half_sum = 0.5 * (pp + pm);
  const cplx rot = I * (kSqrt3 / 2.0) * (pp - pm);
  return {half_sum + rot, half_sum - rot, -(pp + pm)};
}

cplx omega_hat_min(double lambda) {
  const double a = phi_real(lambda), b = phi_real(-lambda);
  return cplx(0.5 * (a - b), kSqrt3 * 0.5 * (a + b));
}

const char* to_string(SingularityKind k) {
  switch (k) {
    case SingularityKind::LeftEdge: return "left_edge";
    case SingularityKind::RightEdge: return "right_edge";
    case SingularityKind::Cusp: return "cusp";
    case SingularityKind::InternalMin: return "internal_min";
    default: return "ambiguous";
  }
}

LocalFit fit_local_exponent(const ModelSpec& spec, double tau0, Side side, double w_lo,
                            double w_hi, int points, double baseline, const SolveOptions& opts) {
  if (!(w_lo > 0) || !(w_hi > w_lo) || points < 2) throw DomainError("fit_local_exponent: bad window");
  std::vector<double> lx, ly;
  const double sgn = side == Side::Right ? 1.0 : -1.0;
  std::optional<Matrix> warm;
  for (int k = 0; k < points; ++k) {
    const double w = w_lo * std::pow(w_hi / w_lo, double(k) / (points - 1));
    BoundaryValue bv = boundary_value(spec, tau0 + sgn * w, opts, warm);
    warm = bv.finest.m;
    const double v = bv.rho() - baseline;
    if (v > 1e-12) {
      lx.push_back(std::log(w));
      ly.push_back(std::log(v));
    }
  }
  if (lx.size() < 8) throw DomainError("fit_local_exponent: fewer than 8 usable points");
  Eigen::MatrixXd A(lx.size(), 2);
  Eigen::VectorXd b(lx.size());
  for (std::size_t i = 0; i < lx.size(); ++i) A(i, 0) = lx[i], A(i, 1) = 1.0, b(i) = ly[i];
  Eigen::Vector2d c = A.colPivHouseholderQr().solve(b);
  const double mean = b.mean();
  const double ss_tot = (b.array() - mean).square().sum();
  const double ss_res = (A * c - b).squaredNorm();
  return {c(0), std::exp(c(1)), ss_tot > 0 ? 1.0 - ss_res / ss_tot : 1.0,
          static_cast<int>(lx.size())};
}

LocalFit fit_local_exponent(const DensityProfile& profile, double tau0, Side side, double w_lo,
                            double w_hi, double baseline, double rho_floor) {
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < profile.taus.size(); ++i) {
    const double w = side == Side::Right ? profile.taus[i] - tau0 : tau0 - profile.taus[i];
    if (w < w_lo || w > w_hi) continue;
    const double v = profile.rho[i] - baseline;
    if (v <= rho_floor) continue;
    lx.push_back(std::log(w));
    ly.push_back(std::log(v));
  }
  if (lx.size() < 8) throw DomainError("fit_local_exponent: fewer than 8 usable points");
  Eigen::MatrixXd A(lx.size(), 2);
  Eigen::VectorXd b(lx.size());
  for (std::size_t i = 0; i < lx.size(); ++i) A(i, 0) = lx[i], A(i, 1) = 1.0, b(i) = ly[i];
  Eigen::Vector2d c = A.colPivHouseholderQr().solve(b);
  const double ss_tot = (b.array() - b.mean()).square().sum();
  const double ss_res = (A * c - b).squaredNorm();
  return {c(0), std::exp(c(1)), ss_tot > 0 ? 1.0 - ss_res / ss_tot : 1.0,
          static_cast<int>(lx.size())};
}

SingularityReport classify(const ModelSpec& spec, const BandStructure& structure, double tau0,
                           const SolveOptions& opts, const ClassifyOptions& copts) {
  SingularityReport r;
  r.tau0 = tau0;
  r.sigma_star = copts.sigma_star;
  r.params = shape_params(spec, tau0, opts);
  r.rho0 = r.params.rho0;
  const double sigma = r.params.sigma;

  const auto& bands = structure.bands;
  for (std::size_t b = 0; b < bands.size(); ++b) {
    const bool left = std::abs(tau0 - bands[b].first) <= copts.edge_match;
    const bool right = std::abs(tau0 - bands[b].second) <= copts.edge_match;
    if (!left && !right) continue;
    r.kind = left ? SingularityKind::LeftEdge : SingularityKind::RightEdge;
    if (left)
      r.delta_gap = b > 0 ? bands[b].first - bands[b - 1].second : 1.0;
    else
      r.delta_gap = b + 1 < bands.size() ? bands[b + 1].first - bands[b].second : 1.0;
    // The density vanishes on the side of -sigma: sigma > 0 at left edges, < 0 at right edges.
    const bool consistent = left ? sigma > 0 : sigma < 0;
    if (r.rho0 > copts.rho_tol) r.note = "edge with density above tolerance";
    if (!consistent) r.note += (r.note.empty() ? "" : "; ") + std::string("sign of sigma inconsistent with edge side");
    const Side support_side = left ? Side::Right : Side::Left;
    r.fit = fit_local_exponent(spec, tau0, support_side, 1e-4, 1e-2, 12, 0.0, opts);
    (left ? r.fit_right : r.fit_left) = r.fit;
    return r;
  }

  const double gamma3 = std::cbrt(r.params.gamma_big);
  if (r.rho0 <= copts.rho_tol) {
    if (std::abs(sigma) <= copts.sigma_band) {
      r.kind = SingularityKind::Cusp;
    } else {
      r.kind = SingularityKind::Ambiguous;
      r.candidates = {SingularityKind::Cusp, SingularityKind::LeftEdge, SingularityKind::RightEdge};
      r.note = "zero of the density with |sigma| above the cusp band; unresolved gap?";
    }
  } else if (r.rho0 <= 10.0 * copts.rho_tol && std::abs(sigma) <= copts.sigma_band) {
    r.kind = SingularityKind::Ambiguous;
    r.candidates = {SingularityKind::Cusp, SingularityKind::InternalMin};
    r.note = "density and sigma both near the cusp gates";
  } else {
    r.kind = SingularityKind::InternalMin;
  }
  if (std::isfinite(gamma3) && gamma3 > 0) r.rho_tilde = r.rho0 / gamma3;

  const double base = r.kind == SingularityKind::Cusp ? 0.0 : r.rho0;
  for (Side side : {Side::Left, Side::Right}) {
    try {
      LocalFit f = fit_local_exponent(spec, tau0, side, 1e-5, 1e-3, 12, base, opts);
      (side == Side::Left ? r.fit_left : r.fit_right) = f;
    } catch (const DomainError& e) {
      r.note += (r.note.empty() ? "" : "; ") + std::string(e.what());
    }
  }
  r.fit.exponent = 0.5 * (r.fit_left.exponent + r.fit_right.exponent);
  r.fit.coefficient = 0.5 * (r.fit_left.coefficient + r.fit_right.coefficient);
  r.fit.r2 = std::min(r.fit_left.r2, r.fit_right.r2);
  r.fit.points = r.fit_left.points + r.fit_right.points;
  return r;
}

double predict_density(const SingularityReport& r, double omega) {
  const double w = std::abs(omega);
  const double G = r.params.gamma_big;
  switch (r.kind) {
    case SingularityKind::LeftEdge:
    case SingularityKind::RightEdge: {
      const bool left = r.kind == SingularityKind::LeftEdge;
      if ((left && omega < 0) || (!left && omega > 0)) return 0.0;
      if (std::abs(r.params.sigma) >= r.sigma_star)
        return std::sqrt(M_PI / std::abs(r.params.sigma)) * std::sqrt(w);
      return std::cbrt(4.0 * G) * std::cbrt(r.delta_gap) * psi_edge(w / r.delta_gap);
    }
    case SingularityKind::Cusp:
      return std::cbrt(G / 4.0) * std::cbrt(w);
    case SingularityKind::InternalMin: {
      const double rt = r.rho_tilde;
      return r.rho0 + std::cbrt(G) * rt * psi_min(omega / (rt * rt * rt));
    }
    default:
      throw DomainError("predict_density: ambiguous classification");
  }
}

CubicResidual cubic_residual(const ModelSpec& spec, double tau0, double omega,
                             const SolveOptions& opts) {
  const BlockLayout& L = spec.layout();
  BoundaryValue bv0 = boundary_value(spec, tau0, opts);
  PolarData pd = polar_decompose(bv0.finest.m, L);
  StabilityEigendata ed = stability_eigendata(bv0.finest.m, spec, pd);
  if (!ed.b_ref || !ed.l_ref) throw DomainError("cubic_residual: eigentriple unavailable");
  if (!ed.isolated) throw NumericalError("cubic_residual: eigenvalue of B not isolated");
  ShapeParams p = shape_params(spec, tau0, opts);

  CubicResidual out;
  if (omega == 0.0) return out;
  BoundaryValue bv1 = boundary_value(spec, tau0 + omega, opts, bv0.finest.m);
  const Matrix dm = bv1.m0 - bv0.m0;
  const cplx theta = inner_product(*ed.l_ref, dm) / inner_product(*ed.l_ref, *ed.b_ref);
  const double rho = p.rho0;
  const cplx I(0.0, 1.0);
  const double s2 = p.sigma * p.sigma / p.fu2;
  const cplx mu3 = p.psi;
  const cplx mu2 = p.sigma + I * rho * (3.0 * p.psi + s2);
  const cplx mu1 = 2.0 * I * rho * p.sigma - 2.0 * rho * rho * (p.psi + s2);
  const cplx value = ((mu3 * theta + mu2) * theta + mu1) * theta + M_PI * omega;
  out.residual = std::abs(value);
  out.theta = std::abs(theta);
  out.theta_value = theta;
  return out;
}

}  // namespace dyson
