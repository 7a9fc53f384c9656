#include "dysonlab/solver.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <sstream>
#include <thread>

namespace dyson {

namespace {

double min_imag_eigenvalue(const ModelSpec& spec, const Matrix& m) {
  return spec.layout().min_eigenvalue(imag_part(m));
}

struct Eval {
  Matrix g;       // -(z - a + S[m])^{-1}
  double res = 0;
};

Eval evaluate(const ModelSpec& spec, cplx z, const Matrix& m) {
  const int n = spec.dim();
  Matrix x = z * identity(n) - spec.bare() + spec.apply_S(m);
  Eval e;
  e.res = (spec.layout().multiply(m, x) + identity(n)).norm();
  e.g = -spec.layout().inverse(x);
  return e;
}

std::string describe(cplx z) {
  std::ostringstream os;
  os.precision(17);
  os << "z = " << z.real() << (z.imag() < 0 ? " - " : " + ") << std::abs(z.imag()) << "i";
  return os.str();
}

// One Newton step with backtracking. Returns false if no step length reduced the residual.
bool newton_step(const ModelSpec& spec, cplx z, Matrix& m, Eval& cur, bool keep_positive) {
  Matrix delta;
  try {
    delta = solve_stability(spec, cur.g, cur.g - m);
  } catch (const NumericalError&) {
    return false;
  }
  if (!delta.allFinite()) return false;
  for (double t = 1.0; t >= 1.0 / 256; t *= 0.5) {
    Matrix trial = m + t * delta;
    if (keep_positive && !(min_imag_eigenvalue(spec, trial) > 0.0)) continue;
    Eval e;
    try {
      e = evaluate(spec, z, trial);
    } catch (const NumericalError&) {
      continue;
    }
    if (std::isfinite(e.res) && e.res < (1.0 - 1e-4 * t) * cur.res) {
      m = std::move(trial);
      cur = std::move(e);
      return true;
    }
  }
  return false;
}

// Newton steps after convergence, kept while they keep reducing the residual.
void polish(const ModelSpec& spec, cplx z, Matrix& m, Eval& cur, bool keep_positive, int& steps) {
  for (int k = 0; k < 4; ++k) {
    double before = cur.res;
    if (!newton_step(spec, z, m, cur, keep_positive)) break;
    ++steps;
    if (cur.res > 0.5 * before) break;
  }
}

void richardson(BoundaryValue& bv) {
  const std::size_t r = bv.rungs.size();
  const Matrix& v1 = bv.rungs[r - 1];
  const Matrix& v2 = bv.rungs[r - 2];
  const Matrix& v3 = bv.rungs[r - 3];
  const double d21 = norm2(v2 - v1);
  const double d32 = norm2(v3 - v2);
  double p = 1.0;
  if (d21 > 0.0 && d32 > 0.0) p = std::log2(d32 / d21);
  bv.raw_exponent = p;
  bv.exponent = std::clamp(std::isfinite(p) ? p : 1.0, 1.0 / 3.0, 1.0);
  bv.m0 = v1 - (v2 - v1) / (std::pow(2.0, bv.exponent) - 1.0);
  bv.extrapolation_error = norm2(bv.m0 - v1);
  bv.flagged = bv.raw_exponent < 0.75 && d21 > 1e-8;
}

void push_rung(BoundaryValue& bv, double eta, Solution sol, const ModelSpec& spec) {
  bv.etas.push_back(eta);
  bv.im_norms.push_back(spec.layout().max_eigenvalue(imag_part(sol.m)));
  bv.rungs.push_back(sol.m);
  if (bv.rungs.size() > 3) bv.rungs.erase(bv.rungs.begin());
  bv.finest = std::move(sol);
  bv.eta_eff = eta;
}

BoundaryValue run_ladder(const ModelSpec& spec, double tau, const SolveOptions& opts,
                         const std::optional<Matrix>& warm, int top_power) {
  BoundaryValue bv;
  bv.tau = tau;
  std::optional<Matrix> start = warm;
  for (int k = top_power; k >= 0; --k) {
    const double eta = std::ldexp(opts.eta_floor, k);
    Solution sol = solve_at(spec, cplx(tau, eta), opts, start);
    start = sol.m;
    push_rung(bv, eta, std::move(sol), spec);
  }
  richardson(bv);
  return bv;
}

}  // namespace

void SolveOptions::validate() const {
  if (!(tol > 0)) throw DomainError("solver: tol must be positive");
  if (!(damping > 0 && damping <= 1)) throw DomainError("solver: damping must lie in (0, 1]");
  if (max_iter <= 0) throw DomainError("solver: max_iter must be positive");
  if (!(eta_floor > 0) || !(eta_start >= eta_floor))
    throw DomainError("solver: need 0 < eta_floor <= eta_start");
  if (short_ladder < 3) throw DomainError("solver: the short ladder needs at least 3 rungs");
}

double dyson_residual(const ModelSpec& spec, cplx z, const Matrix& m) {
  const int n = spec.dim();
  Matrix x = z * identity(n) - spec.bare() + spec.apply_S(m);
  return (m * x + identity(n)).norm();
}

Matrix solve_stability(const ModelSpec& spec, const Matrix& g, const Matrix& rhs) {
  const BlockLayout& L = spec.layout();
  if (const auto& lr = spec.low_rank()) {
    // Woodbury: x = rhs + sum_k W_k (shat c)_k with W_k = g U_k g.
    const int r = static_cast<int>(lr->U.size());
    std::vector<Matrix> W(r);
    for (int k = 0; k < r; ++k) W[k] = L.multiply(L.multiply(g, L.project(lr->U[k])), g);
    Eigen::MatrixXcd G(r, r);
    CVector b(r);
    for (int j = 0; j < r; ++j) {
      b(j) = inner_product(lr->V[j], rhs);
      for (int k = 0; k < r; ++k) G(j, k) = inner_product(lr->V[j], W[k]);
    }
    Eigen::MatrixXcd A = Eigen::MatrixXcd::Identity(r, r) - G * lr->shat;
    Eigen::FullPivLU<Eigen::MatrixXcd> lu(A);
    if (!lu.isInvertible()) throw NumericalError("stability operator is singular");
    CVector c = lr->shat * lu.solve(b);
    Matrix x = rhs;
    for (int k = 0; k < r; ++k) x += c(k) * W[k];
    return x;
  }
  SuperOperator S = spec.S_operator();
  Eigen::MatrixXcd B = Eigen::MatrixXcd::Identity(L.vector_dim(), L.vector_dim()) -
                       sandwich(g, g, L).matrix_form() * S.matrix_form();
  Eigen::PartialPivLU<Eigen::MatrixXcd> lu(B);
  CVector x = lu.solve(L.vec(rhs));
  if (!x.allFinite()) throw NumericalError("stability operator is singular");
  return L.unvec(x);
}

Solution solve_at(const ModelSpec& spec, cplx z, const SolveOptions& opts,
                  const std::optional<Matrix>& warm_start) {
  opts.validate();
  if (!(z.imag() > 0)) throw DomainError("solve_at needs Im z > 0, got " + describe(z));
  if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) throw DomainError("solve_at: z must be finite");
  const int n = spec.dim();
  Matrix m;
  if (warm_start) {
    if (warm_start->rows() != n || warm_start->cols() != n)
      throw DimensionError("solve_at: warm start has the wrong size");
    m = spec.layout().project(*warm_start);
    if (!(min_imag_eigenvalue(spec, m) > 0.0)) {
      // A real-axis warm start is lifted into the upper half-plane.
      m += cplx(0.0, z.imag()) * identity(n);
      if (!(min_imag_eigenvalue(spec, m) > 0.0)) m = cplx(0.0, 1.0 / (1.0 + std::abs(z))) * identity(n);
    }
  } else {
    m = cplx(0.0, 1.0 / (1.0 + std::abs(z))) * identity(n);
  }

  Solution sol;
  sol.z = z;
  Eval cur = evaluate(spec, z, m);
  double gamma = opts.damping;
  int slow = 0;
  bool use_newton = false;
  int newton_failures = 0;

  for (int it = 0; it < opts.max_iter; ++it) {
    sol.iterations = it + 1;
    if (cur.res <= opts.tol) {
      if (opts.newton) polish(spec, z, m, cur, true, sol.newton_steps);
      sol.converged = true;
      break;
    }
    if (opts.newton && (cur.res < opts.newton_switch || use_newton) && newton_failures < 8) {
      if (newton_step(spec, z, m, cur, true)) {
        ++sol.newton_steps;
        continue;
      }
      ++newton_failures;
      use_newton = false;
      slow = 0;
    }
    Matrix next = (1.0 - gamma) * m + gamma * cur.g;
    if (!(min_imag_eigenvalue(spec, next) > 0.0)) {
      gamma *= 0.5;
      if (gamma < 1e-8)
        throw NumericalError("solve_at: lost positivity of Im m at " + describe(z));
      continue;
    }
    double prev = cur.res;
    m = std::move(next);
    cur = evaluate(spec, z, m);
    if (!std::isfinite(cur.res)) throw NumericalError("solve_at: non-finite iterate at " + describe(z));
    slow = cur.res > 0.99 * prev ? slow + 1 : 0;
    if (slow >= 25) use_newton = true;
  }
  if (!sol.converged) {
    std::ostringstream os;
    os << "solve_at: no convergence after " << opts.max_iter << " iterations at " << describe(z)
       << " (residual " << cur.res << ")";
    throw NumericalError(os.str());
  }
  if (!(min_imag_eigenvalue(spec, m) > 0.0))
    throw NumericalError("solve_at: Im m is not positive definite at " + describe(z));
  sol.m = std::move(m);
  sol.residual = cur.res;
  return sol;
}

Solution solve_real_axis(const ModelSpec& spec, double tau, const Matrix& m_init,
                         const SolveOptions& opts) {
  const cplx z(tau, 0.0);
  Matrix m = spec.layout().project(real_part(m_init));
  Solution sol;
  sol.z = z;
  Eval cur = evaluate(spec, z, m);
  for (int it = 0; it < 100 && cur.res > opts.tol; ++it) {
    sol.iterations = it + 1;
    if (!newton_step(spec, z, m, cur, false)) break;
    ++sol.newton_steps;
  }
  polish(spec, z, m, cur, false, sol.newton_steps);
  sol.converged = cur.res <= opts.tol;
  if (!sol.converged) {
    std::ostringstream os;
    os << "real-axis Newton did not converge at tau = " << tau << " (residual " << cur.res << ")";
    throw NumericalError(os.str());
  }
  sol.m = std::move(m);
  sol.residual = cur.res;
  return sol;
}

double BoundaryValue::rho() const {
  double r = normalized_trace(imag_part(m0)).real() / M_PI;
  return r > 0.0 ? r : 0.0;
}

BoundaryValue boundary_value(const ModelSpec& spec, double tau, const SolveOptions& opts,
                             const std::optional<Matrix>& warm_start) {
  opts.validate();
  if (!std::isfinite(tau)) throw DomainError("boundary_value: tau must be finite");
  if (warm_start) {
    try {
      return run_ladder(spec, tau, opts, warm_start, opts.short_ladder - 1);
    } catch (const NumericalError&) {
      // fall through to a cold ladder
    }
  }
  int top = std::max(2, static_cast<int>(std::ceil(std::log2(opts.eta_start / opts.eta_floor))));
  return run_ladder(spec, tau, opts, std::nullopt, top);
}

BoundaryValue extend_ladder(const ModelSpec& spec, const BoundaryValue& bv, int halvings,
                            const SolveOptions& opts) {
  BoundaryValue out = bv;
  Matrix start = bv.finest.m;
  double eta = bv.eta_eff;
  for (int k = 0; k < halvings; ++k) {
    eta *= 0.5;
    Solution sol = solve_at(spec, cplx(bv.tau, eta), opts, start);
    start = sol.m;
    push_rung(out, eta, std::move(sol), spec);
  }
  richardson(out);
  return out;
}

int default_jobs() {
  unsigned hc = std::thread::hardware_concurrency();
  return hc == 0 ? 1 : static_cast<int>(hc);
}

void parallel_for(int count, int jobs, const std::function<void(int)>& fn) {
  if (count <= 0) return;
  jobs = std::max(1, std::min(jobs, count));
  if (jobs == 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::mutex mu;
  auto worker = [&]() {
    for (int i = next++; i < count; i = next++) {
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(mu);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (int t = 0; t < jobs; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
}

std::vector<GridPoint> solve_grid(const ModelSpec& spec, const std::vector<double>& taus, double eta,
                                  const SolveOptions& opts, int jobs) {
  if (!std::is_sorted(taus.begin(), taus.end())) throw DomainError("solve_grid: taus must be sorted");
  std::vector<GridPoint> out(taus.size());
  const int count = static_cast<int>(taus.size());
  const int chunks = (count + kChunkSize - 1) / kChunkSize;
  parallel_for(chunks, jobs, [&](int c) {
    std::optional<Matrix> warm;
    for (int i = c * kChunkSize; i < std::min(count, (c + 1) * kChunkSize); ++i) {
      try {
        Solution sol = solve_at(spec, cplx(taus[i], eta), opts, warm);
        warm = sol.m;
        out[i].solution = std::move(sol);
      } catch (const Error& e) {
        out[i].error = e.what();
        warm.reset();
      }
    }
  });
  return out;
}

StabilityCheck stability_residual_check(const ModelSpec& spec, cplx z, double h,
                                        const SolveOptions& opts) {
  if (!(h > 0)) throw DomainError("stability_residual_check: h must be positive");
  Solution s0 = solve_at(spec, z, opts);
  Solution sp = solve_at(spec, z + h, opts, s0.m);
  Solution sm = solve_at(spec, z - h, opts, s0.m);
  const Matrix& m = s0.m;
  Matrix dm = (sp.m - sm.m) / (2.0 * h);
  Matrix bdm = dm - m * spec.apply_S(dm) * m;
  StabilityCheck out;
  out.defect = norm2(bdm - m * m);
  const BlockLayout& L = spec.layout();
  Eigen::MatrixXcd B = Eigen::MatrixXcd::Identity(L.vector_dim(), L.vector_dim()) -
                       sandwich(m, m, L).matrix_form() * spec.S_operator().matrix_form();
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(B);
  const auto& sv = svd.singularValues();
  out.condition = sv(sv.size() - 1) > 0 ? sv(0) / sv(sv.size() - 1) : INFINITY;
  out.flagged = out.condition > 1e6;
  return out;
}

}  // namespace dyson
