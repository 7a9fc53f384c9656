#include "dysonlab/density.hpp"

#include <boost/math/tools/minima.hpp>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace dyson {

namespace {

constexpr int kExtraHalvings = 4;

bool decide_inside(const SupportDecision& d, double rho) {
  if (d.kind == SupportKind::Inside) return true;
  if (d.kind == SupportKind::Outside) return false;
  return rho > 1e-8;
}

}  // namespace

const char* to_string(SupportKind k) {
  switch (k) {
    case SupportKind::Inside: return "inside";
    case SupportKind::Outside: return "outside";
    default: return "inconclusive";
  }
}

double density_at(const ModelSpec& spec, double tau, const SolveOptions& opts) {
  return boundary_value(spec, tau, opts).rho();
}

SupportDecision decide_support(const BoundaryValue& bv) {
  const std::size_t k = bv.etas.size();
  if (k < 2) throw DomainError("decide_support: ladder needs at least two rungs");
  SupportDecision d;
  d.eta = bv.etas[k - 1];
  const double im1 = bv.im_norms[k - 1], im2 = bv.im_norms[k - 2];
  if (!(im1 > 0.0) || !(im2 > 0.0)) {
    d.kind = SupportKind::Outside;
    d.limit = INFINITY;
    d.margin = INFINITY;
    return d;
  }
  const double r1 = bv.etas[k - 1] / im1;
  const double r2 = bv.etas[k - 2] / im2;
  d.limit = 2.0 * r1 - r2;
  d.order = std::log2(r2 / r1);
  d.margin = d.limit / d.eta;
  if (d.limit < 0.1 * d.eta)
    d.kind = SupportKind::Inside;
  else if (d.limit > 10.0 * d.eta && d.order < 0.5)
    d.kind = SupportKind::Outside;
  else
    d.kind = SupportKind::Inconclusive;
  return d;
}

SupportDecision classify_point(const ModelSpec& spec, BoundaryValue& bv, const SolveOptions& opts) {
  SupportDecision d = decide_support(bv);
  if (d.kind != SupportKind::Inconclusive) return d;
  bv = extend_ladder(spec, bv, kExtraHalvings, opts);
  return decide_support(bv);
}

SupportDecision classify_point(const ModelSpec& spec, double tau, const SolveOptions& opts) {
  BoundaryValue bv = boundary_value(spec, tau, opts);
  return classify_point(spec, bv, opts);
}

int DensityProfile::failures() const {
  return static_cast<int>(std::count_if(errors.begin(), errors.end(),
                                        [](const std::string& e) { return !e.empty(); }));
}

DensityProfile scan(const ModelSpec& spec, double lo, double hi, int points,
                    const SolveOptions& opts, int jobs) {
  if (points < 2) throw DomainError("scan: need at least two points");
  if (!(hi > lo) || !std::isfinite(lo) || !std::isfinite(hi))
    throw DomainError("scan: empty or invalid window");
  DensityProfile p;
  p.taus.resize(points);
  for (int i = 0; i < points; ++i) p.taus[i] = lo + (hi - lo) * i / (points - 1);
  p.rho.assign(points, 0.0);
  p.eta_used.assign(points, 0.0);
  p.inside.assign(points, false);
  p.inconclusive.assign(points, false);
  p.errors.assign(points, "");

  const int chunks = (points + kChunkSize - 1) / kChunkSize;
  parallel_for(chunks, jobs, [&](int c) {
    std::optional<Matrix> warm;
    for (int i = c * kChunkSize; i < std::min(points, (c + 1) * kChunkSize); ++i) {
      try {
        BoundaryValue bv = boundary_value(spec, p.taus[i], opts, warm);
        SupportDecision d = classify_point(spec, bv, opts);
        p.rho[i] = bv.rho();
        p.eta_used[i] = bv.eta_eff;
        p.inconclusive[i] = d.kind == SupportKind::Inconclusive;
        p.inside[i] = decide_inside(d, p.rho[i]);
        warm = bv.finest.m;
      } catch (const Error& e) {
        p.errors[i] = e.what();
        warm.reset();
      }
    }
  });
  return p;
}

BandStructure band_structure(const ModelSpec& spec, const DensityProfile& profile,
                             const SolveOptions& opts, double edge_tol) {
  BandStructure bs;
  const auto& t = profile.taus;
  const int n = static_cast<int>(t.size());
  if (n < 3) throw DomainError("band_structure: profile too short");

  auto inside_at = [&](double tau) {
    BoundaryValue bv = boundary_value(spec, tau, opts);
    SupportDecision d = classify_point(spec, bv, opts);
    return std::make_pair(d.kind, bv.rho());
  };
  // Bisects between an inside point `in` and an outside point `out`.
  auto refine_edge = [&](double in, double out) {
    for (int it = 0; it < 60 && std::abs(out - in) > edge_tol; ++it) {
      double mid = 0.5 * (in + out);
      auto [kind, rho] = inside_at(mid);
      if (kind == SupportKind::Inconclusive) return mid;
      if (kind == SupportKind::Inside)
        in = mid;
      else
        out = mid;
    }
    return 0.5 * (in + out);
  };

  int i = 0;
  while (i < n) {
    if (!profile.inside[i] || !profile.errors[i].empty()) {
      ++i;
      continue;
    }
    int j = i;
    while (j + 1 < n && profile.inside[j + 1] && profile.errors[j + 1].empty()) ++j;
    double left, right;
    if (i == 0) {
      left = t[0];
      bs.warnings.push_back("band touches the left end of the window; edge unresolved");
    } else {
      left = refine_edge(t[i], t[i - 1]);
    }
    if (j == n - 1) {
      right = t[n - 1];
      bs.warnings.push_back("band touches the right end of the window; edge unresolved");
    } else {
      right = refine_edge(t[j], t[j + 1]);
    }
    bs.bands.emplace_back(left, right);

    for (int k = i + 1; k < j; ++k) {
      const double r0 = profile.rho[k - 1], r1 = profile.rho[k], r2 = profile.rho[k + 1];
      if (!(r1 < r0 && r1 <= r2)) continue;
      double tau = t[k];
      double rho = r1;
      try {
        auto f = [&](double x) { return density_at(spec, x, opts); };
        auto [tmin, fmin] = boost::math::tools::brent_find_minima(f, t[k - 1], t[k + 1], 30);
        if (fmin <= r1) tau = tmin, rho = fmin;
      } catch (const Error&) {
        // keep the grid point
      }
      bs.minima.push_back({tau, rho});
    }
    i = j + 1;
  }
  for (std::size_t b = 1; b < bs.bands.size(); ++b)
    bs.gaps.emplace_back(bs.bands[b - 1].second, bs.bands[b].first);
  if (profile.failures() > 0) {
    std::ostringstream os;
    os << profile.failures() << " grid points failed to solve";
    bs.warnings.push_back(os.str());
  }
  return bs;
}

double partial_mass(const DensityProfile& profile, double lo, double hi) {
  const auto& t = profile.taus;
  const auto& r = profile.rho;
  double mass = 0.0;
  for (std::size_t i = 1; i < t.size(); ++i) {
    double a = std::max(t[i - 1], lo), b = std::min(t[i], hi);
    if (b <= a) continue;
    const double h = t[i] - t[i - 1];
    auto interp = [&](double x) { return r[i - 1] + (r[i] - r[i - 1]) * (x - t[i - 1]) / h; };
    mass += 0.5 * (b - a) * (interp(a) + interp(b));
  }
  return mass;
}

double total_mass(const ModelSpec& spec, const DensityProfile& profile) {
  if (profile.taus.size() < 2) throw DomainError("total_mass: profile too short");
  auto [lo, hi] = spec.support_hull();
  if (profile.taus.front() > lo || profile.taus.back() < hi) {
    std::ostringstream os;
    os << "total_mass: window [" << profile.taus.front() << ", " << profile.taus.back()
       << "] does not cover the support bound [" << lo << ", " << hi << "]";
    throw DomainError(os.str());
  }
  return partial_mass(profile, profile.taus.front(), profile.taus.back());
}

}  // namespace dyson
