#include "dysonlab/io.hpp"

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

namespace dyson {

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

namespace {

std::ofstream open_out(const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot open '" + path + "' for writing");
  return os;
}

json finite_or_null(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

}  // namespace

void write_profile_csv(const std::string& path, const DensityProfile& p) {
  std::ofstream os = open_out(path);
  os << "tau,rho,eta,inside,inconclusive,error\n";
  for (std::size_t i = 0; i < p.taus.size(); ++i) {
    std::string err = p.errors[i];
    for (char& c : err)
      if (c == ',' || c == '\n') c = ';';
    os << format_double(p.taus[i]) << ',' << format_double(p.rho[i]) << ','
       << format_double(p.eta_used[i]) << ',' << int(p.inside[i]) << ',' << int(p.inconclusive[i])
       << ',' << err << '\n';
  }
}

void write_values_csv(const std::string& path, const std::string& header,
                      const std::vector<double>& values) {
  std::ofstream os = open_out(path);
  os << header << '\n';
  for (double v : values) os << format_double(v) << '\n';
}

void write_json(const std::string& path, const json& j) {
  std::ofstream os = open_out(path);
  os << j.dump(2) << '\n';
}

json matrix_to_json(const Matrix& m) {
  json re = json::array(), im = json::array();
  bool complex = false;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json r = json::array(), c = json::array();
    for (Eigen::Index k = 0; k < m.cols(); ++k) {
      r.push_back(m(i, k).real());
      c.push_back(m(i, k).imag());
      complex = complex || m(i, k).imag() != 0.0;
    }
    re.push_back(r);
    im.push_back(c);
  }
  if (!complex) return re;
  return json{{"re", re}, {"im", im}};
}

json to_json(const Solution& s) {
  return json{{"z", {s.z.real(), s.z.imag()}},
              {"trace", {normalized_trace(s.m).real(), normalized_trace(s.m).imag()}},
              {"m", matrix_to_json(s.m)},
              {"residual", s.residual},
              {"iterations", s.iterations},
              {"newton_steps", s.newton_steps},
              {"converged", s.converged}};
}

json to_json(const BandStructure& bs) {
  json bands = json::array(), gaps = json::array(), minima = json::array();
  for (const auto& b : bs.bands) bands.push_back({b.first, b.second});
  for (const auto& g : bs.gaps) gaps.push_back({g.first, g.second});
  for (const auto& m : bs.minima) minima.push_back(json{{"tau", m.tau}, {"rho", m.rho}});
  return json{{"bands", bands}, {"gaps", gaps}, {"minima", minima}, {"warnings", bs.warnings}};
}

json to_json(const ShapeParams& p) {
  return json{{"sigma", p.sigma},           {"sigma_imag", p.sigma_imag},
              {"psi", p.psi},               {"psi_imag", p.psi_imag},
              {"gamma", finite_or_null(p.gamma_big)}, {"rho0", p.rho0},
              {"kappa", p.kappa},           {"fu2", p.fu2},
              {"separation", finite_or_null(p.separation)}};
}

json to_json(const SingularityReport& r) {
  auto fit = [](const LocalFit& f) {
    return json{{"exponent", f.exponent}, {"coefficient", f.coefficient}, {"r2", f.r2}, {"points", f.points}};
  };
  json cand = json::array();
  for (auto k : r.candidates) cand.push_back(to_string(k));
  return json{{"tau0", r.tau0},
              {"kind", to_string(r.kind)},
              {"sigma", r.params.sigma},
              {"psi", r.params.psi},
              {"gamma", finite_or_null(r.params.gamma_big)},
              {"delta_gap", r.delta_gap},
              {"rho0", r.rho0},
              {"rho_tilde", r.rho_tilde},
              {"fit", fit(r.fit)},
              {"fit_left", fit(r.fit_left)},
              {"fit_right", fit(r.fit_right)},
              {"candidates", cand},
              {"note", r.note}};
}

json to_json(const BandMassSummary& s) {
  json bands = json::array(), evals = json::array();
  for (const auto& b : s.bands)
    bands.push_back(json{{"interval", {b.interval.first, b.interval.second}},
                         {"mass", b.mass},
                         {"mass_integral", b.mass_integral},
                         {"n_mass", b.n_mass},
                         {"defect", b.defect}});
  for (const auto& e : s.evaluations)
    evals.push_back(json{{"tau", e.tau},
                         {"mass_left_formula", e.mass_left_formula},
                         {"mass_left_integral", e.mass_left_integral},
                         {"residual", e.residual},
                         {"min_abs_eigenvalue", e.min_abs_eigenvalue}});
  return json{{"bands", bands},
              {"evaluations", evals},
              {"checks", {{"max_formula_vs_integral", s.max_formula_vs_integral},
                          {"max_gap_spread", s.max_gap_spread}}}};
}

json to_json(const Comparison& c) {
  return json{{"ks", c.ks}, {"l1_hist", c.l1_hist}, {"bin_width", c.bin_width}, {"n", c.n}};
}

// ---------------------------------------------------------------------------
// Configuration

namespace {

void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + ": expected an object");
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!allowed.count(it.key())) throw ConfigError(where + ": unknown key '" + it.key() + "'");
}

const json& need(const json& j, const std::string& key, const std::string& where) {
  if (!j.contains(key)) throw ConfigError(where + ": missing key '" + key + "'");
  return j.at(key);
}

double get_number(const json& j, const std::string& where) {
  if (!j.is_number()) throw ConfigError(where + ": expected a number");
  return j.get<double>();
}

int get_int(const json& j, const std::string& where) {
  if (!j.is_number_integer()) throw ConfigError(where + ": expected an integer");
  return j.get<int>();
}

double number_or(const json& j, const std::string& key, double dflt, const std::string& where) {
  return j.contains(key) ? get_number(j.at(key), where + "." + key) : dflt;
}

int int_or(const json& j, const std::string& key, int dflt, const std::string& where) {
  return j.contains(key) ? get_int(j.at(key), where + "." + key) : dflt;
}

Eigen::MatrixXd real_matrix(const json& j, const std::string& where) {
  if (!j.is_array() || j.empty()) throw ConfigError(where + ": expected a non-empty array of rows");
  const std::size_t rows = j.size();
  const std::size_t cols = j[0].is_array() ? j[0].size() : 0;
  if (cols == 0) throw ConfigError(where + ": rows must be non-empty arrays");
  Eigen::MatrixXd m(rows, cols);
  for (std::size_t i = 0; i < rows; ++i) {
    if (!j[i].is_array() || j[i].size() != cols) throw ConfigError(where + ": ragged matrix");
    for (std::size_t k = 0; k < cols; ++k) m(i, k) = get_number(j[i][k], where);
  }
  return m;
}

Matrix complex_matrix(const json& j, const std::string& where) {
  if (j.is_object()) {
    check_keys(j, {"re", "im"}, where);
    Eigen::MatrixXd re = real_matrix(need(j, "re", where), where + ".re");
    Eigen::MatrixXd im = j.contains("im") ? real_matrix(j.at("im"), where + ".im")
                                          : Eigen::MatrixXd::Zero(re.rows(), re.cols());
    if (im.rows() != re.rows() || im.cols() != re.cols()) throw ConfigError(where + ": re/im size mismatch");
    Matrix m(re.rows(), re.cols());
    for (Eigen::Index i = 0; i < re.rows(); ++i)
      for (Eigen::Index k = 0; k < re.cols(); ++k) m(i, k) = cplx(re(i, k), im(i, k));
    return m;
  }
  return real_matrix(j, where).cast<cplx>();
}

Matrix square_hermitian(const json& j, int n, const std::string& where) {
  Matrix m = complex_matrix(j, where);
  if (m.rows() != n || m.cols() != n) throw ConfigError(where + ": expected a " + std::to_string(n) + "x" + std::to_string(n) + " matrix");
  if (!is_hermitian(m, 1e-12)) throw ConfigError(where + ": matrix must be Hermitian");
  return m;
}

Matrix bare_matrix(const json& j, int n, const std::string& where) {
  if (j.contains("bare") && j.contains("bare_diag")) throw ConfigError(where + ": give either bare or bare_diag");
  if (j.contains("bare")) return square_hermitian(j.at("bare"), n, where + ".bare");
  Matrix a = Matrix::Zero(n, n);
  if (j.contains("bare_diag")) {
    const json& d = j.at("bare_diag");
    if (!d.is_array() || static_cast<int>(d.size()) != n)
      throw ConfigError(where + ".bare_diag: expected " + std::to_string(n) + " numbers");
    for (int i = 0; i < n; ++i) a(i, i) = get_number(d[i], where + ".bare_diag");
  }
  return a;
}

// Variance profile: a number (constant), an N x N matrix, or
// {"fractions": [...], "values": [[...]]} constant on consecutive index blocks.
Eigen::MatrixXd profile(const json& j, int N, const std::string& where) {
  if (j.is_number()) return Eigen::MatrixXd::Constant(N, N, get_number(j, where));
  if (j.is_object()) {
    check_keys(j, {"fractions", "values"}, where);
    const json& f = need(j, "fractions", where);
    if (!f.is_array() || f.empty()) throw ConfigError(where + ".fractions: expected a non-empty array");
    Eigen::MatrixXd v = real_matrix(need(j, "values", where), where + ".values");
    const int B = static_cast<int>(f.size());
    if (v.rows() != B || v.cols() != B) throw ConfigError(where + ".values: must be square of size fractions");
    std::vector<int> start(B + 1, 0);
    double acc = 0.0;
    for (int b = 0; b < B; ++b) {
      acc += get_number(f[b], where + ".fractions");
      const double pos = acc * N;
      start[b + 1] = static_cast<int>(std::lround(pos));
      if (std::abs(pos - start[b + 1]) > 1e-9) throw ConfigError(where + ": fraction times N must be an integer");
    }
    if (start[B] != N) throw ConfigError(where + ".fractions: must sum to 1");
    Eigen::MatrixXd s(N, N);
    for (int b = 0; b < B; ++b)
      for (int c = 0; c < B; ++c)
        s.block(start[b], start[c], start[b + 1] - start[b], start[c + 1] - start[c]).setConstant(v(b, c));
    return s;
  }
  Eigen::MatrixXd s = real_matrix(j, where);
  if (s.rows() != N || s.cols() != N) throw ConfigError(where + ": profile must be N x N");
  return s;
}

bool profile_rescalable(const json& j) { return j.is_number() || j.is_object(); }

std::pair<KroneckerSelfEnergy, std::vector<Matrix>> kronecker_data(const json& j, int N_override,
                                                                   const std::string& where) {
  KroneckerSelfEnergy k;
  k.K = get_int(need(j, "K", where), where + ".K");
  k.N = N_override > 0 ? N_override : get_int(need(j, "N", where), where + ".N");
  if (k.K < 1 || k.N < 1) throw ConfigError(where + ": K and N must be positive");
  auto list = [&](const char* key) {
    if (!j.contains(key)) return json::array();
    if (!j.at(key).is_array()) throw ConfigError(where + "." + key + ": expected an array");
    return json(j.at(key));
  };
  const json alpha = list("alpha"), s = list("s"), beta = list("beta"), t = list("t");
  if (alpha.size() != s.size()) throw ConfigError(where + ": alpha and s must have equal length");
  if (beta.size() != t.size()) throw ConfigError(where + ": beta and t must have equal length");
  if (alpha.empty() && beta.empty()) throw ConfigError(where + ": need at least one alpha or beta");
  for (std::size_t mu = 0; mu < alpha.size(); ++mu) {
    if (N_override > 0 && !profile_rescalable(s[mu]))
      throw ConfigError(where + ".s: explicit N x N profiles cannot be resized");
    k.alpha.push_back(square_hermitian(alpha[mu], k.K, where + ".alpha"));
    k.s.push_back(profile(s[mu], k.N, where + ".s"));
  }
  for (std::size_t nu = 0; nu < beta.size(); ++nu) {
    if (N_override > 0 && !profile_rescalable(t[nu]))
      throw ConfigError(where + ".t: explicit N x N profiles cannot be resized");
    Matrix b = complex_matrix(beta[nu], where + ".beta");
    if (b.rows() != k.K || b.cols() != k.K) throw ConfigError(where + ".beta: must be K x K");
    k.beta.push_back(b);
    k.t.push_back(profile(t[nu], k.N, where + ".t"));
  }
  std::vector<Matrix> bare(k.N, Matrix::Zero(k.K, k.K));
  if (j.contains("bare")) {
    const json& b = j.at("bare");
    // Either one K x K block for every index or a list of N blocks.
    const bool single = b.is_object() || (b.is_array() && !b.empty() && b[0].is_array() &&
                                          !b[0].empty() && b[0][0].is_number());
    if (single) {
      Matrix blk = square_hermitian(b, k.K, where + ".bare");
      bare.assign(k.N, blk);
    } else {
      if (N_override > 0) throw ConfigError(where + ".bare: per-index blocks cannot be resized");
      if (!b.is_array() || static_cast<int>(b.size()) != k.N)
        throw ConfigError(where + ".bare: expected N blocks");
      for (int i = 0; i < k.N; ++i) bare[i] = square_hermitian(b[i], k.K, where + ".bare");
    }
  }
  return {std::move(k), std::move(bare)};
}

}  // namespace

ModelSpec parse_model(const json& j) {
  const std::string where = "model";
  if (!j.is_object()) throw ConfigError("model: expected an object");
  const json& type = need(j, "type", where);
  if (!type.is_string()) throw ConfigError("model.type: expected a string");
  const std::string t = type.get<std::string>();
  try {
    if (t == "flat") {
      check_keys(j, {"type", "n", "strength", "bare", "bare_diag"}, where);
      const int n = int_or(j, "n", 1, where);
      if (n < 1) throw ConfigError("model.n: must be positive");
      const double g = number_or(j, "strength", 1.0, where);
      if (!(g > 0)) throw ConfigError("model.strength: must be positive");
      return ModelSpec::flat(bare_matrix(j, n, where), g);
    }
    if (t == "two_component") {
      check_keys(j, {"type", "delta", "alpha", "R", "n0", "bare_diag"}, where);
      const double delta = get_number(need(j, "delta", where), "model.delta");
      const int n0 = int_or(j, "n0", 20, where);
      if (j.contains("alpha") == j.contains("R")) throw ConfigError("model: give exactly one of alpha and R");
      ModelSpec base = j.contains("alpha")
                           ? build_two_component(delta, get_number(j.at("alpha"), "model.alpha"), n0)
                           : build_two_component(delta, Eigen::Matrix2d(real_matrix(j.at("R"), "model.R")), n0);
      if (!j.contains("bare_diag")) return base;
      return ModelSpec(bare_matrix(j, base.dim(), where), base.self_energy());
    }
    if (t == "dense") {
      check_keys(j, {"type", "n", "bare", "bare_diag", "kraus"}, where);
      const int n = get_int(need(j, "n", where), "model.n");
      if (n < 1) throw ConfigError("model.n: must be positive");
      const json& kr = need(j, "kraus", where);
      if (!kr.is_array() || kr.empty()) throw ConfigError("model.kraus: expected a non-empty array");
      std::vector<Matrix> A;
      for (const auto& m : kr) {
        Matrix a = complex_matrix(m, "model.kraus");
        if (a.rows() != n || a.cols() != n) throw ConfigError("model.kraus: matrices must be n x n");
        A.push_back(a);
      }
      // S[x] = (1/2) sum_k (A_k x A_k^* + A_k^* x A_k): symmetric and completely positive.
      SuperOperator op = SuperOperator::from_map(BlockLayout::full(n), [A](const Matrix& x) {
        Matrix r = Matrix::Zero(x.rows(), x.cols());
        for (const auto& a : A) r += 0.5 * (a * x * a.adjoint() + a.adjoint() * x * a);
        return r;
      });
      return ModelSpec::dense(bare_matrix(j, n, where), op);
    }
    if (t == "kronecker") {
      check_keys(j, {"type", "K", "N", "alpha", "s", "beta", "t", "bare"}, where);
      auto [k, bare] = kronecker_data(j, 0, where);
      auto [kr, br] = reduce_kronecker(k, bare);
      return ModelSpec::kronecker(std::move(kr), br);
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(std::string("model: ") + e.what());
  }
  throw ConfigError("model.type: unknown type '" + t + "'");
}

EnsembleSpec parse_ensemble(const json& j, int N, std::uint64_t seed, EntryLaw law) {
  const std::string t = j.at("type").get<std::string>();
  EnsembleSpec e;
  try {
    if (t == "flat") {
      if (int_or(j, "n", 1, "model") != 1)
        throw ConfigError("mc: flat models are sampled as Wigner matrices and need n = 1");
      e = wigner_ensemble(N, seed);
      e.kernel.s[0] *= number_or(j, "strength", 1.0, "model");
      Matrix a = bare_matrix(j, 1, "model");
      if (a(0, 0) != 0.0) e.bare_blocks.assign(N, a);
    } else if (t == "two_component") {
      if (j.contains("R") || j.contains("bare_diag"))
        throw ConfigError("mc: two_component ensembles need the alpha form without bare_diag");
      e = two_component_ensemble(get_number(j.at("delta"), "model.delta"),
                                 get_number(j.at("alpha"), "model.alpha"), N, seed);
    } else if (t == "kronecker") {
      auto [k, bare] = kronecker_data(j, N, "model");
      e.kernel = std::move(k);
      e.bare_blocks = std::move(bare);
      e.seed = seed;
    } else {
      throw ConfigError("mc: model type '" + t + "' has no random-matrix realization");
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& err) {
    throw ConfigError(std::string("mc: ") + err.what());
  }
  e.law = law;
  return e;
}

ScenarioConfig parse_config(const json& j) {
  check_keys(j, {"name", "model", "solver", "grid", "classify", "mc", "fig2", "solve", "output"}, "config");
  ScenarioConfig c;
  if (j.contains("name")) {
    if (!j.at("name").is_string()) throw ConfigError("config.name: expected a string");
    c.name = j.at("name").get<std::string>();
  }
  if (j.contains("output")) {
    if (!j.at("output").is_string()) throw ConfigError("config.output: expected a string");
    c.output_dir = j.at("output").get<std::string>();
  }
  if (j.contains("model")) {
    c.model_source = j.at("model");
    c.model = parse_model(c.model_source);
  }
  if (j.contains("solver")) {
    const json& s = j.at("solver");
    check_keys(s, {"tol", "max_iter", "damping", "newton", "newton_switch", "eta_floor", "eta_start", "short_ladder"}, "solver");
    SolveOptions& o = c.solver;
    o.tol = number_or(s, "tol", o.tol, "solver");
    o.max_iter = int_or(s, "max_iter", o.max_iter, "solver");
    o.damping = number_or(s, "damping", o.damping, "solver");
    if (s.contains("newton")) {
      if (!s.at("newton").is_boolean()) throw ConfigError("solver.newton: expected a boolean");
      o.newton = s.at("newton").get<bool>();
    }
    o.newton_switch = number_or(s, "newton_switch", o.newton_switch, "solver");
    o.eta_floor = number_or(s, "eta_floor", o.eta_floor, "solver");
    o.eta_start = number_or(s, "eta_start", o.eta_start, "solver");
    o.short_ladder = int_or(s, "short_ladder", o.short_ladder, "solver");
  }
  if (j.contains("grid")) {
    const json& g = j.at("grid");
    check_keys(g, {"window", "points", "eta"}, "grid");
    if (g.contains("window")) {
      const json& w = g.at("window");
      if (!w.is_array() || w.size() != 2) throw ConfigError("grid.window: expected [lo, hi]");
      c.grid.lo = get_number(w[0], "grid.window");
      c.grid.hi = get_number(w[1], "grid.window");
      if (!(c.grid.hi > c.grid.lo)) throw ConfigError("grid.window: need lo < hi");
    }
    c.grid.points = int_or(g, "points", c.grid.points, "grid");
    if (c.grid.points < 3) throw ConfigError("grid.points: need at least 3");
    c.solver.eta_floor = number_or(g, "eta", c.solver.eta_floor, "grid");
  }
  try {
    c.solver.validate();
  } catch (const Error& e) {
    throw ConfigError(std::string("solver: ") + e.what());
  }
  if (j.contains("classify")) {
    const json& k = j.at("classify");
    check_keys(k, {"rho_star", "sigma_star", "sigma_band", "edge_match", "positive_only"}, "classify");
    ClassifyOptions& o = c.classify.options;
    o.rho_tol = number_or(k, "rho_star", o.rho_tol, "classify");
    o.sigma_star = number_or(k, "sigma_star", o.sigma_star, "classify");
    o.sigma_band = number_or(k, "sigma_band", o.sigma_band, "classify");
    o.edge_match = number_or(k, "edge_match", o.edge_match, "classify");
    if (k.contains("positive_only")) {
      if (!k.at("positive_only").is_boolean()) throw ConfigError("classify.positive_only: expected a boolean");
      c.classify.positive_only = k.at("positive_only").get<bool>();
    }
  }
  if (j.contains("mc")) {
    const json& m = j.at("mc");
    check_keys(m, {"N", "draws", "seed", "law", "bin_width"}, "mc");
    if (m.contains("N")) {
      c.mc.sizes.clear();
      const json& n = m.at("N");
      if (n.is_array()) {
        for (const auto& v : n) c.mc.sizes.push_back(get_int(v, "mc.N"));
      } else {
        c.mc.sizes.push_back(get_int(n, "mc.N"));
      }
      if (c.mc.sizes.empty()) throw ConfigError("mc.N: empty list");
      for (int v : c.mc.sizes)
        if (v < 1) throw ConfigError("mc.N: sizes must be positive");
    }
    c.mc.draws = int_or(m, "draws", c.mc.draws, "mc");
    if (c.mc.draws < 1) throw ConfigError("mc.draws: must be positive");
    if (m.contains("seed")) {
      if (!m.at("seed").is_number_unsigned()) throw ConfigError("mc.seed: expected a non-negative integer");
      c.mc.seed = m.at("seed").get<std::uint64_t>();
    }
    if (m.contains("law")) {
      if (!m.at("law").is_string()) throw ConfigError("mc.law: expected a string");
      try {
        c.mc.law = parse_entry_law(m.at("law").get<std::string>());
      } catch (const Error& e) {
        throw ConfigError(std::string("mc.law: ") + e.what());
      }
    }
    c.mc.bin_width = number_or(m, "bin_width", c.mc.bin_width, "mc");
    if (!(c.mc.bin_width > 0)) throw ConfigError("mc.bin_width: must be positive");
  }
  if (j.contains("fig2")) {
    const json& f = j.at("fig2");
    check_keys(f, {"delta", "alphas", "window", "points", "n0"}, "fig2");
    c.fig2.delta = number_or(f, "delta", c.fig2.delta, "fig2");
    if (f.contains("alphas")) {
      if (!f.at("alphas").is_array() || f.at("alphas").empty()) throw ConfigError("fig2.alphas: expected a non-empty array");
      c.fig2.alphas.clear();
      for (const auto& a : f.at("alphas")) c.fig2.alphas.push_back(get_number(a, "fig2.alphas"));
    }
    c.fig2.window = number_or(f, "window", c.fig2.window, "fig2");
    if (!(c.fig2.window > 0)) throw ConfigError("fig2.window: must be positive");
    c.fig2.points = int_or(f, "points", c.fig2.points, "fig2");
    if (c.fig2.points < 3) throw ConfigError("fig2.points: need at least 3");
    c.fig2.n0 = int_or(f, "n0", c.fig2.n0, "fig2");
  }
  if (j.contains("solve")) {
    const json& s = j.at("solve");
    check_keys(s, {"points"}, "solve");
    const json& p = need(s, "points", "solve");
    if (!p.is_array() || p.empty()) throw ConfigError("solve.points: expected a non-empty array");
    for (const auto& z : p) {
      if (!z.is_array() || z.size() != 2) throw ConfigError("solve.points: each point is [re, im]");
      const cplx v(get_number(z[0], "solve.points"), get_number(z[1], "solve.points"));
      if (!(v.imag() > 0)) throw ConfigError("solve.points: imaginary part must be positive");
      c.solve.points.push_back(v);
    }
  }
  if (c.model && j.contains("mc")) {
    c.ensemble = parse_ensemble(c.model_source, c.mc.sizes.front(), c.mc.seed, c.mc.law);
  }
  return c;
}

namespace {

json read_json_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot read '" + path + "'");
  try {
    return json::parse(is);
  } catch (const json::exception& e) {
    throw ConfigError("'" + path + "' is not valid JSON: " + e.what());
  }
}

}  // namespace

ScenarioConfig load_config(const std::string& path) {
  json j = read_json_file(path);
  // "model" may name a separate file, resolved relative to the config
  if (j.is_object() && j.contains("model") && j.at("model").is_string()) {
    std::filesystem::path mp(j.at("model").get<std::string>());
    if (mp.is_relative()) mp = std::filesystem::path(path).parent_path() / mp;
    j["model"] = read_json_file(mp.string());
  }
  return parse_config(j);
}

}  // namespace dyson
