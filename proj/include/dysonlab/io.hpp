#pragma once

// CSV and JSON serialization of results, and the scenario configuration schema.

#include "dysonlab/bandmass.hpp"
#include "dysonlab/montecarlo.hpp"
#include "dysonlab/shape.hpp"

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace dyson {

using json = nlohmann::ordered_json;

/// Thrown for malformed or inconsistent configuration files.
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(what) {}
};

/// 17 significant digits, '.' decimal separator regardless of locale.
std::string format_double(double x);

void write_profile_csv(const std::string& path, const DensityProfile& profile);
void write_values_csv(const std::string& path, const std::string& header,
                      const std::vector<double>& values);
void write_json(const std::string& path, const json& j);

json to_json(const Solution& s);
json to_json(const BandStructure& bs);
json to_json(const ShapeParams& p);
json to_json(const SingularityReport& r);
json to_json(const BandMassSummary& s);
json to_json(const Comparison& c);
json matrix_to_json(const Matrix& m);

struct GridConfig {
  double lo = -3.0, hi = 3.0;
  int points = 2001;
};

struct ClassifyConfig {
  ClassifyOptions options;
  bool positive_only = false;  // only minima and edges with tau >= 0
};

struct McConfig {
  std::vector<int> sizes{1000};
  int draws = 1;
  std::uint64_t seed = 7;
  EntryLaw law = EntryLaw::ComplexGaussian;
  double bin_width = 0.05;
};

struct Fig2Config {
  double delta = 0.1;
  std::vector<double> alphas{0.14, 0.2, 0.23};
  double window = 2.0;
  int points = 2001;
  int n0 = 20;
};

struct SolveConfig {
  std::vector<cplx> points;
};

struct ScenarioConfig {
  std::string name;
  json model_source;            // the "model" block as given
  std::optional<ModelSpec> model;
  std::optional<EnsembleSpec> ensemble;  // set when the model admits a random-matrix realization
  SolveOptions solver;
  GridConfig grid;
  ClassifyConfig classify;
  McConfig mc;
  Fig2Config fig2;
  SolveConfig solve;
  std::string output_dir;
};

/// Strict parser: unknown keys, wrong types and invalid values raise ConfigError.
ScenarioConfig parse_config(const json& j);
ScenarioConfig load_config(const std::string& path);

/// Builds a model from a "model" block. The Monte Carlo size N, when given, fixes the
/// discretization of models that are realized as Kronecker ensembles.
ModelSpec parse_model(const json& j);
EnsembleSpec parse_ensemble(const json& model, int N, std::uint64_t seed, EntryLaw law);

}  // namespace dyson
