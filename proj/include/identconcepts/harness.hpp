// Copyright 2026 The identconcepts Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


// Experiment driver: config loading, per-cell execution and CSV output.

#ifndef IDENTCONCEPTS_HARNESS_HPP
#define IDENTCONCEPTS_HARNESS_HPP

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "identconcepts/discovery.hpp"
#include "identconcepts/encoder.hpp"
#include "identconcepts/generators.hpp"
#include "identconcepts/metrics.hpp"
#include "identconcepts/numerics.hpp"
#include "identconcepts/random.hpp"
#include "identconcepts/sampling.hpp"

namespace identconcepts {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class ExperimentKind { Identifiability, NoiseSweep, CorrelationSweep, GradCheck };
enum class MixingKind { Random, Identity };

inline std::string_view to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::Identifiability: return "identifiability";
    case ExperimentKind::NoiseSweep: return "noise_sweep";
    case ExperimentKind::CorrelationSweep: return "correlation_sweep";
    case ExperimentKind::GradCheck: return "grad_check";
  }
  return "unknown";
}

inline const std::vector<std::string>& known_methods() {
  static const std::vector<std::string> kMethods = {"pca",          "ica",     "dma_analytic",
                                                    "ima_analytic", "dma_sgd", "ima_sgd"};
  return kMethods;
}

struct ExperimentConfig {
  ExperimentKind experiment = ExperimentKind::Identifiability;
  GeneratorSpec generator{};
  std::vector<std::string> methods;
  ComponentDistribution distribution{};
  std::vector<std::uint64_t> seeds{0};
  std::size_t n_samples = 200;
  std::size_t eval_samples = 2000;  // fresh uniform batch for MIG
  SgdConfig sgd{};
  std::vector<double> noise_levels{0.0};
  std::vector<double> correlation_params;
  MixingKind mixing = MixingKind::Random;
  std::string output_dir = "results";
  std::size_t dump_images = 0;  // PGMs written per seed

  void validate() const {
    if (seeds.empty()) throw ConfigError("seeds must not be empty");
    if (noise_levels.empty()) throw ConfigError("noise_levels must not be empty");
    for (std::size_t i = 0; i < noise_levels.size(); ++i) {
      if (!(noise_levels[i] >= 0.0)) throw ConfigError("noise_levels must be non-negative");
      if (i > 0 && !(noise_levels[i] > noise_levels[i - 1])) {
        throw ConfigError("noise_levels must be strictly ascending");
      }
    }
    for (const auto& m : methods) {
      if (std::find(known_methods().begin(), known_methods().end(), m) == known_methods().end()) {
        throw ConfigError("unknown method '" + m + "'");
      }
    }
    if (experiment == ExperimentKind::GradCheck) return;
    if (methods.empty()) throw ConfigError("methods must not be empty");
    if (n_samples < 20) throw ConfigError("n_samples must be at least 20");
    if (eval_samples < 101) throw ConfigError("eval_samples must exceed 100");
    try {
      generator.validate();
      distribution.validate();
      sgd.validate();
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
    if (distribution.k != generator.num_components()) {
      throw ConfigError("distribution.k does not match the generator's component count");
    }
    if (experiment == ExperimentKind::NoiseSweep) {
      if (generator.kind != GeneratorKind::FourBarsNemr) {
        throw ConfigError("noise_sweep requires the fourbars_nemr generator");
      }
      for (const auto& m : methods) {
        if (m != "dma_sgd" && m != "ima_sgd") {
          throw ConfigError("noise_sweep supports only dma_sgd and ima_sgd");
        }
      }
    }
    if (experiment == ExperimentKind::CorrelationSweep) {
      const bool line = distribution.kind == DistributionKind::CorrelatedLine;
      if (!line && distribution.kind != DistributionKind::CorrelatedGaussian) {
        throw ConfigError("correlation_sweep needs a gaussian or line distribution");
      }
      if (correlation_params.empty()) throw ConfigError("correlation_params must not be empty");
      for (double p : correlation_params) {
        if (line ? !(p > 0.0) : !(p >= 0.0 && p < 1.0)) {
          throw ConfigError("correlation parameter " + std::to_string(p) + " out of range");
        }
      }
    }
  }
};

// ---------------------------------------------------------------------------
// JSON config

namespace detail {

using Json = nlohmann::json;

inline void check_keys(const Json& j, std::string_view where,
                       std::initializer_list<std::string_view> allowed) {
  if (!j.is_object()) throw ConfigError(std::string(where) + " must be a JSON object");
  for (const auto& item : j.items()) {
    if (std::find(allowed.begin(), allowed.end(), item.key()) == allowed.end()) {
      throw ConfigError("unknown key '" + item.key() + "' in " + std::string(where));
    }
  }
}

template <typename T>
void read(const Json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("bad value for '") + key + "': " + e.what());
  }
}

inline GeneratorSpec parse_generator(const Json& j) {
  check_keys(j, "generator", {"kind", "height", "width", "smoothness"});
  GeneratorSpec g;
  std::string kind = "fourbars";
  read(j, "kind", kind);
  try {
    g.kind = parse_generator_kind(kind);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  read(j, "height", g.height);
  read(j, "width", g.width);
  read(j, "smoothness", g.smoothness);
  return g;
}

inline ComponentDistribution parse_distribution(const Json& j, std::size_t k) {
  check_keys(j, "distribution", {"kind", "shape", "oversample_factor", "domain", "i", "j", "s",
                                 "rho", "pairs", "pair_schedule", "eig_floor"});
  ComponentDistribution d;
  d.k = k;
  std::string kind = "uniform";
  read(j, "kind", kind);
  if (kind == "uniform") {
    d.kind = DistributionKind::IndependentUniform;
  } else if (kind == "nongaussian") {
    d.kind = DistributionKind::IndependentNonGaussian;
  } else if (kind == "line") {
    d.kind = DistributionKind::CorrelatedLine;
  } else if (kind == "gaussian") {
    d.kind = DistributionKind::CorrelatedGaussian;
  } else {
    throw ConfigError("unknown distribution kind '" + kind + "'");
  }
  std::string shape = "uniform";
  read(j, "shape", shape);
  if (shape == "uniform") {
    d.shape = NonGaussianShape::Uniform;
  } else if (shape == "laplace") {
    d.shape = NonGaussianShape::Laplace;
  } else {
    throw ConfigError("unknown shape '" + shape + "'");
  }
  read(j, "oversample_factor", d.oversample_factor);
  if (j.contains("domain")) {
    std::vector<double> dom;
    read(j, "domain", dom);
    if (dom.size() != 2 || !(dom[0] < dom[1])) throw ConfigError("domain must be [lo, hi]");
    d.domain = {dom[0], dom[1]};
  }
  read(j, "i", d.i);
  read(j, "j", d.j);
  read(j, "s", d.s);
  read(j, "rho", d.rho);
  read(j, "eig_floor", d.eig_floor);
  if (j.contains("pairs") && j.contains("pair_schedule")) {
    throw ConfigError("give either pairs or pair_schedule, not both");
  }
  if (j.contains("pairs")) {
    std::vector<std::vector<std::size_t>> pairs;
    read(j, "pairs", pairs);
    d.pair_order.clear();
    for (const auto& p : pairs) {
      if (p.size() != 2) throw ConfigError("each pair must have two indices");
      d.pair_order.emplace_back(p[0], p[1]);
    }
  }
  if (j.contains("pair_schedule")) {
    std::size_t count = 0;
    read(j, "pair_schedule", count);
    if (k != 6 || count > 15) throw ConfigError("pair_schedule needs k = 6 and at most 15 pairs");
    d.pair_order = six_component_pair_schedule(count);
  }
  return d;
}

inline SgdConfig parse_sgd(const Json& j) {
  check_keys(j, "sgd", {"learning_rate", "final_learning_rate", "epochs", "batch_size",
                        "max_steps", "optimizer", "loss", "init", "precondition", "rms_decay",
                        "rms_eps"});
  SgdConfig c;
  read(j, "learning_rate", c.learning_rate);
  read(j, "final_learning_rate", c.final_learning_rate);
  read(j, "epochs", c.epochs);
  read(j, "batch_size", c.batch_size);
  read(j, "max_steps", c.max_steps);
  read(j, "precondition", c.precondition);
  read(j, "rms_decay", c.rms_decay);
  read(j, "rms_eps", c.rms_eps);
  std::string opt = "rmsprop";
  std::string loss = "frobenius";
  std::string init = "identity";
  read(j, "optimizer", opt);
  read(j, "loss", loss);
  read(j, "init", init);
  if (opt == "rmsprop") {
    c.optimizer = OptimizerKind::RMSProp;
  } else if (opt == "sgd") {
    c.optimizer = OptimizerKind::PlainSGD;
  } else {
    throw ConfigError("unknown optimizer '" + opt + "'");
  }
  if (loss == "frobenius") {
    c.loss = LossKind::Frobenius;
  } else if (loss == "determinant") {
    c.loss = LossKind::Determinant;
  } else {
    throw ConfigError("unknown loss '" + loss + "'");
  }
  if (init == "identity") {
    c.init = InitKind::Identity;
  } else if (init == "random") {
    c.init = InitKind::SeededRandom;
  } else {
    throw ConfigError("unknown init '" + init + "'");
  }
  return c;
}

}  // namespace detail

inline ExperimentConfig parse_config(const nlohmann::json& j) {
  detail::check_keys(j, "config",
                     {"schema", "experiment", "generator", "methods", "distribution", "seeds",
                      "n_samples", "eval_samples", "sgd", "noise_levels", "correlation_params",
                      "mixing", "output_dir", "dump_images"});
  int schema = 0;
  detail::read(j, "schema", schema);
  if (schema != 1) throw ConfigError("unsupported or missing schema version (expected 1)");

  ExperimentConfig cfg;
  std::string experiment;
  detail::read(j, "experiment", experiment);
  if (experiment == "identifiability") {
    cfg.experiment = ExperimentKind::Identifiability;
  } else if (experiment == "noise_sweep") {
    cfg.experiment = ExperimentKind::NoiseSweep;
  } else if (experiment == "correlation_sweep") {
    cfg.experiment = ExperimentKind::CorrelationSweep;
  } else if (experiment == "grad_check") {
    cfg.experiment = ExperimentKind::GradCheck;
  } else {
    throw ConfigError("unknown experiment '" + experiment + "'");
  }
  if (j.contains("generator")) cfg.generator = detail::parse_generator(j.at("generator"));
  cfg.distribution = detail::parse_distribution(
      j.contains("distribution") ? j.at("distribution") : nlohmann::json::object(),
      cfg.generator.num_components());
  if (j.contains("sgd")) cfg.sgd = detail::parse_sgd(j.at("sgd"));
  detail::read(j, "methods", cfg.methods);
  detail::read(j, "seeds", cfg.seeds);
  detail::read(j, "n_samples", cfg.n_samples);
  detail::read(j, "eval_samples", cfg.eval_samples);
  detail::read(j, "noise_levels", cfg.noise_levels);
  detail::read(j, "correlation_params", cfg.correlation_params);
  detail::read(j, "output_dir", cfg.output_dir);
  detail::read(j, "dump_images", cfg.dump_images);
  std::string mixing = "random";
  detail::read(j, "mixing", mixing);
  if (mixing == "random") {
    cfg.mixing = MixingKind::Random;
  } else if (mixing == "identity") {
    cfg.mixing = MixingKind::Identity;
  } else {
    throw ConfigError("unknown mixing '" + mixing + "'");
  }
  cfg.validate();
  return cfg;
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config " + path + " is not valid JSON: " + e.what());
  }
  return parse_config(j);
}

/// Comma-separated seed list, as accepted by IDENTCONCEPTS_SEED.
inline std::vector<std::uint64_t> parse_seed_list(const std::string& text) {
  std::vector<std::uint64_t> seeds;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    unsigned long long v = 0;
    try {
      v = std::stoull(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != item.size()) throw ConfigError("bad seed '" + item + "'");
    seeds.push_back(v);
  }
  if (seeds.empty()) throw ConfigError("empty seed list");
  return seeds;
}

// ---------------------------------------------------------------------------
// Results

struct ResultRow {
  std::string experiment;
  std::string method;
  std::string generator;
  std::uint64_t seed = 0;
  double noise_sigma = 0.0;
  std::optional<double> correlation_param;
  std::optional<double> dci_d;
  std::optional<double> dci_c;
  std::optional<double> dci_i;
  std::optional<double> mig;
  std::optional<double> residual;
  std::optional<double> final_loss;
  double wall_time_ms = 0.0;
  std::string error;  // empty unless the cell failed

  bool failed() const { return !error.empty(); }
};

inline std::string result_csv_header() {
  return "experiment,method,generator,seed,noise_sigma,correlation_param,dci_d,dci_c,dci_i,"
         "mig,residual,final_loss,wall_time_ms";
}

namespace detail {

inline std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

inline std::string format_optional(const std::optional<double>& v) {
  return v && std::isfinite(*v) ? format_number(*v) : "null";
}

}  // namespace detail

inline std::string result_csv_row(const ResultRow& r, bool with_timing = true) {
  std::string s = r.experiment + ',' + r.method + ',' + r.generator + ',' +
                  std::to_string(r.seed) + ',' + detail::format_number(r.noise_sigma) + ',' +
                  detail::format_optional(r.correlation_param) + ',' +
                  detail::format_optional(r.dci_d) + ',' + detail::format_optional(r.dci_c) +
                  ',' + detail::format_optional(r.dci_i) + ',' + detail::format_optional(r.mig) +
                  ',' + detail::format_optional(r.residual) + ',' +
                  detail::format_optional(r.final_loss) + ',';
  if (with_timing) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3f", r.wall_time_ms);
    s += buf;
  }
  return s;
}

inline void write_results_csv(const std::vector<ResultRow>& rows, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << result_csv_header() << '\n';
  for (const auto& r : rows) out << result_csv_row(r) << '\n';
  if (!out) throw std::runtime_error("write failed for " + path);
}

// ---------------------------------------------------------------------------
// Cells

struct Cell {
  std::string method;
  std::uint64_t seed = 0;
  double noise_sigma = 0.0;
  std::optional<double> correlation_param;
};

namespace detail {

inline MixingMatrix cell_mixing(const ExperimentConfig& cfg, std::uint64_t seed) {
  const std::size_t k = cfg.generator.num_components();
  return cfg.mixing == MixingKind::Identity ? MixingMatrix::identity(k)
                                            : sample_mixing(k, derive_seed(seed, "mixing"));
}

inline ComponentDistribution cell_distribution(const ExperimentConfig& cfg, const Cell& cell) {
  ComponentDistribution d = cfg.distribution;
  if (cell.correlation_param) {
    if (d.kind == DistributionKind::CorrelatedLine) {
      d.s = *cell.correlation_param;
    } else {
      d.rho = *cell.correlation_param;
    }
  }
  return d;
}

inline ConceptMatrix run_method(const ExperimentConfig& cfg, const Cell& cell,
                                const FaithfulEncoderOracle& oracle,
                                const ComponentDistribution& dist, const SampleBatch& batch) {
  const Interval dom = dist.domain;
  if (cell.method == "pca" || cell.method == "ica") {
    Matrix emb(batch.z.rows(), batch.z.cols());
    for (std::size_t r = 0; r < batch.z.rows(); ++r) {
      const auto e = embed(oracle, batch.row(r, dom));
      std::copy(e.begin(), e.end(), emb.row(r).begin());
    }
    return cell.method == "pca" ? pca(emb) : fastica(emb, 200, 1e-6, derive_seed(cell.seed, "ica"));
  }
  if (cell.method == "dma_analytic") {
    return dma_analytical(encoder_jacobian(oracle, batch.row(0, dom)).matrix);
  }
  if (cell.method == "ima_analytic") {
    // Independent point pairs; the first pair without an eigen-degeneracy
    // warning wins, otherwise the last attempt is returned with its warning.
    constexpr std::size_t kPairs = 10;
    const SampleBatch pairs = sample(dist, 2 * kPairs, derive_seed(cell.seed, "ima-pairs"));
    ConceptMatrix out;
    for (std::size_t p = 0; p < kPairs; ++p) {
      const Matrix ja = encoder_jacobian(oracle, pairs.row(2 * p, dom)).matrix;
      const Matrix jb = encoder_jacobian(oracle, pairs.row(2 * p + 1, dom)).matrix;
      out = ima_analytical(jacobian_gram(ja), jacobian_gram(jb));
      if (!out.diagnostics.has_warning(kWarnNemrDegenerate)) break;
    }
    return out;
  }
  std::vector<Matrix> jacs;
  jacs.reserve(batch.z.rows());
  for (std::size_t r = 0; r < batch.z.rows(); ++r) {
    jacs.push_back(encoder_jacobian(oracle, batch.row(r, dom)).matrix);
  }
  SgdConfig sgd = cfg.sgd;
  sgd.seed = cell.seed;
  return sgd_discover(std::span<const Matrix>(jacs), sgd, cell.method == "dma_sgd");
}

}  // namespace detail

/// Runs one (method, seed, noise, correlation) cell. Every random draw is
/// derived from the cell seed, so a cell's result does not depend on which
/// other cells run or in what order.
inline ResultRow run_cell(const ExperimentConfig& cfg, const Cell& cell) {
  ResultRow row;
  row.experiment = std::string(to_string(cfg.experiment));
  row.method = cell.method;
  row.generator = std::string(to_string(cfg.generator.kind));
  row.seed = cell.seed;
  row.noise_sigma = cell.noise_sigma;
  row.correlation_param = cell.correlation_param;
  const auto start = std::chrono::steady_clock::now();
  try {
    const ComponentDistribution dist = detail::cell_distribution(cfg, cell);
    const FaithfulEncoderOracle oracle{cfg.generator, detail::cell_mixing(cfg, cell.seed),
                                       cell.noise_sigma, derive_seed(cell.seed, "encoder")};
    const SampleBatch batch = sample(dist, cfg.n_samples, cell.seed);
    const ConceptMatrix concepts = detail::run_method(cfg, cell, oracle, dist, batch);
    if (!concepts.m.all_finite()) throw NumericError(cell.method + ": non-finite concept matrix");

    const Matrix a = concepts.m * oracle.mixing.d;
    const DciReport dci = dci_from_matrix(a);
    row.dci_d = dci.disentanglement;
    row.dci_c = dci.completeness;
    row.dci_i = dci.informativeness;
    row.residual = decompose_ps(a).residual;
    if (std::isfinite(concepts.diagnostics.final_loss)) {
      row.final_loss = concepts.diagnostics.final_loss;
    }

    ComponentDistribution eval_dist;
    eval_dist.k = dist.k;
    eval_dist.domain = dist.domain;
    const Matrix z_eval = sample(eval_dist, cfg.eval_samples, derive_seed(cell.seed, "eval")).z;
    row.mig = mig(z_eval, z_eval * a.transpose());
  } catch (const std::exception& e) {
    row = ResultRow{row.experiment, row.method,      row.generator, row.seed, row.noise_sigma,
                    row.correlation_param, {}, {}, {}, {}, {}, {}, 0.0, e.what()};
    if (row.error.empty()) row.error = "unknown error";
  }
  row.wall_time_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return row;
}

/// Evaluates cells on up to `jobs` threads; the output order matches the
/// input order regardless of scheduling.
inline std::vector<ResultRow> run_cells(const ExperimentConfig& cfg, const std::vector<Cell>& cells,
                                        std::size_t jobs = 1) {
  std::vector<ResultRow> rows(cells.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < cells.size(); i = next++) rows[i] = run_cell(cfg, cells[i]);
  };
  const std::size_t n = std::max<std::size_t>(1, std::min(jobs, cells.size()));
  if (n == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < n; ++t) pool.emplace_back(worker);
  }
  return rows;
}

namespace detail {

inline std::optional<double> fixed_correlation(const ComponentDistribution& d) {
  if (d.kind == DistributionKind::CorrelatedLine) return d.s;
  if (d.kind == DistributionKind::CorrelatedGaussian) return d.rho;
  return std::nullopt;
}

inline std::vector<Cell> grid(const ExperimentConfig& cfg, const std::vector<double>& noise,
                              const std::vector<std::optional<double>>& corr) {
  std::vector<Cell> cells;
  for (const auto& c : corr)
    for (double nz : noise)
      for (auto seed : cfg.seeds)
        for (const auto& m : cfg.methods) cells.push_back({m, seed, nz, c});
  return cells;
}

}  // namespace detail

inline std::vector<ResultRow> run_identifiability(const ExperimentConfig& cfg,
                                                  std::size_t jobs = 1) {
  return run_cells(cfg,
                   detail::grid(cfg, {cfg.noise_levels.front()},
                                {detail::fixed_correlation(cfg.distribution)}),
                   jobs);
}

inline std::vector<ResultRow> run_noise_sweep(const ExperimentConfig& cfg, std::size_t jobs = 1) {
  return run_cells(
      cfg, detail::grid(cfg, cfg.noise_levels, {detail::fixed_correlation(cfg.distribution)}),
      jobs);
}

inline std::vector<ResultRow> run_correlation_sweep(const ExperimentConfig& cfg,
                                                    std::size_t jobs = 1) {
  std::vector<std::optional<double>> corr(cfg.correlation_params.begin(),
                                          cfg.correlation_params.end());
  return run_cells(cfg, detail::grid(cfg, {cfg.noise_levels.front()}, corr), jobs);
}

// ---------------------------------------------------------------------------
// Gradient check

struct GradCheckResult {
  double max_relative_error = 0.0;
  std::size_t instances = 0;
};

/// Largest relative deviation between loss_and_grad and central finite
/// differences over random (M, J) instances.
inline GradCheckResult gradient_check(LossKind kind, bool take_abs, std::uint64_t seed,
                                      std::size_t instances = 20, std::size_t k = 4,
                                      std::size_t l = 24, double h = 1e-6) {
  Rng rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  GradCheckResult out;
  for (std::size_t n = 0; n < instances; ++n) {
    Matrix m(k, k);
    Matrix j(k, l);
    for (double& v : m.data()) v = normal(rng);
    for (double& v : j.data()) v = normal(rng);
    const Matrix g = loss_and_grad(m, j, take_abs, kind).grad;
    double num = 0.0;
    double den = 0.0;
    for (std::size_t q = 0; q < m.size(); ++q) {
      Matrix plus = m;
      Matrix minus = m;
      plus.data()[q] += h;
      minus.data()[q] -= h;
      const double fd = (loss_and_grad(plus, j, take_abs, kind).value -
                         loss_and_grad(minus, j, take_abs, kind).value) /
                        (2.0 * h);
      num = std::max(num, std::abs(fd - g.data()[q]));
      den = std::max({den, std::abs(fd), std::abs(g.data()[q])});
    }
    out.max_relative_error = std::max(out.max_relative_error, den > 0.0 ? num / den : num);
    ++out.instances;
  }
  return out;
}

inline std::vector<ResultRow> run_grad_check(const ExperimentConfig& cfg) {
  struct Variant {
    const char* name;
    LossKind kind;
    bool take_abs;
  };
  static constexpr Variant kVariants[] = {
      {"frobenius_abs", LossKind::Frobenius, true},
      {"frobenius_signed", LossKind::Frobenius, false},
      {"determinant_abs", LossKind::Determinant, true},
      {"determinant_signed", LossKind::Determinant, false},
  };
  std::vector<ResultRow> rows;
  for (auto seed : cfg.seeds) {
    for (const auto& v : kVariants) {
      ResultRow row;
      row.experiment = "grad_check";
      row.method = v.name;
      row.generator = "none";
      row.seed = seed;
      const auto start = std::chrono::steady_clock::now();
      try {
        row.residual =
            gradient_check(v.kind, v.take_abs, derive_seed(seed, std::string_view(v.name)))
                .max_relative_error;
      } catch (const std::exception& e) {
        row.error = e.what();
      }
      row.wall_time_ms =
          std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
              .count();
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Driver

/// Writes `<kind>_<seed>_<index>.pgm` for the first `count` samples of each
/// seed's batch.
inline std::vector<std::string> dump_images(const ExperimentConfig& cfg, const std::string& dir) {
  std::vector<std::string> written;
  if (cfg.dump_images == 0) return written;
  std::filesystem::create_directories(dir);
  for (auto seed : cfg.seeds) {
    const SampleBatch batch = sample(cfg.distribution, cfg.n_samples, seed);
    for (std::size_t i = 0; i < std::min(cfg.dump_images, cfg.n_samples); ++i) {
      const std::string path = (std::filesystem::path(dir) /
                                (std::string(to_string(cfg.generator.kind)) + "_" +
                                 std::to_string(seed) + "_" + std::to_string(i) + ".pgm"))
                                   .string();
      write_pgm(render(cfg.generator, batch.row(i, cfg.distribution.domain)), path);
      written.push_back(path);
    }
  }
  return written;
}

inline std::vector<ResultRow> run_experiment(const ExperimentConfig& cfg, std::size_t jobs = 1) {
  switch (cfg.experiment) {
    case ExperimentKind::Identifiability: return run_identifiability(cfg, jobs);
    case ExperimentKind::NoiseSweep: return run_noise_sweep(cfg, jobs);
    case ExperimentKind::CorrelationSweep: return run_correlation_sweep(cfg, jobs);
    case ExperimentKind::GradCheck: return run_grad_check(cfg);
  }
  return {};
}

}  // namespace identconcepts

#endif  // IDENTCONCEPTS_HARNESS_HPP
