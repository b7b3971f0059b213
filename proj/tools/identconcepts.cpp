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


#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "identconcepts/identconcepts.hpp"

namespace ic = identconcepts;

namespace {

constexpr int kExitConfig = 1;
constexpr int kExitFailedCell = 2;

std::vector<double> parse_doubles(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != item.size()) throw ic::ConfigError("bad number '" + item + "'");
    out.push_back(v);
  }
  return out;
}

int report(const std::vector<ic::ResultRow>& rows) {
  int failed = 0;
  for (const auto& r : rows) {
    if (!r.failed()) continue;
    ++failed;
    std::cerr << "failed cell: method=" << r.method << " seed=" << r.seed
              << " noise=" << r.noise_sigma << ": " << r.error << '\n';
  }
  return failed == 0 ? 0 : kExitFailedCell;
}

int cmd_run(const std::string& config_path, const std::string& out_dir, std::size_t jobs) {
  ic::ExperimentConfig cfg = ic::load_config(config_path);
  if (const char* env = std::getenv("IDENTCONCEPTS_SEED"); env != nullptr && *env != '\0') {
    cfg.seeds = ic::parse_seed_list(env);
  }
  if (!out_dir.empty()) cfg.output_dir = out_dir;
  std::filesystem::create_directories(cfg.output_dir);

  const auto rows = ic::run_experiment(cfg, jobs);
  const std::string csv =
      (std::filesystem::path(cfg.output_dir) / (std::string(ic::to_string(cfg.experiment)) + ".csv"))
          .string();
  ic::write_results_csv(rows, csv);
  const auto images =
      ic::dump_images(cfg, (std::filesystem::path(cfg.output_dir) / "images").string());
  std::cout << "wrote " << rows.size() << " rows to " << csv;
  if (!images.empty()) std::cout << " and " << images.size() << " images";
  std::cout << '\n';
  return report(rows);
}

int cmd_grad_check(std::uint64_t seed) {
  ic::ExperimentConfig cfg;
  cfg.experiment = ic::ExperimentKind::GradCheck;
  cfg.seeds = {seed};
  const auto rows = ic::run_grad_check(cfg);
  std::cout << "variant,seed,max_relative_error\n";
  bool ok = true;
  for (const auto& r : rows) {
    std::cout << r.method << ',' << r.seed << ',';
    if (r.residual) {
      std::printf("%.3e\n", *r.residual);
      std::fflush(stdout);
      ok = ok && *r.residual < 1e-5;
    } else {
      std::cout << "null\n";
    }
  }
  const int code = report(rows);
  return code != 0 ? code : (ok ? 0 : kExitFailedCell);
}

int cmd_render(const std::string& generator, const std::string& z_text, const std::string& out,
               std::size_t height, std::size_t width) {
  ic::GeneratorSpec spec;
  try {
    spec.kind = ic::parse_generator_kind(generator);
  } catch (const std::invalid_argument& e) {
    throw ic::ConfigError(e.what());
  }
  spec.height = height;
  spec.width = width;
  ic::ComponentVector z{parse_doubles(z_text), {}};
  if (z.size() != spec.num_components()) {
    throw ic::ConfigError(generator + " expects " + std::to_string(spec.num_components()) +
                          " components, got " + std::to_string(z.size()));
  }
  try {
    ic::write_pgm(ic::render(spec, z), out);
  } catch (const std::invalid_argument& e) {
    throw ic::ConfigError(e.what());
  }
  std::cout << "wrote " << out << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Concept discovery on synthetic generators: PCA, FastICA, DMA and IMA."};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::size_t jobs = 1;
  auto* run = app.add_subcommand("run", "Run an experiment described by a JSON config");
  run->add_option("--config", config_path, "Experiment config (JSON, schema 1)")->required();
  run->add_option("--out", out_dir, "Output directory (overrides output_dir)");
  run->add_option("--jobs", jobs, "Worker threads")->check(CLI::PositiveNumber);

  std::uint64_t seed = 0;
  auto* grad = app.add_subcommand("grad-check", "Compare loss gradients to finite differences");
  grad->add_option("--seed", seed, "Seed for the random instances");

  std::string generator = "fourbars";
  std::string z_text;
  std::string image_out;
  std::size_t height = 16;
  std::size_t width = 16;
  auto* render = app.add_subcommand("render", "Render one generator image as PGM");
  render->add_option("--generator", generator, "fourbars, fourbars_nemr or colorbar");
  render->add_option("--z", z_text, "Comma-separated component values")->required();
  render->add_option("--out", image_out, "Output PGM path")->required();
  render->add_option("--height", height, "Image height");
  render->add_option("--width", width, "Image width");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*run) return cmd_run(config_path, out_dir, jobs);
    if (*grad) return cmd_grad_check(seed);
    if (*render) return cmd_render(generator, z_text, image_out, height, width);
  } catch (const ic::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitFailedCell;
  }
  return 0;
}
