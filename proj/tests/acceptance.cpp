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


// Acceptance checks. `acceptance <id>` runs one criterion, no argument runs
// all of them. Each prints one PASS/FAIL line; the exit code is nonzero if
// any selected criterion failed.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "identconcepts/identconcepts.hpp"

namespace ic = identconcepts;
using ic::Matrix;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

ic::ExperimentConfig config(const std::string& name) {
  return ic::load_config(std::string(IDENTCONCEPTS_CONFIG_DIR) + "/" + name);
}

struct Stats {
  double mean = 0.0;
  double min = 1e300;
  std::size_t n = 0;
  std::size_t failed = 0;
};

// DCI statistics of rows matching a method (and optionally a noise level or
// correlation parameter).
Stats dci_stats(const std::vector<ic::ResultRow>& rows, const std::string& method,
                std::function<bool(const ic::ResultRow&)> keep = {}) {
  Stats s;
  double sum = 0.0;
  for (const auto& r : rows) {
    if (r.method != method || (keep && !keep(r))) continue;
    if (r.failed() || !r.dci_d) {
      ++s.failed;
      continue;
    }
    sum += *r.dci_d;
    s.min = std::min(s.min, *r.dci_d);
    ++s.n;
  }
  s.mean = s.n ? sum / s.n : 0.0;
  return s;
}

double max_residual(const std::vector<ic::ResultRow>& rows, const std::string& method) {
  double m = 0.0;
  for (const auto& r : rows)
    if (r.method == method) m = std::max(m, r.residual ? *r.residual : 1e300);
  return m;
}

Matrix random_normal(std::size_t r, std::size_t c, ic::Rng& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Matrix m(r, c);
  for (double& v : m.data()) v = n(rng);
  return m;
}

Matrix center_columns(Matrix z) {
  for (std::size_t c = 0; c < z.cols(); ++c) {
    double mu = 0.0;
    for (std::size_t r = 0; r < z.rows(); ++r) mu += z(r, c);
    mu /= static_cast<double>(z.rows());
    for (std::size_t r = 0; r < z.rows(); ++r) z(r, c) -= mu;
  }
  return z;
}

// ---------------------------------------------------------------------------

Outcome criterion1() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto rows = ic::run_experiment(config("fourbars_identifiability.json"));
  const double secs = seconds_since(t0);
  const auto dma = dci_stats(rows, "dma_analytic");
  const auto dsgd = dci_stats(rows, "dma_sgd");
  const auto ima = dci_stats(rows, "ima_analytic");
  const auto isgd = dci_stats(rows, "ima_sgd");
  const double res = max_residual(rows, "dma_analytic");
  const bool ok = dma.failed == 0 && dma.n == 5 && dma.min >= 0.999 && res < 1e-6 &&
                  dsgd.failed == 0 && dsgd.mean >= 0.95 && ima.mean < 0.6 && isgd.mean < 0.6 &&
                  secs < 30.0;
  return {ok, fmt("dma_analytic min DCI %.4f (max residual %.2e), dma_sgd mean %.3f, "
                  "ima_analytic mean %.3f, ima_sgd mean %.3f, %.1f s",
                  dma.min, res, dsgd.mean, ima.mean, isgd.mean, secs)};
}

Outcome criterion2() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto rows = ic::run_experiment(config("colorbar_identifiability.json"));
  const double secs = seconds_since(t0);
  const auto ima = dci_stats(rows, "ima_analytic");
  const auto dma = dci_stats(rows, "dma_analytic");
  const auto dsgd = dci_stats(rows, "dma_sgd");
  const bool ok = ima.failed == 0 && ima.n == 5 && ima.min >= 0.999 &&
                  dma.mean < 0.6 && dsgd.mean < 0.6 && secs < 30.0;
  return {ok, fmt("ima_analytic min DCI %.4f, dma_analytic mean %.3f, dma_sgd mean %.3f, %.1f s",
                  ima.min, dma.mean, dsgd.mean, secs)};
}

Outcome criterion3() {
  constexpr std::size_t k = 4, n = 2000;
  double worst = 0.0;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    ic::Rng rng(seed);
    // Components decorrelated in-sample, then given variances 4, 3, 2, 1.
    Matrix z = center_columns(random_normal(n, k, rng));
    const auto eig = ic::sym_eig(z.transpose() * z * (1.0 / (n - 1)));
    Matrix w(k, k);
    for (std::size_t a = 0; a < k; ++a)
      for (std::size_t b = 0; b < k; ++b)
        for (std::size_t q = 0; q < k; ++q)
          w(a, b) += eig.vectors(a, q) * eig.vectors(b, q) / std::sqrt(eig.values[q]);
    z = z * w;
    for (std::size_t r = 0; r < n; ++r)
      for (std::size_t c = 0; c < k; ++c) z(r, c) *= std::sqrt(static_cast<double>(k - c));
    const Matrix sym = random_normal(k, k, rng);
    const Matrix d = ic::sym_eig(sym + sym.transpose()).vectors;
    const Matrix e = z * d.transpose();
    worst = std::max(worst, ic::decompose_ps(ic::pca(e).m * d).residual);
  }
  return {worst < 1e-6, fmt("max PCA residual over 5 seeds %.2e", worst)};
}

Outcome criterion4() {
  constexpr std::size_t n = 10000, k = 4;
  std::size_t good = 0;
  double lowest = 1.0;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    ic::Rng rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Matrix z(n, k);
    for (double& v : z.data()) v = u(rng);
    const Matrix d = ic::sample_mixing(k, ic::derive_seed(seed, "mixing")).d;
    const Matrix e = z * d.transpose();
    const auto c = ic::fastica(e, 200, 1e-6, seed);
    const auto corr = ic::matched_correlations(z, e * c.m.transpose());
    const double m = *std::min_element(corr.begin(), corr.end());
    lowest = std::min(lowest, m);
    if (m > 0.99) ++good;
  }
  ic::Rng rng(99);
  const Matrix g = random_normal(n, k, rng);
  const auto control = ic::fastica(g * ic::sample_mixing(k, 99).d.transpose(), 200, 1e-6, 99);
  const bool completed = control.m.all_finite();
  return {good >= 4 && completed,
          fmt("%zu/5 seeds with all matched correlations > 0.99 (lowest %.4f), "
              "gaussian control %s",
              good, lowest, completed ? "completed" : "did not complete")};
}

Outcome criterion5() {
  const auto rows = ic::run_experiment(config("correlation_sweep.json"));
  auto at = [](double p) {
    return [p](const ic::ResultRow& r) { return r.correlation_param && *r.correlation_param == p; };
  };
  const auto dma = dci_stats(rows, "dma_analytic", at(0.9));
  const auto ica0 = dci_stats(rows, "ica", at(0.0));
  const auto ica9 = dci_stats(rows, "ica", at(0.9));
  const bool ok = dma.n == 5 && dma.min >= 0.95 && ica0.n == 5 && ica9.n == 5 &&
                  ica0.mean - ica9.mean >= 0.1;
  return {ok, fmt("rho 0.9: dma_analytic min DCI %.4f; ica mean DCI %.3f at rho 0 -> %.3f at rho 0.9",
                  dma.min, ica0.mean, ica9.mean)};
}

std::vector<ic::ResultRow> noise_rows(double* secs) {
  const auto t0 = std::chrono::steady_clock::now();
  auto rows = ic::run_experiment(config("noise_sweep.json"));
  *secs = seconds_since(t0);
  return rows;
}

Outcome criterion6a() {
  double secs = 0.0;
  const auto rows = noise_rows(&secs);
  auto clean = [](const ic::ResultRow& r) { return r.noise_sigma == 0.0; };
  const auto dma = dci_stats(rows, "dma_sgd", clean);
  const auto ima = dci_stats(rows, "ima_sgd", clean);
  const bool ok = dma.n == 5 && ima.n == 5 && dma.mean > 0.9 && ima.mean > 0.9 && secs < 300.0;
  return {ok, fmt("noise 0: dma_sgd mean DCI %.3f, ima_sgd mean DCI %.3f; sweep took %.1f s",
                  dma.mean, ima.mean, secs)};
}

Outcome criterion6b() {
  double secs = 0.0;
  const auto rows = noise_rows(&secs);
  const auto cfg = config("noise_sweep.json");
  bool ok = true;
  std::string detail;
  for (double level : cfg.noise_levels) {
    auto at = [level](const ic::ResultRow& r) { return r.noise_sigma == level; };
    const auto dma = dci_stats(rows, "dma_sgd", at);
    const auto ima = dci_stats(rows, "ima_sgd", at);
    ok = ok && dma.n == 5 && ima.n == 5 && dma.mean >= ima.mean;
    detail += fmt("%s%g: dma %.3f vs ima %.3f", detail.empty() ? "" : "; ", level, dma.mean,
                  ima.mean);
  }
  return {ok, "mean DCI(DMA) >= mean DCI(IMA) at every noise level: " + detail};
}

Outcome criterion7() {
  double worst = 0.0;
  for (auto kind : {ic::LossKind::Frobenius, ic::LossKind::Determinant})
    for (bool abs : {true, false})
      for (std::uint64_t seed = 0; seed < 3; ++seed)
        worst = std::max(worst, ic::gradient_check(kind, abs, seed, 20).max_relative_error);
  return {worst < 1e-5, fmt("max relative error %.2e over 4 variants x 3 seeds x 20 instances",
                            worst)};
}

ic::ComponentVector interior_point(std::size_t k, ic::Rng& rng) {
  std::uniform_real_distribution<double> u(0.1, 0.9);
  ic::ComponentVector z;
  for (std::size_t i = 0; i < k; ++i) z.values.push_back(u(rng));
  return z;
}

Outcome criterion8() {
  ic::Rng rng(8);
  std::vector<std::string> broken;
  auto check = [&](bool ok, const std::string& what) {
    if (!ok) broken.push_back(what);
  };

  // Loss invariances.
  std::uniform_int_distribution<int> expo(-5, 5);
  for (int t = 0; t < 20; ++t) {
    const Matrix m = random_normal(4, 4, rng);
    const Matrix j = random_normal(4, 12, rng);
    std::vector<double> s(4);
    for (double& v : s) v = std::ldexp(t % 2 ? -1.0 : 1.0, expo(rng));
    std::vector<std::size_t> perm(4);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    Matrix p(4, 4);
    for (std::size_t i = 0; i < 4; ++i) p(i, perm[i]) = 1.0;
    for (bool abs : {true, false}) {
      const double l = ic::loss(m, j, abs);
      check(ic::loss(ic::Matrix::diagonal(s) * m, j, abs) == l, "loss scale invariance");
      check(std::abs(ic::loss(p * m, j, abs) - l) <= 4e-16 * (1.0 + l),
            "loss permutation equivariance");
    }
    const Matrix u = ic::arn(m * j, true);
    for (std::size_t i = 0; i < 4; ++i)
      check(std::abs(ic::norm2(u.row(i)) - 1.0) <= 1e-12, "arn unit rows");
  }

  for (auto kind : {ic::GeneratorKind::FourBars, ic::GeneratorKind::FourBarsNemr,
                    ic::GeneratorKind::ColorBar}) {
    ic::GeneratorSpec g;
    g.kind = kind;
    const std::size_t k = g.num_components();
    const ic::FaithfulEncoderOracle o{g, ic::sample_mixing(k, 11), 0.0, 11};
    const Matrix dinv = ic::inverse(o.mixing.d);
    const std::string name(ic::to_string(kind));
    for (int t = 0; t < 10; ++t) {
      const auto z = interior_point(k, rng);
      const Matrix jf = ic::encoder_jacobian(o, z).matrix;
      const Matrix jg = ic::jacobian(g, z).matrix;
      // Transfer Lemma: rows of D⁻¹J_f are proportional to columns of J_g.
      const Matrix rows = dinv * jf;
      for (std::size_t c = 0; c < k; ++c) {
        const auto col = jg.col(c);
        const double cosine =
            std::abs(ic::dot(rows.row(c), col)) / (ic::norm2(rows.row(c)) * ic::norm2(col));
        check(cosine > 1.0 - 1e-8, name + " transfer lemma");
      }
      // Kernel: J_f annihilates anything orthogonal to span(J_g).
      std::vector<std::vector<double>> basis;
      for (std::size_t c = 0; c < k; ++c) {
        auto v = jg.col(c);
        for (const auto& b : basis) {
          const double p = ic::dot(v, b);
          for (std::size_t i = 0; i < v.size(); ++i) v[i] -= p * b[i];
        }
        const double nv = ic::norm2(v);
        for (double& x : v) x /= nv;
        basis.push_back(std::move(v));
      }
      std::normal_distribution<double> normal(0.0, 1.0);
      std::vector<double> v(jg.rows());
      for (double& x : v) x = normal(rng);
      for (int pass = 0; pass < 2; ++pass)
        for (const auto& b : basis) {
          const double p = ic::dot(v, b);
          for (std::size_t i = 0; i < v.size(); ++i) v[i] -= p * b[i];
        }
      check(ic::norm2(jf * std::span<const double>(v)) <=
                1e-8 * ic::frobenius_norm(jf) * ic::norm2(v),
            name + " kernel invariance");
      // Mechanisms: FourBars variants are DMA (hence IMA), ColorBar is IMA only.
      const auto mech = ic::check_mechanism(g, z);
      check(mech.ima_holds, name + " IMA mechanism");
      check(mech.dma_holds == (kind != ic::GeneratorKind::ColorBar), name + " DMA mechanism");
    }
  }

  for (std::size_t k = 2; k <= 6; ++k) {
    for (int t = 0; t < 10; ++t) {
      std::vector<std::size_t> perm(k);
      std::iota(perm.begin(), perm.end(), 0);
      std::shuffle(perm.begin(), perm.end(), rng);
      std::uniform_real_distribution<double> mag(0.2, 5.0);
      Matrix ps(k, k);
      for (std::size_t i = 0; i < k; ++i) ps(i, perm[i]) = (t % 2 ? -1.0 : 1.0) * mag(rng);
      const auto dci = ic::dci_from_matrix(ps);
      check(std::abs(dci.disentanglement - 1.0) < 1e-12 && std::abs(dci.completeness - 1.0) < 1e-12,
            "dci of P·S");
      const auto rec = ic::decompose_ps(ps);
      check(rec.residual == 0.0 && rec.permutation == perm, "decompose_ps on P·S");

      std::uniform_real_distribution<double> u(0.0, 1.0);
      Matrix score(k, k);
      for (double& v : score.data()) v = u(rng);
      const auto got = ic::best_assignment(score);
      double got_sum = 0.0;
      for (std::size_t i = 0; i < k; ++i) got_sum += score(i, got[i]);
      std::vector<std::size_t> p(k);
      std::iota(p.begin(), p.end(), 0);
      double best = -1.0;
      do {
        double s = 0.0;
        for (std::size_t i = 0; i < k; ++i) s += score(i, p[i]);
        best = std::max(best, s);
      } while (std::next_permutation(p.begin(), p.end()));
      check(std::abs(got_sum - best) < 1e-12, "best_assignment vs brute force");
    }
  }

  std::sort(broken.begin(), broken.end());
  broken.erase(std::unique(broken.begin(), broken.end()), broken.end());
  std::string detail = broken.empty() ? "all invariants hold" : "violated:";
  for (const auto& b : broken) detail += " [" + b + "]";
  return {broken.empty(), detail};
}

Outcome criterion9() {
  auto cfg = config("fourbars_identifiability.json");
  auto csv = [](const std::vector<ic::ResultRow>& rows) {
    std::string s = ic::result_csv_header() + "\n";
    for (const auto& r : rows) s += ic::result_csv_row(r, false) + "\n";
    return s;
  };
  const std::string a = csv(ic::run_experiment(cfg, 1));
  const std::string b = csv(ic::run_experiment(cfg, 1));
  const std::string c = csv(ic::run_experiment(cfg, 2));
  return {a == b && a == c,
          fmt("%zu-byte CSV (timing column blanked) %s across repeated and 2-job runs", a.size(),
              a == b && a == c ? "identical" : "differs")};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"1", criterion1},   {"2", criterion2},   {"3", criterion3}, {"4", criterion4},
      {"5", criterion5},   {"6a", criterion6a}, {"6b", criterion6b}, {"7", criterion7},
      {"8", criterion8},   {"9", criterion9},
  };
  std::vector<std::string> selected(argv + 1, argv + argc);
  int failures = 0;
  bool matched = selected.empty();
  for (const auto& [id, fn] : criteria) {
    if (!selected.empty() && std::find(selected.begin(), selected.end(), id) == selected.end())
      continue;
    matched = true;
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::printf("%s criterion %s: %s\n", o.pass ? "PASS" : "FAIL", id.c_str(), o.detail.c_str());
    std::fflush(stdout);
    if (!o.pass) ++failures;
  }
  if (!matched) {
    std::fprintf(stderr, "unknown criterion\n");
    return 1;
  }
  return failures == 0 ? 0 : 1;
}
