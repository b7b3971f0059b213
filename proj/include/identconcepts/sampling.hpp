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

#ifndef IDENTCONCEPTS_SAMPLING_HPP
#define IDENTCONCEPTS_SAMPLING_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "identconcepts/generators.hpp"
#include "identconcepts/numerics.hpp"
#include "identconcepts/random.hpp"

namespace identconcepts {

using IndexPair = std::pair<std::size_t, std::size_t>;

enum class DistributionKind {
  IndependentUniform,
  IndependentNonGaussian,
  CorrelatedLine,
  CorrelatedGaussian,
};

enum class NonGaussianShape { Uniform, Laplace };

struct ComponentDistribution {
  DistributionKind kind = DistributionKind::IndependentUniform;
  std::size_t k = 4;
  std::size_t oversample_factor = 4;
  Interval domain{};

  NonGaussianShape shape = NonGaussianShape::Uniform;

  // CorrelatedLine: density ∝ exp(-(z_i - α z_j)² / (2 (s·width)²)).
  std::size_t i = 0;
  std::size_t j = 1;
  double s = 0.1;

  // CorrelatedGaussian
  double rho = 0.7;
  std::vector<IndexPair> pair_order{{0, 1}};
  double eig_floor = 0.2;

  void validate() const {
    if (k < 1) throw std::invalid_argument("ComponentDistribution: k must be positive");
    if (oversample_factor < 3 || oversample_factor > 6) {
      throw std::invalid_argument("ComponentDistribution: oversample_factor must lie in [3, 6]");
    }
    if (kind == DistributionKind::CorrelatedLine) {
      if (!(s > 0.0)) throw std::invalid_argument("CorrelatedLine: s must be positive");
      if (i == j || i >= k || j >= k) {
        throw std::invalid_argument("CorrelatedLine: need two distinct component indices < k");
      }
    }
    if (kind == DistributionKind::CorrelatedGaussian) {
      if (!(rho >= 0.0 && rho < 1.0)) {
        throw std::invalid_argument("CorrelatedGaussian: rho must lie in [0, 1)");
      }
      if (!(eig_floor > 0.0)) {
        throw std::invalid_argument("CorrelatedGaussian: eig_floor must be positive");
      }
    }
  }
};

/// Fill order of the fifteen off-diagonal pairs of a six-component
/// correlation matrix, used when correlations are added one at a time.
inline std::vector<IndexPair> six_component_pair_schedule(std::size_t count = 15) {
  static const std::vector<IndexPair> kOrder = {
      {0, 1}, {4, 5}, {2, 3}, {0, 2}, {1, 3}, {1, 5}, {3, 5}, {2, 4},
      {0, 5}, {1, 4}, {1, 2}, {0, 3}, {3, 4}, {0, 4}, {2, 5},
  };
  if (count > kOrder.size()) throw std::invalid_argument("pair schedule has 15 entries");
  return {kOrder.begin(), kOrder.begin() + static_cast<std::ptrdiff_t>(count)};
}

struct CorrelationMatrix {
  Matrix gamma;
  double achieved_rho = 0.0;
};

/// Unit-diagonal Γ with the listed pairs set to ρ', where ρ' is the first
/// value of ρ·0.9^m whose Γ has smallest eigenvalue >= eig_floor (up to
/// 1e-12, so that ρ = 1 - eig_floor is kept for a single pair).
inline CorrelationMatrix build_correlation_matrix(std::size_t k, double rho,
                                                  const std::vector<IndexPair>& pairs,
                                                  double eig_floor = 0.2) {
  std::set<IndexPair> seen;
  for (auto [a, b] : pairs) {
    if (a >= k || b >= k || a == b) {
      throw std::invalid_argument("build_correlation_matrix: invalid pair (" +
                                  std::to_string(a) + ", " + std::to_string(b) + ")");
    }
    if (!seen.insert({std::min(a, b), std::max(a, b)}).second) {
      throw std::invalid_argument("build_correlation_matrix: duplicate pair");
    }
  }
  auto fill = [&](double r) {
    Matrix g = Matrix::identity(k);
    for (auto [a, b] : pairs) g(a, b) = g(b, a) = r;
    return g;
  };
  double current = rho;
  while (true) {
    Matrix g = fill(current);
    if (pairs.empty() || current == 0.0 || sym_eig(g).values.back() >= eig_floor - 1e-12) {
      return {std::move(g), pairs.empty() ? 0.0 : current};
    }
    current *= 0.9;
    if (current < 1e-3) {
      throw NumericError("build_correlation_matrix: correlation shrank below 1e-3 before "
                         "the smallest eigenvalue reached " + std::to_string(eig_floor));
    }
  }
}

struct SampleBatch {
  Matrix z;  // N x K
  bool weights_applied = false;
  std::uint64_t seed = 0;
  // Row r of z equals candidate source_indices[r] when weights were applied.
  std::vector<std::size_t> source_indices;
  double achieved_rho = 0.0;

  ComponentVector row(std::size_t r, Interval domain = {}) const {
    const auto v = z.row(r);
    return {std::vector<double>(v.begin(), v.end()), domain};
  }
};

namespace detail {

inline Matrix uniform_candidates(const ComponentDistribution& dist, std::size_t n, Rng& rng) {
  std::uniform_real_distribution<double> unif(dist.domain.lo, dist.domain.hi);
  Matrix z(n, dist.k);
  for (double& v : z.data()) v = unif(rng);
  return z;
}

}  // namespace detail

/// Candidate pool used by the proportional-resampling sampler; exposed so
/// callers can check that resampled rows come from it.
inline Matrix line_candidates(const ComponentDistribution& dist, std::size_t n,
                              std::uint64_t seed) {
  Rng rng(derive_seed(seed, "line-candidates"));
  return detail::uniform_candidates(dist, dist.oversample_factor * n, rng);
}

inline SampleBatch sample(const ComponentDistribution& dist, std::size_t n, std::uint64_t seed) {
  dist.validate();
  if (n < 1) throw std::invalid_argument("sample: n must be at least 1");
  SampleBatch batch;
  batch.seed = seed;
  Rng rng(derive_seed(seed, "sample"));

  switch (dist.kind) {
    case DistributionKind::IndependentUniform:
      batch.z = detail::uniform_candidates(dist, n, rng);
      break;

    case DistributionKind::IndependentNonGaussian: {
      if (dist.shape == NonGaussianShape::Uniform) {
        batch.z = detail::uniform_candidates(dist, n, rng);
        break;
      }
      // Laplace centred in the domain, redrawn when it leaves the domain.
      const double mid = 0.5 * (dist.domain.lo + dist.domain.hi);
      const double scale = dist.domain.width() / 8.0;
      std::exponential_distribution<double> expo(1.0);
      std::bernoulli_distribution sign(0.5);
      batch.z = Matrix(n, dist.k);
      for (double& v : batch.z.data()) {
        do {
          v = mid + (sign(rng) ? 1.0 : -1.0) * scale * expo(rng);
        } while (!dist.domain.contains(v));
      }
      break;
    }

    case DistributionKind::CorrelatedLine: {
      const Matrix cand = line_candidates(dist, n, seed);
      const double alpha = dist.domain.hi / dist.domain.hi;  // z_i^max / z_j^max
      const double s_eff = dist.s * dist.domain.width();
      std::vector<double> w(cand.rows());
      double total = 0.0;
      for (std::size_t r = 0; r < cand.rows(); ++r) {
        const double d = cand(r, dist.i) - alpha * cand(r, dist.j);
        w[r] = std::exp(-d * d / (2.0 * s_eff * s_eff));
        total += w[r];
      }
      if (!(total > 0.0)) {
        throw NumericError("sample: all resampling weights are zero; increase "
                           "oversample_factor or s");
      }
      std::discrete_distribution<std::size_t> pick(w.begin(), w.end());
      batch.z = Matrix(n, dist.k);
      batch.source_indices.resize(n);
      for (std::size_t r = 0; r < n; ++r) {
        const std::size_t src = pick(rng);
        batch.source_indices[r] = src;
        std::copy(cand.row(src).begin(), cand.row(src).end(), batch.z.row(r).begin());
      }
      batch.weights_applied = true;
      break;
    }

    case DistributionKind::CorrelatedGaussian: {
      const auto corr = build_correlation_matrix(dist.k, dist.rho, dist.pair_order, dist.eig_floor);
      batch.achieved_rho = corr.achieved_rho;
      const double mid = 0.5 * (dist.domain.lo + dist.domain.hi);
      const double sigma = dist.domain.width() / 5.0;  // domain spans +-2.5 sigma
      const Matrix chol = cholesky(corr.gamma * (sigma * sigma));
      std::normal_distribution<double> normal(0.0, 1.0);
      batch.z = Matrix(n, dist.k);
      std::vector<double> g(dist.k);
      const std::size_t max_draws = 1000 * n;
      std::size_t draws = 0;
      for (std::size_t r = 0; r < n; ++r) {
        bool inside = false;
        while (!inside) {
          if (++draws > max_draws) {
            throw NumericError("sample: Gaussian rejection rate too high");
          }
          for (double& v : g) v = normal(rng);
          inside = true;
          for (std::size_t c = 0; c < dist.k; ++c) {
            double v = mid;
            for (std::size_t q = 0; q <= c; ++q) v += chol(c, q) * g[q];
            batch.z(r, c) = v;
            inside = inside && dist.domain.contains(v);
          }
        }
      }
      break;
    }
  }
  return batch;
}

}  // namespace identconcepts

#endif  // IDENTCONCEPTS_SAMPLING_HPP
