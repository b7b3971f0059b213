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

#ifndef IDENTCONCEPTS_ENCODER_HPP
#define IDENTCONCEPTS_ENCODER_HPP

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "identconcepts/generators.hpp"
#include "identconcepts/numerics.hpp"
#include "identconcepts/random.hpp"

namespace identconcepts {

/// Full-rank mixing D with e = D·z.
struct MixingMatrix {
  Matrix d;
  std::uint64_t seed = 0;
  double condition_number = 1.0;

  static MixingMatrix identity(std::size_t k) { return {Matrix::identity(k), 0, 1.0}; }
};

/// Uniform[-1, 1] entries, redrawn until cond(D) <= max_condition.
inline MixingMatrix sample_mixing(std::size_t k, std::uint64_t seed,
                                  double max_condition = 20.0) {
  if (k < 2) throw std::invalid_argument("sample_mixing: need at least 2 components");
  Rng rng(seed);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  constexpr int kMaxRejections = 1000;
  for (int attempt = 0; attempt < kMaxRejections; ++attempt) {
    Matrix d(k, k);
    for (double& v : d.data()) v = unif(rng);
    const double cond = condition_number(d);
    if (cond <= max_condition) return {std::move(d), seed, cond};
  }
  throw NumericError("sample_mixing: " + std::to_string(kMaxRejections) +
                     " consecutive draws exceeded condition number " +
                     std::to_string(max_condition));
}

struct EncoderJacobian {
  Matrix matrix;  // K x L
  ComponentVector at;
};

/// Analytic faithful encoder for a generator: f(g(z)) = D·z with Jacobian
/// D·J_g(z)⁺, optionally perturbed by i.i.d. Gaussian noise.
struct FaithfulEncoderOracle {
  GeneratorSpec generator;
  MixingMatrix mixing;
  double noise_sigma = 0.0;
  std::uint64_t seed = 0;
};

inline std::vector<double> embed(const FaithfulEncoderOracle& oracle, const ComponentVector& z) {
  if (!z.in_domain()) throw std::invalid_argument("embed: component vector outside its domain");
  return oracle.mixing.d * std::span<const double>(z.values);
}

/// D·pinv(J_g(z)) plus noise. The noise draw depends only on (seed, z),
/// so repeated calls at the same point agree bit for bit.
inline EncoderJacobian encoder_jacobian(const FaithfulEncoderOracle& oracle,
                                        const ComponentVector& z) {
  const auto jg = jacobian(oracle.generator, z);
  EncoderJacobian out{oracle.mixing.d * pinv(jg.matrix), z};
  if (oracle.noise_sigma > 0.0) {
    Rng rng(hash_values(derive_seed(oracle.seed, "encoder-noise"), z.values));
    std::normal_distribution<double> noise(0.0, oracle.noise_sigma * max_abs(out.matrix));
    for (double& v : out.matrix.data()) v += noise(rng);
  } else if (oracle.noise_sigma < 0.0) {
    throw std::invalid_argument("encoder_jacobian: noise_sigma must be non-negative");
  }
  return out;
}

}  // namespace identconcepts

#endif  // IDENTCONCEPTS_ENCODER_HPP
