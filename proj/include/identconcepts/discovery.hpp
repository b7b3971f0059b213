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

// Concept discovery: given embeddings or encoder Jacobians (any K x L
// attribution matrix that is linear in the encoder works), find a K x K
// matrix M whose rows are concept directions.
//
//   pca / fastica           operate on embedding samples
//   dma_analytical          inverts K pivoted columns of one Jacobian
//   ima_analytical          simultaneously diagonalises two Gram matrices
//   sgd_discover            minimises the arn objective over many Jacobians
//
// The arn objective ‖arn(MJ)·arn(MJ)ᵀ - I‖²_F is zero exactly when the
// rows of MJ are orthogonal (no abs) or have disjoint support (abs).

#ifndef IDENTCONCEPTS_DISCOVERY_HPP
#define IDENTCONCEPTS_DISCOVERY_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "identconcepts/encoder.hpp"
#include "identconcepts/numerics.hpp"
#include "identconcepts/random.hpp"

namespace identconcepts {

struct Diagnostics {
  double final_loss = std::numeric_limits<double>::quiet_NaN();
  std::size_t iterations = 0;
  bool converged = true;
  std::vector<std::string> warnings;

  bool has_warning(std::string_view w) const {
    return std::find(warnings.begin(), warnings.end(), w) != warnings.end();
  }
};

/// Discovered transform; row i is the i-th concept direction.
struct ConceptMatrix {
  Matrix m;
  std::string method;
  Diagnostics diagnostics;
};

inline constexpr std::string_view kWarnNemrDegenerate = "nemr-degenerate";
inline constexpr std::string_view kWarnNotConverged = "not-converged";

enum class OptimizerKind { RMSProp, PlainSGD };
enum class LossKind { Frobenius, Determinant };
enum class InitKind { Identity, SeededRandom };

struct SgdConfig {
  double learning_rate = 1e-3;
  std::size_t epochs = 1;
  std::size_t batch_size = 48;
  OptimizerKind optimizer = OptimizerKind::RMSProp;
  LossKind loss = LossKind::Frobenius;
  InitKind init = InitKind::Identity;
  std::uint64_t seed = 0;
  std::size_t max_steps = 0;  // 0 = no cap beyond epochs
  // Learning rate decays geometrically from learning_rate to
  // final_learning_rate over the planned steps; <= 0 keeps it constant.
  double final_learning_rate = 0.0;
  double rms_decay = 0.9;
  double rms_eps = 1e-8;
  // Optimise W in M = W·P with P = S^(-1/2), S the mean of J·Jᵀ/tr(J·Jᵀ).
  bool precondition = false;

  void validate() const {
    if (!(learning_rate > 0.0)) throw std::invalid_argument("SgdConfig: learning_rate must be > 0");
    if (final_learning_rate > learning_rate) {
      throw std::invalid_argument("SgdConfig: final_learning_rate exceeds learning_rate");
    }
    if (batch_size < 1) throw std::invalid_argument("SgdConfig: batch_size must be >= 1");
  }
};

// ---------------------------------------------------------------------------
// arn operator and losses

/// Element-wise absolute value (optional) followed by L2 row normalisation.
inline Matrix arn(const Matrix& a, bool take_abs) {
  Matrix out = a;
  for (std::size_t i = 0; i < out.rows(); ++i) {
    auto r = out.row(i);
    if (take_abs)
      for (double& v : r) v = std::abs(v);
    const double n = norm2(r);
    if (!(n > 0.0)) throw NumericError("arn: row " + std::to_string(i) + " is zero");
    for (double& v : r) v /= n;
  }
  return out;
}

namespace detail {

constexpr double kAbsSubgradientCutoff = 1e-12;

struct ArnState {
  Matrix a;                   // M·J
  Matrix u;                   // arn(M·J)
  std::vector<double> norms;  // row norms before normalisation
};

inline ArnState arn_state(const Matrix& m, const Matrix& jac, bool take_abs) {
  if (m.cols() != jac.rows()) {
    throw NumericError("loss: M has " + std::to_string(m.cols()) + " columns but J has " +
                       std::to_string(jac.rows()) + " rows");
  }
  ArnState s{m * jac, Matrix{}, std::vector<double>(m.rows())};
  s.u = s.a;
  for (std::size_t i = 0; i < s.u.rows(); ++i) {
    auto r = s.u.row(i);
    if (take_abs)
      for (double& v : r) v = std::abs(v);
    s.norms[i] = norm2(r);
    if (!(s.norms[i] > 0.0)) throw NumericError("arn: row " + std::to_string(i) + " is zero");
    for (double& v : r) v /= s.norms[i];
  }
  return s;
}

// The diagonal of a Gram matrix of unit rows is 1 by construction, so only
// off-diagonal entries are summed.
inline double frobenius_value(const Matrix& gram) {
  double l = 0.0;
  for (std::size_t i = 0; i < gram.rows(); ++i)
    for (std::size_t j = 0; j < gram.cols(); ++j)
      if (i != j) l += gram(i, j) * gram(i, j);
  return l;
}

// Σ log Vᵢᵢ - log det V and, optionally, V⁻¹.
inline double determinant_value(const Matrix& v, Matrix* v_inv) {
  // V = L·diag(d)·Lᵀ with unit-diagonal L; log det V = Σ log dᵢ.
  const std::size_t k = v.rows();
  Matrix l = Matrix::identity(k);
  std::vector<double> d(k);
  double value = 0.0;
  for (std::size_t j = 0; j < k; ++j) {
    d[j] = v(j, j);
    for (std::size_t q = 0; q < j; ++q) d[j] -= l(j, q) * l(j, q) * d[q];
    if (!(d[j] > 0.0)) throw NumericError("loss_det: Gram matrix of the normalised rows is singular");
    for (std::size_t i = j + 1; i < k; ++i) {
      double x = v(i, j);
      for (std::size_t q = 0; q < j; ++q) x -= l(i, q) * l(j, q) * d[q];
      l(i, j) = x / d[j];
    }
    value += std::log(v(j, j) / d[j]);
  }
  if (v_inv) {
    for (std::size_t j = 0; j < k; ++j)
      for (std::size_t i = j; i < k; ++i) l(i, j) *= std::sqrt(d[j]);
    const Matrix li = lower_triangular_inverse(l);
    *v_inv = li.transpose() * li;
  }
  return value;
}

// Back-propagates dL/dU through row normalisation, |.| and M·J.
inline Matrix chain_to_m(const ArnState& s, const Matrix& d_u, const Matrix& jac, bool take_abs) {
  Matrix d_a(s.a.rows(), s.a.cols());
  for (std::size_t i = 0; i < s.u.rows(); ++i) {
    const auto ui = s.u.row(i);
    const auto gi = d_u.row(i);
    const double radial = dot(gi, ui);
    auto out = d_a.row(i);
    for (std::size_t k = 0; k < out.size(); ++k) {
      double g = (gi[k] - radial * ui[k]) / s.norms[i];
      if (take_abs) {
        const double x = s.a(i, k);
        g = std::abs(x) < kAbsSubgradientCutoff ? 0.0 : (x > 0.0 ? g : -g);
      }
      out[k] = g;
    }
  }
  return d_a * jac.transpose();
}

}  // namespace detail

/// ‖arn(MJ)·arn(MJ)ᵀ - I‖²_F.
inline double loss(const Matrix& m, const Matrix& jac, bool take_abs) {
  const auto s = detail::arn_state(m, jac, take_abs);
  return detail::frobenius_value(gram_rows(s.u));
}

/// Hadamard gap Σ log Vᵢᵢ - log det V for V = UUᵀ, U = |MJ| (or MJ).
inline double loss_det(const Matrix& m, const Matrix& jac, bool take_abs) {
  const auto s = detail::arn_state(m, jac, take_abs);
  return detail::determinant_value(gram_rows(s.u), nullptr);
}

struct LossAndGrad {
  double value = 0.0;
  Matrix grad;
};

inline LossAndGrad loss_and_grad(const Matrix& m, const Matrix& jac, bool take_abs,
                                 LossKind kind = LossKind::Frobenius) {
  const auto s = detail::arn_state(m, jac, take_abs);
  const Matrix g = gram_rows(s.u);
  const std::size_t k = g.rows();
  Matrix coeff(k, k);  // dL/dU = coeff · U
  double value = 0.0;
  if (kind == LossKind::Frobenius) {
    value = detail::frobenius_value(g);
    for (std::size_t i = 0; i < k; ++i)
      for (std::size_t j = 0; j < k; ++j) coeff(i, j) = i == j ? 0.0 : 4.0 * g(i, j);
  } else {
    Matrix g_inv;
    value = detail::determinant_value(g, &g_inv);
    for (std::size_t i = 0; i < k; ++i)
      for (std::size_t j = 0; j < k; ++j)
        coeff(i, j) = 2.0 * ((i == j ? 1.0 / g(i, i) : 0.0) - g_inv(i, j));
  }
  return {value, detail::chain_to_m(s, coeff * s.u, jac, take_abs)};
}

/// dL/dM of the Frobenius arn loss.
inline Matrix loss_grad(const Matrix& m, const Matrix& jac, bool take_abs) {
  return loss_and_grad(m, jac, take_abs, LossKind::Frobenius).grad;
}

inline Matrix loss_det_grad(const Matrix& m, const Matrix& jac, bool take_abs) {
  return loss_and_grad(m, jac, take_abs, LossKind::Determinant).grad;
}

inline double mean_loss(const Matrix& m, std::span<const Matrix> jacobians, bool take_abs,
                        LossKind kind = LossKind::Frobenius) {
  if (jacobians.empty()) return 0.0;
  double total = 0.0;
  for (const auto& j : jacobians)
    total += kind == LossKind::Frobenius ? loss(m, j, take_abs) : loss_det(m, j, take_abs);
  return total / static_cast<double>(jacobians.size());
}

// ---------------------------------------------------------------------------
// Embedding-based methods

namespace detail {

inline std::vector<double> column_means(const Matrix& x) {
  std::vector<double> mu(x.cols(), 0.0);
  for (std::size_t r = 0; r < x.rows(); ++r)
    for (std::size_t c = 0; c < x.cols(); ++c) mu[c] += x(r, c);
  for (double& v : mu) v /= static_cast<double>(x.rows());
  return mu;
}

inline Matrix covariance(const Matrix& x) {
  const auto mu = column_means(x);
  Matrix centered = x;
  for (std::size_t r = 0; r < x.rows(); ++r)
    for (std::size_t c = 0; c < x.cols(); ++c) centered(r, c) -= mu[c];
  Matrix cov = gram_cols(centered);
  cov *= 1.0 / static_cast<double>(x.rows() - 1);
  return cov;
}

inline void check_embeddings(const Matrix& e, const char* who) {
  if (e.rows() <= e.cols()) {
    throw std::invalid_argument(std::string(who) + ": need more samples than dimensions");
  }
  if (!e.all_finite()) throw NumericError(std::string(who) + ": non-finite embedding");
}

inline SymEig full_rank_covariance_eig(const Matrix& e, const char* who) {
  auto eig = sym_eig(covariance(e));
  if (!(eig.values.back() > 1e-12 * eig.values.front())) {
    throw NumericError(std::string(who) + ": covariance is rank deficient");
  }
  return eig;
}

// Flips each row so its largest-magnitude entry is positive.
inline void canonical_signs(Matrix& m) {
  for (std::size_t i = 0; i < m.rows(); ++i) {
    auto r = m.row(i);
    const auto it = std::max_element(r.begin(), r.end(),
                                     [](double a, double b) { return std::abs(a) < std::abs(b); });
    if (it != r.end() && *it < 0.0)
      for (double& v : r) v = -v;
  }
}

// (A Aᵀ)^{-1/2} A
inline Matrix symmetric_decorrelation(const Matrix& a) {
  const auto eig = sym_eig(gram_rows(a));
  const std::size_t k = a.rows();
  Matrix inv_sqrt(k, k);
  for (std::size_t q = 0; q < k; ++q) {
    const double f = 1.0 / std::sqrt(eig.values[q]);
    for (std::size_t i = 0; i < k; ++i)
      for (std::size_t j = 0; j < k; ++j)
        inv_sqrt(i, j) += eig.vectors(i, q) * f * eig.vectors(j, q);
  }
  return inv_sqrt * a;
}

}  // namespace detail

/// Rows of M are eigenvectors of the sample covariance, largest
/// eigenvalue first.
inline ConceptMatrix pca(const Matrix& embeddings) {
  detail::check_embeddings(embeddings, "pca");
  const auto eig = detail::full_rank_covariance_eig(embeddings, "pca");
  ConceptMatrix out{eig.vectors.transpose(), "pca", {}};
  detail::canonical_signs(out.m);
  return out;
}

/// Symmetric FastICA with the log-cosh contrast (g = tanh).
inline ConceptMatrix fastica(const Matrix& embeddings, std::size_t max_iter = 200,
                             double tol = 1e-6, std::uint64_t seed = 0) {
  detail::check_embeddings(embeddings, "fastica");
  const std::size_t n = embeddings.rows();
  const std::size_t k = embeddings.cols();
  const auto eig = detail::full_rank_covariance_eig(embeddings, "fastica");

  Matrix whitening = eig.vectors.transpose();
  for (std::size_t i = 0; i < k; ++i) {
    const double f = 1.0 / std::sqrt(eig.values[i]);
    for (double& v : whitening.row(i)) v *= f;
  }
  const auto mu = detail::column_means(embeddings);
  Matrix x(k, n);  // whitened samples as columns
  for (std::size_t s = 0; s < n; ++s)
    for (std::size_t i = 0; i < k; ++i) {
      double v = 0.0;
      for (std::size_t c = 0; c < k; ++c) v += whitening(i, c) * (embeddings(s, c) - mu[c]);
      x(i, s) = v;
    }

  Rng rng(derive_seed(seed, "fastica-init"));
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix w(k, k);
  for (double& v : w.data()) v = normal(rng);
  w = detail::symmetric_decorrelation(w);

  ConceptMatrix out{Matrix{}, "ica", {}};
  out.diagnostics.converged = false;
  const double inv_n = 1.0 / static_cast<double>(n);
  for (std::size_t it = 0; it < max_iter; ++it) {
    const Matrix y = w * x;
    Matrix next(k, k);
    std::vector<double> mean_deriv(k, 0.0);
    for (std::size_t i = 0; i < k; ++i) {
      const auto yi = y.row(i);
      auto ni = next.row(i);
      for (std::size_t s = 0; s < n; ++s) {
        const double g = std::tanh(yi[s]);
        mean_deriv[i] += 1.0 - g * g;
        for (std::size_t c = 0; c < k; ++c) ni[c] += g * x(c, s);
      }
      for (std::size_t c = 0; c < k; ++c) ni[c] = ni[c] * inv_n - mean_deriv[i] * inv_n * w(i, c);
    }
    next = detail::symmetric_decorrelation(next);

    double change = 0.0;
    for (std::size_t i = 0; i < k; ++i)
      change = std::max(change, std::abs(std::abs(dot(next.row(i), w.row(i))) - 1.0));
    w = std::move(next);
    out.diagnostics.iterations = it + 1;
    out.diagnostics.final_loss = change;
    if (change < tol) {
      out.diagnostics.converged = true;
      break;
    }
  }
  if (!out.diagnostics.converged) out.diagnostics.warnings.emplace_back(kWarnNotConverged);
  out.m = w * whitening;
  return out;
}

// ---------------------------------------------------------------------------
// Jacobian-based analytical solutions

/// Inverse of the K x K submatrix formed by K pivoted columns of J.
inline ConceptMatrix dma_analytical(const Matrix& jac) {
  const std::size_t k = jac.rows();
  const auto cols = pivoted_columns(jac, k);
  Matrix reg(k, k);
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t c = 0; c < k; ++c) reg(i, c) = jac(i, cols[c]);
  ConceptMatrix out{inverse(reg), "dma_analytic", {}};
  out.diagnostics.final_loss = loss(out.m, jac, true);
  return out;
}

/// H = Vᵀ·U with U = chol(Σ_a)⁻¹ and V the eigenvectors of U·Σ_b·Uᵀ.
/// H·Σ_a·Hᵀ = I and H·Σ_b·Hᵀ is diagonal.
inline ConceptMatrix ima_analytical(const Matrix& sigma_a, const Matrix& sigma_b,
                                    double degeneracy_tol = 1e-8) {
  if (!sigma_a.square() || sigma_a.rows() != sigma_b.rows() || !sigma_b.square()) {
    throw NumericError("ima_analytical: Gram matrices must be square and of equal size");
  }
  const Matrix u = lower_triangular_inverse(cholesky(sigma_a));
  cholesky(sigma_b);  // rejects a non-SPD second point
  Matrix c = u * sigma_b * u.transpose();
  for (std::size_t i = 0; i < c.rows(); ++i)
    for (std::size_t j = i + 1; j < c.cols(); ++j) c(i, j) = c(j, i) = 0.5 * (c(i, j) + c(j, i));
  const auto eig = sym_eig(c);
  ConceptMatrix out{eig.vectors.transpose() * u, "ima_analytic", {}};
  const double scale = std::abs(eig.values.front());
  for (std::size_t i = 0; i + 1 < eig.values.size(); ++i) {
    if (eig.values[i] - eig.values[i + 1] <= degeneracy_tol * scale) {
      out.diagnostics.warnings.emplace_back(kWarnNemrDegenerate);
      break;
    }
  }
  return out;
}

/// Σ(z) = J_f·J_fᵀ.
inline Matrix jacobian_gram(const Matrix& jac) { return gram_rows(jac); }

// ---------------------------------------------------------------------------
// Stochastic optimisation of the arn objective

inline Matrix initial_concepts(std::size_t k, const SgdConfig& cfg) {
  if (cfg.init == InitKind::Identity) return Matrix::identity(k);
  Rng rng(derive_seed(cfg.seed, "sgd-init"));
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int attempt = 0; attempt < 100; ++attempt) {
    Matrix m(k, k);
    for (double& v : m.data()) v = normal(rng);
    if (condition_number(m) < 1e3) return m;
  }
  throw NumericError("sgd_discover: could not draw a well-conditioned initialisation");
}

inline Matrix jacobian_preconditioner(std::span<const Matrix> jacobians) {
  const std::size_t k = jacobians.front().rows();
  Matrix s(k, k);
  for (const auto& j : jacobians) {
    const Matrix g = gram_rows(j);
    double trace = 0.0;
    for (std::size_t i = 0; i < k; ++i) trace += g(i, i);
    if (!(trace > 0.0)) throw NumericError("jacobian_preconditioner: zero Jacobian");
    s += g * (1.0 / trace);
  }
  s *= 1.0 / static_cast<double>(jacobians.size());
  const auto eig = sym_eig(s);
  if (!(eig.values.back() > 1e-12 * eig.values.front())) {
    throw NumericError("jacobian_preconditioner: Jacobians span fewer than K directions");
  }
  Matrix p(k, k);
  for (std::size_t a = 0; a < k; ++a)
    for (std::size_t b = 0; b < k; ++b)
      for (std::size_t c = 0; c < k; ++c)
        p(a, b) += eig.vectors(a, c) * eig.vectors(b, c) / std::sqrt(eig.values[c]);
  return p;
}

inline ConceptMatrix sgd_discover(std::span<const Matrix> jacobians, const SgdConfig& cfg,
                                  bool take_abs) {
  cfg.validate();
  if (jacobians.empty()) throw std::invalid_argument("sgd_discover: no Jacobians given");
  const std::size_t k = jacobians.front().rows();
  for (const auto& j : jacobians) {
    if (j.rows() != k) throw std::invalid_argument("sgd_discover: inconsistent K across Jacobians");
  }

  Matrix precond = Matrix::identity(k);
  std::vector<Matrix> scaled;
  if (cfg.precondition) {
    precond = jacobian_preconditioner(jacobians);
    scaled.reserve(jacobians.size());
    for (const auto& j : jacobians) scaled.push_back(precond * j);
  }
  const std::span<const Matrix> work =
      cfg.precondition ? std::span<const Matrix>(scaled) : jacobians;

  ConceptMatrix out{initial_concepts(k, cfg), take_abs ? "dma_sgd" : "ima_sgd", {}};
  Matrix& m = out.m;
  Matrix sq_avg(k, k);
  std::vector<std::size_t> order(jacobians.size());
  std::iota(order.begin(), order.end(), 0);
  Rng rng(derive_seed(cfg.seed, "sgd-shuffle"));

  const std::size_t per_epoch = (jacobians.size() + cfg.batch_size - 1) / cfg.batch_size;
  std::size_t planned = cfg.epochs * per_epoch;
  if (cfg.max_steps != 0) planned = std::min(planned, cfg.max_steps);
  const double decay = cfg.final_learning_rate > 0.0 && planned > 1
                           ? std::pow(cfg.final_learning_rate / cfg.learning_rate,
                                      1.0 / static_cast<double>(planned - 1))
                           : 1.0;
  double lr = cfg.learning_rate;

  std::size_t step = 0;
  bool done = cfg.epochs == 0;
  for (std::size_t epoch = 0; epoch < cfg.epochs && !done; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t start = 0; start < order.size() && !done; start += cfg.batch_size) {
      const std::size_t stop = std::min(order.size(), start + cfg.batch_size);
      Matrix grad(k, k);
      double batch_loss = 0.0;
      for (std::size_t b = start; b < stop; ++b) {
        auto lg = loss_and_grad(m, work[order[b]], take_abs, cfg.loss);
        batch_loss += lg.value;
        grad += lg.grad;
      }
      const double inv = 1.0 / static_cast<double>(stop - start);
      batch_loss *= inv;
      grad *= inv;
      if (!std::isfinite(batch_loss) || !grad.all_finite()) {
        throw NumericError("sgd_discover: non-finite loss at step " + std::to_string(step));
      }
      if (cfg.optimizer == OptimizerKind::RMSProp) {
        for (std::size_t q = 0; q < m.size(); ++q) {
          const double g = grad.data()[q];
          double& s = sq_avg.data()[q];
          s = cfg.rms_decay * s + (1.0 - cfg.rms_decay) * g * g;
          m.data()[q] -= lr * g / (std::sqrt(s) + cfg.rms_eps);
        }
      } else {
        for (std::size_t q = 0; q < m.size(); ++q)
          m.data()[q] -= lr * grad.data()[q];
      }
      ++step;
      lr *= decay;
      if (cfg.max_steps != 0 && step >= cfg.max_steps) done = true;
    }
    if (condition_number(m) > 1e8) {
      throw NumericError("sgd_discover: concept matrix lost rank after step " +
                         std::to_string(step));
    }
  }
  if (cfg.precondition) m = m * precond;
  out.diagnostics.iterations = step;
  out.diagnostics.final_loss = mean_loss(m, jacobians, take_abs, cfg.loss);
  return out;
}

inline ConceptMatrix sgd_discover(std::span<const EncoderJacobian> jacobians,
                                  const SgdConfig& cfg, bool take_abs) {
  std::vector<Matrix> mats;
  mats.reserve(jacobians.size());
  for (const auto& j : jacobians) mats.push_back(j.matrix);
  return sgd_discover(std::span<const Matrix>(mats), cfg, take_abs);
}

}  // namespace identconcepts

#endif  // IDENTCONCEPTS_DISCOVERY_HPP
