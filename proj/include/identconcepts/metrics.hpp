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

#ifndef IDENTCONCEPTS_METRICS_HPP
#define IDENTCONCEPTS_METRICS_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "identconcepts/numerics.hpp"

namespace identconcepts {

/// a ≈ P·S: row i of a is matched to ground-truth component permutation[i]
/// with signed scale scales[i].
struct RecoveryReport {
  std::vector<std::size_t> permutation;
  std::vector<double> scales;
  double residual = 0.0;  // ‖a - P·S‖_F / ‖a‖_F
  std::vector<double> matched_correlations;
};

struct DciReport {
  double disentanglement = 0.0;
  double completeness = 0.0;
  double informativeness = 0.0;
  // Rows are discovered codes, columns ground-truth factors; each column
  // sums to one (or is zero for a factor nothing predicts).
  Matrix importance;
  std::vector<std::string> warnings;
};

inline RecoveryReport decompose_ps(const Matrix& a) {
  if (!a.square()) throw NumericError("decompose_ps: matrix must be square");
  if (!a.all_finite()) throw NumericError("decompose_ps: non-finite entry");
  const std::size_t k = a.rows();
  Matrix score(k, k);
  std::vector<double> row_norm(k);
  for (std::size_t i = 0; i < k; ++i) {
    row_norm[i] = norm2(a.row(i));
    for (std::size_t j = 0; j < k; ++j)
      score(i, j) = row_norm[i] > 0.0 ? std::abs(a(i, j)) / row_norm[i] : 0.0;
  }
  RecoveryReport out;
  out.permutation = best_assignment(score);
  Matrix diff = a;
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t j = out.permutation[i];
    out.scales.push_back(a(i, j));
    out.matched_correlations.push_back(score(i, j));
    diff(i, j) = 0.0;
  }
  const double total = frobenius_norm(a);
  out.residual = total > 0.0 ? frobenius_norm(diff) / total : 0.0;
  return out;
}

namespace detail {

// Entropy of a probability vector in base `base` (0 when base <= 1).
inline double entropy(const std::vector<double>& p, std::size_t base) {
  if (base <= 1) return 0.0;
  double h = 0.0;
  for (double v : p)
    if (v > 0.0) h -= v * std::log(v);
  return h / std::log(static_cast<double>(base));
}

/// Entropy aggregation over an importance matrix (rows codes, columns
/// factors) after normalising every factor column to unit mass.
inline DciReport aggregate_importance(Matrix r, double informativeness) {
  const std::size_t codes = r.rows();
  const std::size_t factors = r.cols();
  for (std::size_t j = 0; j < factors; ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < codes; ++i) s += r(i, j);
    if (s > 0.0)
      for (std::size_t i = 0; i < codes; ++i) r(i, j) /= s;
  }
  double total = 0.0;
  for (double v : r.data()) total += v;

  DciReport out;
  out.informativeness = informativeness;
  if (total > 0.0) {
    for (std::size_t i = 0; i < codes; ++i) {
      double mass = 0.0;
      for (std::size_t j = 0; j < factors; ++j) mass += r(i, j);
      if (mass <= 0.0) continue;
      std::vector<double> p(factors);
      for (std::size_t j = 0; j < factors; ++j) p[j] = r(i, j) / mass;
      out.disentanglement += (mass / total) * (1.0 - entropy(p, factors));
    }
    for (std::size_t j = 0; j < factors; ++j) {
      double mass = 0.0;
      for (std::size_t i = 0; i < codes; ++i) mass += r(i, j);
      if (mass <= 0.0) continue;
      std::vector<double> p(codes);
      for (std::size_t i = 0; i < codes; ++i) p[i] = r(i, j) / mass;
      out.completeness += (mass / total) * (1.0 - entropy(p, codes));
    }
  }
  out.disentanglement = std::clamp(out.disentanglement, 0.0, 1.0);
  out.completeness = std::clamp(out.completeness, 0.0, 1.0);
  out.importance = std::move(r);
  return out;
}

inline Matrix standardize_columns(const Matrix& x, std::vector<bool>* constant) {
  Matrix out = x;
  const double n = static_cast<double>(x.rows());
  if (constant) constant->assign(x.cols(), false);
  for (std::size_t c = 0; c < x.cols(); ++c) {
    double mu = 0.0;
    for (std::size_t r = 0; r < x.rows(); ++r) mu += x(r, c);
    mu /= n;
    double var = 0.0;
    for (std::size_t r = 0; r < x.rows(); ++r) var += (x(r, c) - mu) * (x(r, c) - mu);
    const double sd = std::sqrt(var / n);
    const bool flat = !(sd > 1e-12 * std::max(1.0, std::abs(mu)));
    if (constant) (*constant)[c] = flat;
    for (std::size_t r = 0; r < x.rows(); ++r) out(r, c) = flat ? 0.0 : (x(r, c) - mu) / sd;
  }
  return out;
}

// Coordinate descent for (1/2N)‖y - Xβ‖² + α‖β‖₁ on standardised X.
inline std::vector<double> lasso(const Matrix& x, const std::vector<double>& y, double alpha,
                                 const std::vector<bool>& skip) {
  const std::size_t n = x.rows();
  const std::size_t p = x.cols();
  std::vector<double> beta(p, 0.0);
  std::vector<double> resid = y;
  std::vector<double> col_sq(p, 0.0);
  for (std::size_t c = 0; c < p; ++c)
    for (std::size_t r = 0; r < n; ++r) col_sq[c] += x(r, c) * x(r, c);
  const double inv_n = 1.0 / static_cast<double>(n);
  for (int sweep = 0; sweep < 10000; ++sweep) {
    double max_delta = 0.0;
    for (std::size_t c = 0; c < p; ++c) {
      if (skip[c] || col_sq[c] == 0.0) continue;
      double rho = 0.0;
      for (std::size_t r = 0; r < n; ++r) rho += x(r, c) * (resid[r] + x(r, c) * beta[c]);
      rho *= inv_n;
      const double z = col_sq[c] * inv_n;
      const double next = std::copysign(std::max(std::abs(rho) - alpha, 0.0), rho) / z;
      const double delta = next - beta[c];
      if (delta != 0.0) {
        for (std::size_t r = 0; r < n; ++r) resid[r] -= x(r, c) * delta;
        beta[c] = next;
      }
      max_delta = std::max(max_delta, std::abs(delta));
    }
    if (max_delta < 1e-10) break;
  }
  return beta;
}

}  // namespace detail

/// DCI for an exactly linear, invertible code map a (codes = a·z).
///
/// Importance of code i for factor j is the standardised coefficient of
/// code i when regressing z_j on all codes, |(ã⁻¹)_{ji}| with ã the
/// row-normalised a; informativeness is 1 for an invertible map.
inline DciReport dci_from_matrix(const Matrix& a) {
  if (!a.square()) throw NumericError("dci_from_matrix: matrix must be square");
  if (!a.all_finite()) throw NumericError("dci_from_matrix: non-finite entry");
  const std::size_t k = a.rows();
  Matrix normalized = a;
  for (std::size_t i = 0; i < k; ++i) {
    const double n = norm2(a.row(i));
    if (!(n > 0.0)) throw NumericError("dci_from_matrix: row " + std::to_string(i) + " is zero");
    for (double& v : normalized.row(i)) v /= n;
  }
  for (std::size_t j = 0; j < k; ++j) {
    bool nonzero = false;
    for (std::size_t i = 0; i < k; ++i) nonzero = nonzero || a(i, j) != 0.0;
    if (!nonzero) throw NumericError("dci_from_matrix: column " + std::to_string(j) + " is zero");
  }
  const Matrix inv = inverse(normalized);
  Matrix r(k, k);
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < k; ++j) r(i, j) = std::abs(inv(j, i));
  return detail::aggregate_importance(std::move(r), 1.0);
}

/// DCI from paired samples via L1-regularised linear regression of each
/// true factor on all (standardised) predicted codes.
inline DciReport dci_from_samples(const Matrix& z_true, const Matrix& z_pred,
                                  double regressor_strength = 1e-3) {
  if (z_true.rows() != z_pred.rows()) throw NumericError("dci_from_samples: row count mismatch");
  if (z_true.rows() <= 10 * z_true.cols()) {
    throw std::invalid_argument("dci_from_samples: need more than 10*K samples");
  }
  std::vector<bool> constant_code;
  const Matrix x = detail::standardize_columns(z_pred, &constant_code);
  std::vector<bool> constant_factor;
  const Matrix y = detail::standardize_columns(z_true, &constant_factor);

  const std::size_t n = x.rows();
  Matrix r(z_pred.cols(), z_true.cols());
  double r2_sum = 0.0;
  for (std::size_t j = 0; j < z_true.cols(); ++j) {
    const std::vector<double> target = y.col(j);
    const auto beta = detail::lasso(x, target, regressor_strength, constant_code);
    double sse = 0.0;
    double sst = 0.0;
    for (std::size_t s = 0; s < n; ++s) {
      double pred = 0.0;
      for (std::size_t i = 0; i < x.cols(); ++i) pred += x(s, i) * beta[i];
      sse += (target[s] - pred) * (target[s] - pred);
      sst += target[s] * target[s];
    }
    r2_sum += sst > 0.0 ? std::clamp(1.0 - sse / sst, 0.0, 1.0) : 0.0;
    for (std::size_t i = 0; i < x.cols(); ++i) r(i, j) = std::abs(beta[i]);
  }
  auto out = detail::aggregate_importance(std::move(r),
                                          r2_sum / static_cast<double>(z_true.cols()));
  for (std::size_t i = 0; i < constant_code.size(); ++i)
    if (constant_code[i]) out.warnings.push_back("constant-code-" + std::to_string(i));
  return out;
}

struct MigReport {
  double score = 0.0;
  std::vector<double> gaps;  // NaN for excluded factors
  std::vector<std::size_t> excluded_factors;
};

namespace detail {

inline std::vector<std::size_t> discretize(const std::vector<double>& v, std::size_t bins) {
  const auto [lo_it, hi_it] = std::minmax_element(v.begin(), v.end());
  const double lo = *lo_it;
  const double range = *hi_it - lo;
  std::vector<std::size_t> out(v.size(), 0);
  if (!(range > 0.0)) return out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const auto b = static_cast<std::size_t>((v[i] - lo) / range * static_cast<double>(bins));
    out[i] = std::min(b, bins - 1);
  }
  return out;
}

inline double discrete_entropy(const std::vector<std::size_t>& a, std::size_t bins) {
  std::vector<double> p(bins, 0.0);
  for (auto v : a) p[v] += 1.0;
  double h = 0.0;
  for (double c : p)
    if (c > 0.0) {
      const double q = c / static_cast<double>(a.size());
      h -= q * std::log(q);
    }
  return h;
}

inline double mutual_information(const std::vector<std::size_t>& a,
                                 const std::vector<std::size_t>& b, std::size_t bins) {
  std::vector<double> joint(bins * bins, 0.0), pa(bins, 0.0), pb(bins, 0.0);
  for (std::size_t i = 0; i < a.size(); ++i) {
    joint[a[i] * bins + b[i]] += 1.0;
    pa[a[i]] += 1.0;
    pb[b[i]] += 1.0;
  }
  const double n = static_cast<double>(a.size());
  double mi = 0.0;
  for (std::size_t x = 0; x < bins; ++x)
    for (std::size_t y = 0; y < bins; ++y) {
      const double j = joint[x * bins + y];
      if (j > 0.0) mi += (j / n) * std::log(j * n / (pa[x] * pb[y]));
    }
  return std::max(mi, 0.0);
}

}  // namespace detail

/// Mutual information gap with equal-width binning over the empirical range.
inline MigReport mig_report(const Matrix& z_true, const Matrix& z_pred, std::size_t bins = 20) {
  if (z_true.rows() != z_pred.rows()) throw NumericError("mig: row count mismatch");
  if (z_true.rows() <= 100) throw std::invalid_argument("mig: need more than 100 samples");
  if (bins < 2) throw std::invalid_argument("mig: need at least two bins");
  std::vector<std::vector<std::size_t>> codes;
  for (std::size_t i = 0; i < z_pred.cols(); ++i)
    codes.push_back(detail::discretize(z_pred.col(i), bins));

  MigReport out;
  double sum = 0.0;
  std::size_t used = 0;
  for (std::size_t j = 0; j < z_true.cols(); ++j) {
    const auto factor = detail::discretize(z_true.col(j), bins);
    const double h = detail::discrete_entropy(factor, bins);
    if (!(h > 0.0)) {
      out.excluded_factors.push_back(j);
      out.gaps.push_back(std::numeric_limits<double>::quiet_NaN());
      continue;
    }
    std::vector<double> mi;
    for (const auto& c : codes) mi.push_back(detail::mutual_information(factor, c, bins));
    std::sort(mi.begin(), mi.end(), std::greater<>());
    const double second = mi.size() > 1 ? mi[1] : 0.0;
    const double gap = (mi[0] - second) / h;
    out.gaps.push_back(gap);
    sum += gap;
    ++used;
  }
  out.score = used > 0 ? std::clamp(sum / static_cast<double>(used), 0.0, 1.0) : 0.0;
  return out;
}

inline double mig(const Matrix& z_true, const Matrix& z_pred, std::size_t bins = 20) {
  return mig_report(z_true, z_pred, bins).score;
}

/// |Pearson correlation| of each predicted component with the true
/// component it is optimally matched to.
inline std::vector<double> matched_correlations(const Matrix& z_true, const Matrix& z_pred) {
  if (z_true.rows() != z_pred.rows() || z_true.cols() != z_pred.cols()) {
    throw NumericError("matched_correlations: shape mismatch");
  }
  const Matrix a = detail::standardize_columns(z_true, nullptr);
  const Matrix b = detail::standardize_columns(z_pred, nullptr);
  const std::size_t k = a.cols();
  Matrix corr(k, k);
  for (std::size_t s = 0; s < a.rows(); ++s)
    for (std::size_t i = 0; i < k; ++i)
      for (std::size_t j = 0; j < k; ++j) corr(i, j) += b(s, i) * a(s, j);
  for (double& v : corr.data()) v = std::abs(v) / static_cast<double>(a.rows());
  const auto perm = best_assignment(corr);
  std::vector<double> out(k);
  for (std::size_t i = 0; i < k; ++i) out[i] = corr(i, perm[i]);
  return out;
}

inline std::string metrics_csv_header() {
  return "method,dataset,seed,dci_d,dci_c,dci_i,mig,residual";
}

inline std::string metrics_csv_row(const std::string& method, const std::string& dataset,
                                   std::uint64_t seed, const DciReport& dci, double mig_score,
                                   double residual) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "%s,%s,%llu,%.9g,%.9g,%.9g,%.9g,%.9g", method.c_str(),
                dataset.c_str(), static_cast<unsigned long long>(seed), dci.disentanglement,
                dci.completeness, dci.informativeness, mig_score, residual);
  return buf;
}

}  // namespace identconcepts

#endif  // IDENTCONCEPTS_METRICS_HPP
