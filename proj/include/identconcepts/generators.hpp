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

// Differentiable synthetic image generators with closed-form Jacobians.
//
// FourBars: four disjoint column bands. Bands 1-3 are flat with intensity
// z1, z2, z3; band 4 carries a Gaussian bump along the rows centred at
// z4*(H-1). Every component touches its own pixels only, so |J|ᵀ|J| is
// diagonal.
//
// FourBarsNemr: FourBars with band k rendered at z_k^k and the bump
// scaled by z4, so the Jacobian column norms move unequally with z.
//
// ColorBar: one bar, pixel(r, c) = z1 * a(r; z3*(H-1)) * b(c; 1 + 3*z2)
// where a and b are Gaussian bumps normalised to unit L2 norm over the
// pixel grid. Unit norm makes each profile orthogonal to its own
// derivative, and separability then makes all three Jacobian columns
// exactly orthogonal while still sharing every pixel.

#ifndef IDENTCONCEPTS_GENERATORS_HPP
#define IDENTCONCEPTS_GENERATORS_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "identconcepts/numerics.hpp"

namespace identconcepts {

enum class GeneratorKind { FourBars, FourBarsNemr, ColorBar };

inline std::string_view to_string(GeneratorKind kind) {
  switch (kind) {
    case GeneratorKind::FourBars: return "fourbars";
    case GeneratorKind::FourBarsNemr: return "fourbars_nemr";
    case GeneratorKind::ColorBar: return "colorbar";
  }
  return "unknown";
}

inline GeneratorKind parse_generator_kind(std::string_view name) {
  if (name == "fourbars") return GeneratorKind::FourBars;
  if (name == "fourbars_nemr") return GeneratorKind::FourBarsNemr;
  if (name == "colorbar") return GeneratorKind::ColorBar;
  throw std::invalid_argument("unknown generator kind '" + std::string(name) + "'");
}

struct Interval {
  double lo = 0.05;
  double hi = 0.95;

  bool contains(double v) const { return v >= lo && v <= hi; }
  bool interior(double v) const { return v > lo && v < hi; }
  double width() const { return hi - lo; }
};

/// Ground-truth component scores together with their admissible range.
struct ComponentVector {
  std::vector<double> values;
  Interval domain{};

  std::size_t size() const { return values.size(); }
  bool in_domain() const {
    return std::all_of(values.begin(), values.end(),
                       [&](double v) { return domain.contains(v); });
  }
  bool interior() const {
    return std::all_of(values.begin(), values.end(),
                       [&](double v) { return domain.interior(v); });
  }
};

struct Image {
  std::size_t height = 0;
  std::size_t width = 0;
  std::size_t channels = 1;
  std::vector<double> pixels;  // row-major, length height*width*channels

  double at(std::size_t r, std::size_t c) const { return pixels[r * width + c]; }
};

struct GeneratorSpec {
  GeneratorKind kind = GeneratorKind::FourBars;
  std::size_t height = 16;
  std::size_t width = 16;
  double smoothness = 1.5;  // bump standard deviation in rows
  // Test fixture only: a nonzero skew tilts the ColorBar row profile and
  // drops its normalisation, which breaks column orthogonality.
  double profile_skew = 0.0;

  std::size_t num_components() const { return kind == GeneratorKind::ColorBar ? 3 : 4; }
  std::size_t pixel_count() const { return height * width; }

  void validate() const {
    if (height < 8 || width < 8) {
      throw std::invalid_argument("GeneratorSpec: image size must be at least 8x8");
    }
    if (!(smoothness > 0.0) || smoothness > static_cast<double>(height) / 4.0) {
      throw std::invalid_argument("GeneratorSpec: smoothness must lie in (0, H/4]");
    }
  }
};

struct GeneratorJacobian {
  Matrix matrix;  // L x K, column k = dx/dz_k
  ComponentVector at;
};

namespace detail {

struct BumpProfile {
  std::vector<double> value;
  std::vector<double> d_center;
  std::vector<double> d_width;
};

inline BumpProfile gaussian_bump(std::size_t n, double center, double width,
                                 bool unit_norm, double skew = 0.0) {
  BumpProfile p{std::vector<double>(n), std::vector<double>(n), std::vector<double>(n)};
  const double s2 = width * width;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) - center;
    const double g = std::exp(-t * t / (2.0 * s2));
    const double tilt = std::exp(skew * t / width);
    p.value[i] = g * tilt;
    p.d_center[i] = g * tilt * (t / s2 - skew / width);
    p.d_width[i] = g * tilt * (t * t / (s2 * width) - skew * t / s2);
  }
  if (!unit_norm) return p;
  const double norm = norm2(p.value);
  const double gc = dot(p.value, p.d_center);
  const double gw = dot(p.value, p.d_width);
  const double n3 = norm * norm * norm;
  for (std::size_t i = 0; i < n; ++i) {
    p.d_center[i] = p.d_center[i] / norm - p.value[i] * gc / n3;
    p.d_width[i] = p.d_width[i] / norm - p.value[i] * gw / n3;
    p.value[i] /= norm;
  }
  return p;
}

inline std::size_t band_begin(const GeneratorSpec& spec, std::size_t band) {
  return band * spec.width / 4;
}

inline void check_components(const GeneratorSpec& spec, const ComponentVector& z) {
  if (z.size() != spec.num_components()) {
    throw std::invalid_argument("generator " + std::string(to_string(spec.kind)) +
                                " expects " + std::to_string(spec.num_components()) +
                                " components, got " + std::to_string(z.size()));
  }
  if (!z.in_domain()) throw std::invalid_argument("component vector outside its domain");
}

constexpr double kColorBarMinWidth = 1.0;
constexpr double kColorBarWidthGain = 3.0;

// Unclamped pixel values and, when `jac` is non-null, the L x K Jacobian.
inline std::vector<double> evaluate(const GeneratorSpec& spec, const ComponentVector& z,
                                    Matrix* jac) {
  const std::size_t h = spec.height;
  const std::size_t w = spec.width;
  const std::size_t k = spec.num_components();
  std::vector<double> px(h * w, 0.0);
  if (jac) *jac = Matrix(h * w, k);
  const double span = static_cast<double>(h - 1);

  if (spec.kind == GeneratorKind::ColorBar) {
    const double intensity = z.values[0];
    const double col_width = kColorBarMinWidth + kColorBarWidthGain * z.values[1];
    const double row_center = z.values[2] * span;
    const bool skewed = spec.profile_skew != 0.0;
    const auto rows =
        gaussian_bump(h, row_center, spec.smoothness, !skewed, spec.profile_skew);
    const auto cols =
        gaussian_bump(w, 0.5 * static_cast<double>(w - 1), col_width, true);
    for (std::size_t r = 0; r < h; ++r) {
      for (std::size_t c = 0; c < w; ++c) {
        const std::size_t idx = r * w + c;
        px[idx] = intensity * rows.value[r] * cols.value[c];
        if (!jac) continue;
        (*jac)(idx, 0) = rows.value[r] * cols.value[c];
        (*jac)(idx, 1) = intensity * rows.value[r] * cols.d_width[c] * kColorBarWidthGain;
        (*jac)(idx, 2) = intensity * rows.d_center[r] * cols.value[c] * span;
      }
    }
    return px;
  }

  const bool nemr = spec.kind == GeneratorKind::FourBarsNemr;
  for (std::size_t band = 0; band < 3; ++band) {
    const double zk = z.values[band];
    const double power = nemr ? static_cast<double>(band + 1) : 1.0;
    const double value = std::pow(zk, power);
    const double deriv = power * std::pow(zk, power - 1.0);
    for (std::size_t r = 0; r < h; ++r) {
      for (std::size_t c = band_begin(spec, band); c < band_begin(spec, band + 1); ++c) {
        px[r * w + c] = value;
        if (jac) (*jac)(r * w + c, band) = deriv;
      }
    }
  }
  const auto bump = gaussian_bump(h, z.values[3] * span, spec.smoothness, false);
  const double amp = nemr ? z.values[3] : 1.0;
  const double d_amp = nemr ? 1.0 : 0.0;
  for (std::size_t r = 0; r < h; ++r) {
    for (std::size_t c = band_begin(spec, 3); c < w; ++c) {
      px[r * w + c] = amp * bump.value[r];
      if (jac) (*jac)(r * w + c, 3) = d_amp * bump.value[r] + amp * bump.d_center[r] * span;
    }
  }
  return px;
}

}  // namespace detail

/// Deterministic image for component scores z, clamped to [0, 1].
inline Image render(const GeneratorSpec& spec, const ComponentVector& z) {
  spec.validate();
  detail::check_components(spec, z);
  Image img{spec.height, spec.width, 1, detail::evaluate(spec, z, nullptr)};
  for (double& p : img.pixels) p = std::clamp(p, 0.0, 1.0);
  return img;
}

/// Closed-form generator Jacobian at a strictly interior z.
inline GeneratorJacobian jacobian(const GeneratorSpec& spec, const ComponentVector& z) {
  spec.validate();
  detail::check_components(spec, z);
  if (!z.interior()) {
    throw std::invalid_argument("jacobian: z must lie strictly inside the component domain");
  }
  GeneratorJacobian out{Matrix{}, z};
  detail::evaluate(spec, z, &out.matrix);
  return out;
}

struct MechanismCheck {
  bool dma_holds = false;
  bool ima_holds = false;
  double off_diag_ratio = 0.0;      // max offdiag(|J|ᵀ|J|) / min diag
  double ima_off_diag_ratio = 0.0;  // max |offdiag(JᵀJ)| / min diag
};

inline double off_diagonal_ratio(const Matrix& gram) {
  double max_off = 0.0;
  double min_diag = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < gram.rows(); ++i) {
    min_diag = std::min(min_diag, gram(i, i));
    for (std::size_t j = 0; j < gram.cols(); ++j)
      if (i != j) max_off = std::max(max_off, std::abs(gram(i, j)));
  }
  if (!(min_diag > 0.0)) return std::numeric_limits<double>::infinity();
  return max_off / min_diag;
}

inline MechanismCheck check_mechanism(const GeneratorSpec& spec, const ComponentVector& z,
                                      double tol = 1e-6) {
  const Matrix j = jacobian(spec, z).matrix;
  Matrix abs_j = j;
  for (double& v : abs_j.data()) v = std::abs(v);
  MechanismCheck out;
  out.off_diag_ratio = off_diagonal_ratio(gram_cols(abs_j));
  out.ima_off_diag_ratio = off_diagonal_ratio(gram_cols(j));
  out.dma_holds = out.off_diag_ratio <= tol;
  out.ima_holds = out.ima_off_diag_ratio <= tol;
  return out;
}

struct NemrCheck {
  bool satisfied = false;
  std::vector<double> ratios;
};

/// Non-equal magnitude ratios between two points: γᵢ = diag(JᵀJ)(z_b)ᵢ /
/// diag(JᵀJ)(z_a)ᵢ must be pairwise distinct.
inline NemrCheck check_nemr(const GeneratorSpec& spec, const ComponentVector& z_a,
                            const ComponentVector& z_b, double tol = 1e-6) {
  if (!check_mechanism(spec, z_a).ima_holds || !check_mechanism(spec, z_b).ima_holds) {
    throw std::invalid_argument("check_nemr: generator Jacobian columns are not orthogonal");
  }
  const Matrix ga = gram_cols(jacobian(spec, z_a).matrix);
  const Matrix gb = gram_cols(jacobian(spec, z_b).matrix);
  NemrCheck out;
  for (std::size_t i = 0; i < ga.rows(); ++i) {
    if (!(ga(i, i) > 0.0) || !(gb(i, i) > 0.0)) {
      throw NumericError("check_nemr: zero Jacobian column for component " +
                         std::to_string(i));
    }
    out.ratios.push_back(gb(i, i) / ga(i, i));
  }
  const double max_ratio = *std::max_element(out.ratios.begin(), out.ratios.end());
  out.satisfied = true;
  for (std::size_t i = 0; i < out.ratios.size(); ++i)
    for (std::size_t j = i + 1; j < out.ratios.size(); ++j)
      if (!(std::abs(out.ratios[i] - out.ratios[j]) > tol * max_ratio)) out.satisfied = false;
  return out;
}

/// Binary PGM (P5, maxval 255).
inline void write_pgm(const Image& img, const std::string& path) {
  if (img.channels != 1) throw std::invalid_argument("write_pgm: grayscale images only");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("write_pgm: cannot open " + path);
  out << "P5\n" << img.width << ' ' << img.height << "\n255\n";
  for (double p : img.pixels) {
    const auto byte =
        static_cast<unsigned char>(std::lround(std::clamp(p, 0.0, 1.0) * 255.0));
    out.put(static_cast<char>(byte));
  }
  if (!out) throw std::runtime_error("write_pgm: write failed for " + path);
}

}  // namespace identconcepts

#endif  // IDENTCONCEPTS_GENERATORS_HPP
