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


#ifndef IDENTCONCEPTS_SERIALIZATION_HPP
#define IDENTCONCEPTS_SERIALIZATION_HPP

#include <cmath>
#include <string>
#include <vector>

#include <json.hpp>

#include "identconcepts/discovery.hpp"
#include "identconcepts/metrics.hpp"
#include "identconcepts/numerics.hpp"

namespace identconcepts {

using Json = nlohmann::json;

inline Json matrix_rows(const Matrix& m) {
  Json rows = Json::array();
  for (std::size_t r = 0; r < m.rows(); ++r) {
    const auto v = m.row(r);
    rows.push_back(std::vector<double>(v.begin(), v.end()));
  }
  return rows;
}

inline Matrix matrix_from_rows(const Json& rows) {
  if (!rows.is_array()) throw std::invalid_argument("matrix rows must be an array");
  const std::size_t n = rows.size();
  const std::size_t k = n == 0 ? 0 : rows.front().size();
  Matrix m(n, k);
  for (std::size_t r = 0; r < n; ++r) {
    if (!rows[r].is_array() || rows[r].size() != k) {
      throw std::invalid_argument("matrix rows must all have the same length");
    }
    for (std::size_t c = 0; c < k; ++c) m(r, c) = rows[r][c].get<double>();
  }
  return m;
}

// NaN has no JSON spelling; it is written as null.
inline Json number_or_null(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

inline void to_json(Json& j, const Diagnostics& d) {
  j = Json{{"final_loss", number_or_null(d.final_loss)},
           {"iterations", d.iterations},
           {"converged", d.converged},
           {"warnings", d.warnings}};
}

inline void from_json(const Json& j, Diagnostics& d) {
  d.final_loss = j.at("final_loss").is_null() ? std::nan("") : j.at("final_loss").get<double>();
  d.iterations = j.at("iterations").get<std::size_t>();
  d.converged = j.at("converged").get<bool>();
  d.warnings = j.at("warnings").get<std::vector<std::string>>();
}

inline void to_json(Json& j, const ConceptMatrix& c) {
  j = Json{{"k", c.m.rows()},
           {"method", c.method},
           {"rows", matrix_rows(c.m)},
           {"diagnostics", c.diagnostics}};
}

inline void from_json(const Json& j, ConceptMatrix& c) {
  c.m = matrix_from_rows(j.at("rows"));
  if (c.m.rows() != j.at("k").get<std::size_t>() || c.m.cols() != c.m.rows()) {
    throw std::invalid_argument("concept matrix must be k x k");
  }
  c.method = j.at("method").get<std::string>();
  c.diagnostics = j.at("diagnostics").get<Diagnostics>();
}

inline void to_json(Json& j, const DciReport& r) {
  j = Json{{"disentanglement", r.disentanglement},
           {"completeness", r.completeness},
           {"informativeness", r.informativeness},
           {"importance", matrix_rows(r.importance)},
           {"warnings", r.warnings}};
}

inline void to_json(Json& j, const RecoveryReport& r) {
  j = Json{{"permutation", r.permutation},
           {"scales", r.scales},
           {"residual", r.residual},
           {"matched_correlations", r.matched_correlations}};
}

inline void to_json(Json& j, const MigReport& r) {
  Json gaps = Json::array();
  for (double g : r.gaps) gaps.push_back(number_or_null(g));
  j = Json{{"score", r.score}, {"gaps", gaps}, {"excluded_factors", r.excluded_factors}};
}

}  // namespace identconcepts

#endif  // IDENTCONCEPTS_SERIALIZATION_HPP
