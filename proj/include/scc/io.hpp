#pragma once

// JSON helpers shared by the instance readers. Matrices are row-major arrays
// of rows.

#include "scc/geometry.hpp"

#include <json.hpp>

#include <string>

namespace scc {

Vector vector_from_json(const nlohmann::json& j, const std::string& what);
Matrix matrix_from_json(const nlohmann::json& j, const std::string& what);
nlohmann::json to_json(const Vector& v);
nlohmann::json matrix_to_json(const Matrix& m);

/// {"dim": k, "facets": [[...], ...]}, or {"orthant": k}, or {"generators": [[...], ...]}
/// with one generator per entry.
PolyCone cone_from_json(const nlohmann::json& j);
nlohmann::json to_json(const PolyCone& cone);

}  // namespace scc
