#include "scc/io.hpp"

#include "scc/error.hpp"

namespace scc {

Vector vector_from_json(const nlohmann::json& j, const std::string& what) {
    if (!j.is_array()) throw Error(ErrorKind::ConfigInvalid, what + " must be an array of numbers");
    Vector v(static_cast<Eigen::Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) {
        if (!j[i].is_number()) throw Error(ErrorKind::ConfigInvalid, what + " must be an array of numbers");
        v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
    }
    return v;
}

Matrix matrix_from_json(const nlohmann::json& j, const std::string& what) {
    if (!j.is_array() || j.empty()) throw Error(ErrorKind::ConfigInvalid, what + " must be a nonempty array of rows");
    const std::size_t cols = j[0].is_array() ? j[0].size() : 0;
    Matrix m(static_cast<Eigen::Index>(j.size()), static_cast<Eigen::Index>(cols));
    for (std::size_t r = 0; r < j.size(); ++r) {
        if (!j[r].is_array() || j[r].size() != cols) throw Error(ErrorKind::ConfigInvalid, what + " has ragged rows");
        for (std::size_t c = 0; c < cols; ++c) {
            if (!j[r][c].is_number()) throw Error(ErrorKind::ConfigInvalid, what + " has a non-numeric entry");
            m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = j[r][c].get<double>();
        }
    }
    return m;
}

nlohmann::json to_json(const Vector& v) {
    return std::vector<double>(v.data(), v.data() + v.size());
}

nlohmann::json matrix_to_json(const Matrix& m) {
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        std::vector<double> row(static_cast<std::size_t>(m.cols()));
        for (Eigen::Index c = 0; c < m.cols(); ++c) row[static_cast<std::size_t>(c)] = m(r, c);
        rows.push_back(row);
    }
    return rows;
}

PolyCone cone_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw Error(ErrorKind::ConfigInvalid, "cone must be a JSON object");
    if (j.contains("orthant")) return PolyCone::orthant(j.at("orthant").get<Eigen::Index>());
    if (j.contains("generators")) return PolyCone::from_generators(matrix_from_json(j.at("generators"), "generators").transpose());
    if (!j.contains("facets")) throw Error(ErrorKind::ConfigInvalid, "cone needs 'facets', 'orthant' or 'generators'");
    const Matrix a = matrix_from_json(j.at("facets"), "facets");
    if (j.contains("dim") && j.at("dim").get<Eigen::Index>() != a.cols()) {
        throw Error(ErrorKind::ConfigInvalid, "cone 'dim' differs from facet width");
    }
    return PolyCone(a);
}

nlohmann::json to_json(const PolyCone& cone) {
    return {{"dim", cone.dim()}, {"facets", matrix_to_json(cone.facets())}};
}

}  // namespace scc
