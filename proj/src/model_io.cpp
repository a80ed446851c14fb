#include "crcca/model_io.hpp"

#include <algorithm>
#include <fstream>
#include <stdexcept>
#include <vector>

#include "json.hpp"

namespace crcca {

namespace {

using nlohmann::json;

json to_json(const Vector& v) {
    json a = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
    return a;
}

json to_json(const Matrix& m) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

Vector vector_from(const json& a) {
    Vector v(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) v(static_cast<Eigen::Index>(i)) = a.at(i).get<double>();
    return v;
}

Matrix matrix_from(const json& rows) {
    const Eigen::Index nr = static_cast<Eigen::Index>(rows.size());
    if (nr == 0) return Matrix(0, 0);
    const Eigen::Index nc = static_cast<Eigen::Index>(rows.at(0).size());
    Matrix m(nr, nc);
    for (Eigen::Index i = 0; i < nr; ++i) {
        const json& row = rows.at(static_cast<std::size_t>(i));
        if (static_cast<Eigen::Index>(row.size()) != nc)
            throw std::runtime_error("corrupt model file: ragged matrix");
        for (Eigen::Index j = 0; j < nc; ++j) m(i, j) = row.at(static_cast<std::size_t>(j)).get<double>();
    }
    return m;
}

json map_to_json(const QuantizedMap& map) {
    json grid;
    grid["lower"] = to_json(map.grid.lower);
    grid["upper"] = to_json(map.grid.upper);
    grid["levels"] = map.grid.levels;

    std::vector<std::int64_t> ids;
    ids.reserve(map.cells.size());
    for (const auto& [id, cell] : map.cells) {
        (void)cell;
        ids.push_back(id);
    }
    std::sort(ids.begin(), ids.end());
    json cells = json::array();
    for (const std::int64_t id : ids) {
        const auto& cell = map.cells.at(id);
        cells.push_back(json::array({id, cell.count, to_json(cell.fit)}));
    }

    json out;
    out["grid"] = std::move(grid);
    out["cells"] = std::move(cells);
    out["fallback"] = to_json(map.fallback);
    out["affine_a"] = to_json(map.affine_a);
    out["affine_b"] = to_json(map.affine_b);
    out["corrected"] = map.corrected;
    return out;
}

QuantizedMap map_from_json(const json& j) {
    QuantizedMap map;
    map.grid.lower = vector_from(j.at("grid").at("lower"));
    map.grid.upper = vector_from(j.at("grid").at("upper"));
    map.grid.levels = j.at("grid").at("levels").get<std::vector<int>>();
    map.grid.validate();
    for (const json& entry : j.at("cells")) {
        QuantizedMap::Cell cell;
        cell.count = entry.at(1).get<std::int64_t>();
        cell.fit = vector_from(entry.at(2));
        map.cells.emplace(entry.at(0).get<std::int64_t>(), std::move(cell));
    }
    map.fallback = vector_from(j.at("fallback"));
    map.affine_a = matrix_from(j.at("affine_a"));
    map.affine_b = vector_from(j.at("affine_b"));
    map.corrected = j.at("corrected").get<bool>();
    return map;
}

void write_file(const json& j, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open model file for writing: " + path);
    out << j.dump(2) << '\n';
    if (!out) throw std::runtime_error("write failed: " + path);
}

json read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open model file: " + path);
    json j;
    try {
        j = json::parse(in);
    } catch (const json::exception& e) {
        throw std::runtime_error("model file parse error in " + path + ": " + e.what());
    }
    if (!j.is_object() || !j.contains("format_version"))
        throw std::runtime_error("not a model file: " + path);
    const int version = j.at("format_version").get<int>();
    if (version != kModelFormatVersion)
        throw std::runtime_error("unsupported model format version " + std::to_string(version) +
                                 " (expected " + std::to_string(kModelFormatVersion) + ")");
    return j;
}

}  // namespace

void save_model(const LinearCcaModel& model, const std::string& path) {
    json j;
    j["format_version"] = kModelFormatVersion;
    j["kind"] = "linear_cca";
    j["projection_x"] = to_json(model.projection_x);
    j["projection_y"] = to_json(model.projection_y);
    j["mean_x"] = to_json(model.mean_x);
    j["mean_y"] = to_json(model.mean_y);
    j["correlations"] = to_json(model.correlations);
    write_file(j, path);
}

void save_model(const CrccaModel& model, const std::string& path) {
    json j;
    j["format_version"] = kModelFormatVersion;
    j["kind"] = "crcca";
    j["config"] = {{"levels", model.config.levels},   {"dim", model.config.dim},
                   {"max_iters", model.config.max_iters}, {"tol", model.config.tol},
                   {"seed", model.config.seed},       {"ridge", model.config.ridge}};
    j["map_u"] = map_to_json(model.map_u);
    j["map_v"] = map_to_json(model.map_v);
    j["align_u"] = to_json(model.align_u);
    j["align_v"] = to_json(model.align_v);
    j["objective_trace"] = model.objective_trace;
    j["entropy_u"] = model.entropy_u;
    j["entropy_v"] = model.entropy_v;
    j["converged"] = model.converged;
    write_file(j, path);
}

std::string model_kind(const std::string& path) {
    const json j = read_file(path);
    if (!j.contains("kind")) throw std::runtime_error("not a model file: " + path);
    return j.at("kind").get<std::string>();
}

LinearCcaModel load_linear_cca(const std::string& path) {
    const json j = read_file(path);
    if (j.value("kind", "") != "linear_cca")
        throw std::runtime_error("model file holds kind \"" + j.value("kind", "?") +
                                 "\", expected linear_cca: " + path);
    try {
        LinearCcaModel model;
        model.projection_x = matrix_from(j.at("projection_x"));
        model.projection_y = matrix_from(j.at("projection_y"));
        model.mean_x = vector_from(j.at("mean_x"));
        model.mean_y = vector_from(j.at("mean_y"));
        model.correlations = vector_from(j.at("correlations"));
        return model;
    } catch (const json::exception& e) {
        throw std::runtime_error("corrupt model file " + path + ": " + e.what());
    }
}

CrccaModel load_crcca(const std::string& path) {
    const json j = read_file(path);
    if (j.value("kind", "") != "crcca")
        throw std::runtime_error("model file holds kind \"" + j.value("kind", "?") +
                                 "\", expected crcca: " + path);
    try {
        CrccaModel model;
        const json& c = j.at("config");
        model.config.levels = c.at("levels").get<int>();
        model.config.dim = c.at("dim").get<int>();
        model.config.max_iters = c.at("max_iters").get<int>();
        model.config.tol = c.at("tol").get<double>();
        model.config.seed = c.at("seed").get<std::uint64_t>();
        model.config.ridge = c.at("ridge").get<double>();
        model.map_u = map_from_json(j.at("map_u"));
        model.map_v = map_from_json(j.at("map_v"));
        model.align_u = matrix_from(j.at("align_u"));
        model.align_v = matrix_from(j.at("align_v"));
        model.objective_trace = j.at("objective_trace").get<std::vector<double>>();
        model.entropy_u = j.at("entropy_u").get<double>();
        model.entropy_v = j.at("entropy_v").get<double>();
        model.converged = j.at("converged").get<bool>();
        return model;
    } catch (const json::exception& e) {
        throw std::runtime_error("corrupt model file " + path + ": " + e.what());
    }
}

}  // namespace crcca
