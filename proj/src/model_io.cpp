#include "delaymargin/model_io.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace delaymargin {

namespace {

Matrix matrix_from_json(const nlohmann::json& j, const char* name) {
    if (!j.is_array() || j.empty())
        throw ValidationError(std::string("model: ") + name +
                              " must be a non-empty nested array");
    std::vector<std::vector<double>> rows;
    for (const auto& row : j) {
        if (!row.is_array())
            throw ValidationError(std::string("model: ") + name +
                                  " must be a nested array");
        rows.emplace_back();
        for (const auto& v : row) {
            if (!v.is_number())
                throw ValidationError(std::string("model: ") + name +
                                      " entries must be numbers");
            rows.back().push_back(v.get<double>());
        }
    }
    Matrix m = Matrix::from_rows(rows);
    m.check_finite(name);
    return m;
}

}  // namespace

PlantModel parse_model(const std::string& json_text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("model: invalid JSON: ") + e.what());
    }
    for (const char* key : {"A", "B", "K", "r"})
        if (!j.contains(key))
            throw ValidationError(std::string("model: missing field ") + key);
    if (!j["r"].is_number()) throw ValidationError("model: r must be a number");
    return PlantModel(matrix_from_json(j["A"], "A"), matrix_from_json(j["B"], "B"),
                      matrix_from_json(j["K"], "K"), j["r"].get<double>());
}

PlantModel load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("model: cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_model(buf.str());
}

std::string model_to_json(const PlantModel& model) {
    nlohmann::json j;
    j["A"] = model.a.to_rows();
    j["B"] = model.b.to_rows();
    j["K"] = model.k.to_rows();
    j["r"] = model.r;
    return j.dump(2);
}

std::string certificate_to_json(const MarginReport& report) {
    nlohmann::json j;
    j["epsilon"] = report.epsilon;
    j["theta"] = report.theta;
    j["lambda"] = report.lambda;
    j["sigma"] = report.sigma;
    j["delta"] = report.delta;
    j["scalar_path"] = report.scalar_path;
    j["feasible"] = report.feasible;
    return j.dump(2);
}

}  // namespace delaymargin
