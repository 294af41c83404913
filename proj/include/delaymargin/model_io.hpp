#pragma once

#include <string>

#include "delaymargin/margin.hpp"

namespace delaymargin {

/// Parses a model document {"A": [[..]], "B": [[..]], "K": [[..]], "r": 1.0}.
/// Dimension and Hurwitz checks run on load.
PlantModel parse_model(const std::string& json_text);

/// Loads a model JSON file.
PlantModel load_model(const std::string& path);

std::string model_to_json(const PlantModel& model);

/// Certificate document with exactly the fields
/// epsilon, theta, lambda, sigma, delta, scalar_path, feasible.
std::string certificate_to_json(const MarginReport& report);

}  // namespace delaymargin
