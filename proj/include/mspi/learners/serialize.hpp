#pragma once

#include <json.hpp>

#include "mspi/learners/boost.hpp"
#include "mspi/learners/forest.hpp"
#include "mspi/learners/logit.hpp"
#include "mspi/learners/platt.hpp"
#include "mspi/learners/standardize.hpp"

// JSON views of fitted models for audit. The schema is described in
// docs/model_schema.md.
namespace mspi {

nlohmann::json to_json(const StandardizationParams& p);
nlohmann::json to_json(const LogitModel& m);
nlohmann::json to_json(const Tree& t);
nlohmann::json to_json(const ForestModel& m);
nlohmann::json to_json(const BoostModel& m);
nlohmann::json to_json(const CalibrationMap& m);

LogitModel logit_from_json(const nlohmann::json& j);
Tree tree_from_json(const nlohmann::json& j);
CalibrationMap calibration_from_json(const nlohmann::json& j);

}  // namespace mspi
