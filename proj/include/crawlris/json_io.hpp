#pragma once

#include <stdexcept>
#include <string>

#include <json.hpp>

#include "crawlris/continuum.hpp"
#include "crawlris/dissipation.hpp"
#include "crawlris/model.hpp"
#include "crawlris/oracle.hpp"
#include "crawlris/solver.hpp"
#include "crawlris/stasis.hpp"
#include "crawlris/time_program.hpp"

namespace crawlris {

using nlohmann::json;

/// Input-validation failure. `pointer()` is a JSON-pointer-style path to the
/// offending field ("/springs/2/stiffness"); for file-level syntax errors it
/// is the file name and the message carries line/column information.
class SchemaError : public std::runtime_error {
 public:
  SchemaError(std::string pointer, const std::string& message)
      : std::runtime_error(pointer + ": " + message), pointer_(std::move(pointer)) {}

  const std::string& pointer() const noexcept { return pointer_; }

 private:
  std::string pointer_;
};

/// Parse a JSON document from disk. Throws SchemaError with the file name and
/// the parser's line:column diagnostics on malformed input.
json parse_json_file(const std::string& path);

// --- readers (all throw SchemaError with a JSON pointer on bad input) ---

TimeProgram time_program_from_json(const json& j, const std::string& where);
CrawlerModel model_from_json(const json& j, const std::string& where = "/model");
ContinuumModel continuum_from_json(const json& j, const std::string& where = "/continuum");
SolverConfig solver_config_from_json(const json& j, const std::string& where = "/solver");

// --- writers ---

json to_json(const TimeProgram& p);
json to_json(const CrawlerModel& m);
json to_json(const ContinuumModel& c);
json to_json(const SolverConfig& cfg);
json to_json(const PsiRegularity& r);
json to_json(const UniquenessReport& r);
json to_json(const TimeDependentReport& r);
json to_json(const OracleResult& r);

/// Geometry plus direction labels; needs the dissipation spec to classify
/// boundary normals. Vertices of planar cross-sections are emitted in
/// counter-clockwise order.
json stasis_to_json(const StasisGeometry& g, const DissipationSpec& d);

std::string direction_label_name(const DirectionLabel& label);

}  // namespace crawlris
