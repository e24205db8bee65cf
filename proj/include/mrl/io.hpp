#pragma once

#include <string>

#include "json.hpp"
#include "mrl/analysis.hpp"
#include "mrl/field.hpp"
#include "mrl/registration.hpp"
#include "mrl/scaling.hpp"
#include "mrl/wells.hpp"

namespace mrl {

using json = nlohmann::json;

inline constexpr int kFormatVersion = 1;

/// Atomic text write: temp file in the same directory, then rename.
void write_text_atomic(const std::string& path, const std::string& text);
std::string read_text(const std::string& path);

// ---- wells ----------------------------------------------------------------
// {"n": int, "wells": [[n*n reals, row-major], ...]}
WellFamily wells_from_json(const json& j);
json wells_to_json(const WellFamily& K);
WellFamily load_wells(const std::string& path);

// ---- registration ---------------------------------------------------------
// {"n": int, "A": [row-major], "z": [[...]], "zeta": [[...]]}
PointCorrespondence points_from_json(const json& j);
json recovered_to_json(const PointCorrespondence& pc, const RecoveredMap& rec);

// ---- analysis reports -----------------------------------------------------
json compat_to_json(const CompatibilityReport& rep);
json energy_to_json(const EnergyBreakdown& e);
json majority_to_json(const GridField& f, const MajorityPhase& mp);
json pairs_to_json(const PairStats& ps);
json truncation_to_json(const TruncationResult& tr, double lambda);
json scaling_to_json(const ScalingReport& rep);

// ---- matrices and vectors -------------------------------------------------
json matrix_to_json(const Eigen::MatrixXd& m);  // row-major flat array
Eigen::MatrixXd matrix_from_json(const json& j, int n);
json vector_to_json(const Eigen::VectorXd& v);
Eigen::VectorXd vector_from_json(const json& j);

// ---- grid fields ----------------------------------------------------------
// <name>.field.json header + <name>.field.bin raw little-endian binary64,
// node-major then component; mask as an embedded run-length list of
// alternating outside/inside counts starting with outside.
void write_field(const GridField& f, const std::string& stem);
GridField read_field(const std::string& stem);

}  // namespace mrl
