#pragma once

#include <json.hpp>
#include <string>

#include "mpec/model.hpp"

namespace mpec {

/// Parses the instance JSON object. Shape errors throw InvalidInstance;
/// semantic checks are not run.
MpecInstance parse_instance(const nlohmann::json& j);

/// Inverse of parse_instance; zero blocks are written explicitly so the
/// round trip is lossless.
nlohmann::json instance_to_json(const MpecInstance& inst);

/// Reads, parses and validates. Throws Io, InvalidInstance.
MpecInstance load_instance(const std::string& path);
MpecInstance load_instance_unchecked(const std::string& path);

nlohmann::json matrix_to_json(const Mat& A);
nlohmann::json vector_to_json(const Vec& v);
Mat matrix_from_json(const nlohmann::json& j, const char* name);
Vec vector_from_json(const nlohmann::json& j, const char* name);

}  // namespace mpec
