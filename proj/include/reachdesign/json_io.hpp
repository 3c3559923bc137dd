// JSON <-> Eigen helpers shared by the certificate and config layers.
#pragma once

#include <json.hpp>

#include "reachdesign/sets.hpp"

namespace reachdesign {

nlohmann::json to_json(const Vec& v);
nlohmann::json to_json(const Mat& m);
Vec vec_from_json(const nlohmann::json& j, const char* what);
Mat mat_from_json(const nlohmann::json& j, const char* what);

// FNV-1a 64-bit over a byte string; used as a content-integrity stamp.
std::uint64_t fnv1a64(std::string_view bytes);

}  // namespace reachdesign
