#include "reachdesign/json_io.hpp"

namespace reachdesign {

nlohmann::json to_json(const Vec& v) {
  nlohmann::json arr = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v(i));
  return arr;
}

nlohmann::json to_json(const Mat& m) {
  nlohmann::json arr = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    arr.push_back(to_json(Vec(m.row(i).transpose())));
  }
  return arr;
}

Vec vec_from_json(const nlohmann::json& j, const char* what) {
  if (!j.is_array()) {
    throw std::invalid_argument(std::string(what) + ": expected an array");
  }
  Vec v(static_cast<Eigen::Index>(j.size()));
  Eigen::Index i = 0;
  for (const auto& item : j) {
    if (!item.is_number()) {
      throw std::invalid_argument(std::string(what) + ": expected numbers");
    }
    v(i++) = item.get<double>();
  }
  return v;
}

Mat mat_from_json(const nlohmann::json& j, const char* what) {
  if (!j.is_array() || j.empty()) {
    throw std::invalid_argument(std::string(what) +
                                ": expected a nonempty array of rows");
  }
  const Eigen::Index rows = static_cast<Eigen::Index>(j.size());
  Vec first = vec_from_json(j[0], what);
  Mat m(rows, first.size());
  m.row(0) = first.transpose();
  for (Eigen::Index i = 1; i < rows; ++i) {
    Vec row = vec_from_json(j[static_cast<size_t>(i)], what);
    if (row.size() != m.cols()) {
      throw std::invalid_argument(std::string(what) + ": ragged rows");
    }
    m.row(i) = row.transpose();
  }
  return m;
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace reachdesign
