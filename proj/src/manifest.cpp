#include "kurth/manifest.hpp"

#include <cstdio>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace kurth {

std::string format_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string RunManifest::to_json() const {
  nlohmann::json j;
  j["schema"] = "v1";
  j["command"] = command;
  j["params"] = params;
  j["outputs"] = outputs;
  nlohmann::json arr = nlohmann::json::array();
  for (const CheckRecord& c : checks) {
    arr.push_back({{"name", c.name},
                   {"value", c.value},
                   {"tol", c.tol},
                   {"pass", c.pass}});
  }
  j["checks"] = arr;
  j["runtime_seconds"] = runtime_seconds;
  j["pass"] = pass;
  return j.dump(2) + "\n";
}

void RunManifest::write(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write manifest: " + path);
  out << to_json();
}

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write csv: " + path);
  for (std::size_t i = 0; i < header.size(); ++i)
    out << (i ? "," : "") << header[i];
  out << "\n";
  for (const auto& row : rows) {
    if (row.size() != header.size())
      throw std::invalid_argument("write_csv: row width != header width");
    for (std::size_t i = 0; i < row.size(); ++i)
      out << (i ? "," : "") << format_g17(row[i]);
    out << "\n";
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace kurth
