#ifndef KURTH_MANIFEST_HPP
#define KURTH_MANIFEST_HPP

#include <map>
#include <string>
#include <vector>

namespace kurth {

struct CheckRecord {
  std::string name;
  double value = 0.0;  // the measured quantity (residual, error, ...)
  double tol = 0.0;
  bool pass = false;
};

// Record of one CLI run, serialized as schema "v1" JSON.
struct RunManifest {
  std::string command;
  std::map<std::string, std::string> params;
  std::vector<std::string> outputs;  // files written by the run
  std::vector<CheckRecord> checks;
  double runtime_seconds = 0.0;
  bool pass = true;

  std::string to_json() const;
  void write(const std::string& path) const;
};

// 17 significant digits: enough to round-trip any double exactly
std::string format_g17(double v);

// comma-separated with a header row; numbers at 17 significant digits
void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows);

}  // namespace kurth

#endif
