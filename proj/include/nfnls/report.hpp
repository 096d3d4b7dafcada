#pragma once

#include <map>
#include <string>
#include <vector>

namespace nfnls {

struct CheckRecord {
  std::string name;
  double measured = 0.0;
  double bound = 0.0;
  bool pass = false;
  std::string anchor;
  std::string detail;
};

struct Table {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

struct RunReport {
  std::string kind;
  std::map<std::string, std::string> config;
  std::vector<CheckRecord> checks;
  std::map<std::string, double> constants;
  std::vector<Table> tables;
  double seconds = 0.0;

  bool all_pass() const;
};

inline constexpr const char* kReportSchema = "report_v1";

// JSON text; timing fields are left out when include_timing is false.
std::string report_json(const RunReport& r, bool include_timing = true);
std::string table_csv(const Table& t);
std::string checks_csv(const RunReport& r);
// report.json, checks.csv and one <table>.csv per table
void write_report(const RunReport& r, const std::string& dir);

}  // namespace nfnls
