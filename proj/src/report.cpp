#include "nfnls/report.hpp"

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <json.hpp>

#include "nfnls/errors.hpp"

namespace nfnls {

bool RunReport::all_pass() const {
  for (const auto& c : checks)
    if (!c.pass) return false;
  return true;
}

std::string report_json(const RunReport& r, bool include_timing) {
  nlohmann::ordered_json j;
  j["schema"] = kReportSchema;
  j["kind"] = r.kind;
  j["config"] = r.config;
  j["checks"] = nlohmann::ordered_json::array();
  for (const auto& c : r.checks) {
    nlohmann::ordered_json e;
    e["name"] = c.name;
    e["measured"] = c.measured;
    e["bound"] = c.bound;
    e["pass"] = c.pass;
    e["anchor"] = c.anchor;
    e["detail"] = c.detail;
    j["checks"].push_back(e);
  }
  j["constants"] = r.constants;
  j["tables"] = nlohmann::ordered_json::array();
  for (const auto& t : r.tables) j["tables"].push_back({{"name", t.name}, {"columns", t.columns}, {"rows", t.rows}});
  j["all_pass"] = r.all_pass();
  if (include_timing) j["timing"] = {{"seconds", r.seconds}};
  return j.dump(2) + "\n";
}

namespace {

std::string quote(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

std::string num(double x) {
  std::ostringstream os;
  os << std::setprecision(17) << x;
  return os.str();
}

void write_file(const std::filesystem::path& p, const std::string& text) {
  std::ofstream f(p);
  if (!f) throw ResourceError("cannot write " + p.string());
  f << text;
}

}  // namespace

std::string table_csv(const Table& t) {
  std::ostringstream os;
  for (size_t i = 0; i < t.columns.size(); ++i) os << (i ? "," : "") << quote(t.columns[i]);
  os << "\n";
  for (const auto& row : t.rows) {
    for (size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << num(row[i]);
    os << "\n";
  }
  return os.str();
}

std::string checks_csv(const RunReport& r) {
  std::ostringstream os;
  os << "name,measured,bound,pass,anchor,detail\n";
  for (const auto& c : r.checks)
    os << quote(c.name) << "," << num(c.measured) << "," << num(c.bound) << "," << (c.pass ? 1 : 0) << ","
       << quote(c.anchor) << "," << quote(c.detail) << "\n";
  return os.str();
}

void write_report(const RunReport& r, const std::string& dir) {
  std::filesystem::path d(dir);
  std::error_code ec;
  std::filesystem::create_directories(d, ec);
  if (ec) throw ResourceError("cannot create " + dir + ": " + ec.message());
  write_file(d / "report.json", report_json(r));
  write_file(d / "checks.csv", checks_csv(r));
  for (const auto& t : r.tables) write_file(d / (t.name + ".csv"), table_csv(t));
}

}  // namespace nfnls
