#include "robinlab/config.hpp"

#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "robinlab/errors.hpp"

namespace robinlab {

namespace {

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

double parse_number(const std::string& field, const std::string& text) {
  const char* begin = text.c_str();
  char* end = nullptr;
  double v = std::strtod(begin, &end);
  if (end == begin || trim(end).size() > 0)
    throw ConfigError("config: malformed number in field '" + field + "'");
  return v;
}

std::vector<double> parse_array(const std::string& field, std::string text) {
  text = trim(text);
  if (text.size() < 2 || text.front() != '[' || text.back() != ']')
    throw ConfigError("config: field '" + field + "' expects [ ... ]");
  text = text.substr(1, text.size() - 2);
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty())
      throw ConfigError("config: empty entry in field '" + field + "'");
    out.push_back(parse_number(field, item));
  }
  if (out.empty())
    throw ConfigError("config: field '" + field + "' is empty");
  return out;
}

Eigen::Matrix2d parse_basis(std::string text) {
  text = trim(text);
  if (text.size() < 4 || text.front() != '[' || text.back() != ']')
    throw ConfigError("config: malformed field 'basis' (expected [[a,b],[c,d]])");
  std::string inner = trim(text.substr(1, text.size() - 2));
  // split on "],[" boundaries
  std::vector<std::string> rows;
  size_t pos = 0;
  while (pos < inner.size()) {
    size_t open = inner.find('[', pos);
    if (open == std::string::npos) break;
    size_t close = inner.find(']', open);
    if (close == std::string::npos)
      throw ConfigError("config: malformed field 'basis' (unbalanced brackets)");
    rows.push_back(inner.substr(open + 1, close - open - 1));
    pos = close + 1;
  }
  if (rows.size() != 2)
    throw ConfigError("config: malformed field 'basis' (expected two rows)");
  Eigen::Matrix2d b;
  for (int r = 0; r < 2; ++r) {
    std::vector<double> vals = parse_array("basis", "[" + rows[r] + "]");
    if (vals.size() != 2)
      throw ConfigError("config: malformed field 'basis' (rows need two entries)");
    b(r, 0) = vals[0];
    b(r, 1) = vals[1];
  }
  return b;
}

std::string parse_string(const std::string& field, std::string text) {
  text = trim(text);
  if (text.size() < 2 || text.front() != '"' || text.back() != '"')
    throw ConfigError("config: field '" + field + "' expects a quoted string");
  return text.substr(1, text.size() - 2);
}

}  // namespace

std::string emit_config(const RunConfig& c) {
  std::ostringstream os;
  os << "surface = \"" << c.surface << "\"\n";
  if (c.surface == "sphere") {
    os << "n = " << c.n << "\n";
    os << "volume = " << fmt(c.volume) << "\n";
  } else {
    os << "basis = [[" << fmt(c.basis(0, 0)) << ", " << fmt(c.basis(0, 1))
       << "], [" << fmt(c.basis(1, 0)) << ", " << fmt(c.basis(1, 1)) << "]]\n";
  }
  os << "truncation = " << c.truncation << "\n";
  os << "resolution = " << c.resolution << "\n";
  os << "eps_schedule = [";
  for (size_t i = 0; i < c.eps_schedule.size(); ++i)
    os << (i ? ", " : "") << fmt(c.eps_schedule[i]);
  os << "]\n";
  os << "tol = " << fmt(c.tol) << "\n";
  os << "budget = " << c.budget << "\n";
  os << "seed = " << c.seed << "\n";
  os << "samples = " << c.samples << "\n";
  os << "start = \"" << c.start << "\"\n";
  os << "out = \"" << c.out << "\"\n";
  return os.str();
}

RunConfig parse_config(const std::string& text) {
  RunConfig c;
  std::stringstream ss(text);
  std::string line;
  while (std::getline(ss, line)) {
    size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config: expected 'key = value', got '" + line + "'");
    std::string key = trim(line.substr(0, eq));
    std::string val = trim(line.substr(eq + 1));
    if (key == "surface") {
      c.surface = parse_string(key, val);
      if (c.surface != "sphere" && c.surface != "torus")
        throw ConfigError("config: field 'surface' must be \"sphere\" or \"torus\"");
    } else if (key == "n") {
      c.n = int(parse_number(key, val));
    } else if (key == "volume") {
      c.volume = parse_number(key, val);
    } else if (key == "basis") {
      c.basis = parse_basis(val);
    } else if (key == "truncation") {
      c.truncation = int(parse_number(key, val));
    } else if (key == "resolution") {
      c.resolution = int(parse_number(key, val));
    } else if (key == "eps_schedule") {
      c.eps_schedule = parse_array(key, val);
    } else if (key == "tol") {
      c.tol = parse_number(key, val);
    } else if (key == "budget") {
      c.budget = int(parse_number(key, val));
    } else if (key == "seed") {
      c.seed = std::uint64_t(parse_number(key, val));
    } else if (key == "samples") {
      c.samples = int(parse_number(key, val));
    } else if (key == "start") {
      c.start = parse_string(key, val);
    } else if (key == "out") {
      c.out = parse_string(key, val);
    } else {
      throw ConfigError("config: unknown field '" + key + "'");
    }
  }
  return c;
}

RunConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

}  // namespace robinlab
