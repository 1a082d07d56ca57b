#include "robinlab/report.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "robinlab/errors.hpp"

namespace robinlab {

std::string format_real(double v) {
  if (!std::isfinite(v)) return "null";
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

Json Json::boolean(bool b) {
  Json j;
  j.type_ = Type::Bool;
  j.b_ = b;
  return j;
}
Json Json::integer(std::int64_t v) {
  Json j;
  j.type_ = Type::Int;
  j.i_ = v;
  return j;
}
Json Json::real(double v) {
  Json j;
  j.type_ = Type::Real;
  j.r_ = v;
  return j;
}
Json Json::str(std::string s) {
  Json j;
  j.type_ = Type::Str;
  j.s_ = std::move(s);
  return j;
}
Json Json::array() {
  Json j;
  j.type_ = Type::Arr;
  return j;
}
Json Json::object() {
  Json j;
  j.type_ = Type::Obj;
  return j;
}

Json& Json::push(Json v) {
  arr_.push_back(std::move(v));
  return *this;
}

Json& Json::set(const std::string& key, Json v) {
  obj_.emplace_back(key, std::move(v));
  return *this;
}

namespace {
void write_escaped(std::string& out, const std::string& s) {
  out += '"';
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      case '\r': out += "\\r"; break;
      default: out += c;
    }
  }
  out += '"';
}
}  // namespace

void Json::write(std::string& out, int indent) const {
  const std::string pad(size_t(indent) * 2, ' ');
  const std::string pad_in(size_t(indent + 1) * 2, ' ');
  switch (type_) {
    case Type::Null: out += "null"; break;
    case Type::Bool: out += b_ ? "true" : "false"; break;
    case Type::Int: out += std::to_string(i_); break;
    case Type::Real: out += format_real(r_); break;
    case Type::Str: write_escaped(out, s_); break;
    case Type::Arr: {
      if (arr_.empty()) {
        out += "[]";
        break;
      }
      out += "[\n";
      for (size_t i = 0; i < arr_.size(); ++i) {
        out += pad_in;
        arr_[i].write(out, indent + 1);
        if (i + 1 < arr_.size()) out += ',';
        out += '\n';
      }
      out += pad + "]";
      break;
    }
    case Type::Obj: {
      if (obj_.empty()) {
        out += "{}";
        break;
      }
      out += "{\n";
      for (size_t i = 0; i < obj_.size(); ++i) {
        out += pad_in;
        write_escaped(out, obj_[i].first);
        out += ": ";
        obj_[i].second.write(out, indent + 1);
        if (i + 1 < obj_.size()) out += ',';
        out += '\n';
      }
      out += pad + "}";
      break;
    }
  }
}

std::string Json::dump() const {
  std::string out;
  write(out, 0);
  out += '\n';
  return out;
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  out << text;
}

void dump_csv(const std::string& path, const Eigen::VectorXd& values) {
  std::ostringstream os;
  os << "index,value\n";
  for (Eigen::Index i = 0; i < values.size(); ++i)
    os << i << "," << format_real(values(i)) << "\n";
  write_text_file(path, os.str());
}

Eigen::VectorXd read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path + "'");
  std::string line;
  std::vector<double> vals;
  bool first = true;
  while (std::getline(in, line)) {
    if (first) {
      first = false;
      continue;  // header
    }
    if (line.empty()) continue;
    size_t comma = line.find(',');
    if (comma == std::string::npos) throw Error("malformed CSV row: " + line);
    vals.push_back(std::strtod(line.c_str() + comma + 1, nullptr));
  }
  Eigen::VectorXd out(Eigen::Index(vals.size()));
  for (size_t i = 0; i < vals.size(); ++i) out(Eigen::Index(i)) = vals[i];
  return out;
}

}  // namespace robinlab
