#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace robinlab {

/// Minimal ordered JSON value for run reports.  Objects keep insertion
/// order and every floating value is serialized with 17 significant digits,
/// so identical runs produce byte-identical reports.
class Json {
 public:
  enum class Type { Null, Bool, Int, Real, Str, Arr, Obj };

  Json() : type_(Type::Null) {}
  static Json boolean(bool b);
  static Json integer(std::int64_t v);
  static Json real(double v);
  static Json str(std::string s);
  static Json array();
  static Json object();

  Json& push(Json v);                       // array append
  Json& set(const std::string& key, Json v);  // object insert
  void write(std::string& out, int indent = 0) const;
  std::string dump() const;

 private:
  Type type_;
  bool b_ = false;
  std::int64_t i_ = 0;
  double r_ = 0.0;
  std::string s_;
  std::vector<Json> arr_;
  std::vector<std::pair<std::string, Json>> obj_;
};

std::string format_real(double v);

void write_text_file(const std::string& path, const std::string& text);

/// CSV dump of a field: header "index,value", one row per sample.
void dump_csv(const std::string& path, const Eigen::VectorXd& values);

/// Reads a two-column CSV written by dump_csv.
Eigen::VectorXd read_csv(const std::string& path);

}  // namespace robinlab
