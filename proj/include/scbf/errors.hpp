#pragma once

#include <stdexcept>
#include <string>

namespace scbf {

/// An iterative method hit its iteration cap without meeting its tolerance.
class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed robot / scene / plan / CBF file. Carries the offending location.
class ParseError : public std::runtime_error {
 public:
  ParseError(std::string file, int line, std::string field, const std::string& what)
      : std::runtime_error(format(file, line, field, what)),
        file_(std::move(file)),
        line_(line),
        field_(std::move(field)) {}

  const std::string& file() const { return file_; }
  int line() const { return line_; }
  const std::string& field() const { return field_; }

 private:
  static std::string format(const std::string& file, int line, const std::string& field,
                            const std::string& what) {
    std::string out = file.empty() ? std::string("<input>") : file;
    if (line > 0) out += ":" + std::to_string(line);
    if (!field.empty()) out += ": field '" + field + "'";
    return out + ": " + what;
  }

  std::string file_;
  int line_ = 0;
  std::string field_;
};

}  // namespace scbf
