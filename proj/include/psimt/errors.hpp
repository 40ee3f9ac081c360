#pragma once

#include <stdexcept>
#include <string>

namespace psimt {

struct ZeroDivisor : std::runtime_error {
  explicit ZeroDivisor(const std::string& msg) : std::runtime_error(msg) {}
};

struct NotPureVector : std::runtime_error {
  explicit NotPureVector(const std::string& msg) : std::runtime_error(msg) {}
};

struct StencilOutsideDomain : std::runtime_error {
  explicit StencilOutsideDomain(const std::string& msg) : std::runtime_error(msg) {}
};

struct SingularPoint : std::runtime_error {
  explicit SingularPoint(const std::string& msg) : std::runtime_error(msg) {}
};

struct TooCloseToSurface : std::runtime_error {
  explicit TooCloseToSurface(const std::string& msg) : std::runtime_error(msg) {}
};

struct ParseError : std::runtime_error {
  ParseError(const std::string& msg, int line)
      : std::runtime_error(msg + " (line " + std::to_string(line) + ")"), line_number(line) {}
  int line_number;
};

struct OrientationError : std::runtime_error {
  explicit OrientationError(const std::string& msg) : std::runtime_error(msg) {}
};

struct ExtrapolationDiverged : std::runtime_error {
  explicit ExtrapolationDiverged(const std::string& msg) : std::runtime_error(msg) {}
};

struct DegenerateMesh : std::runtime_error {
  explicit DegenerateMesh(const std::string& msg) : std::runtime_error(msg) {}
};

struct MembershipFailed : std::runtime_error {
  explicit MembershipFailed(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace psimt
