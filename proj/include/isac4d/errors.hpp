#pragma once

#include <stdexcept>
#include <string>

namespace isac4d {

class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& msg) : Error(msg) {}
};

class DimensionError : public Error {
 public:
  explicit DimensionError(const std::string& msg) : Error(msg) {}
};

class DegenerateDictionaryError : public Error {
 public:
  explicit DegenerateDictionaryError(const std::string& msg) : Error(msg) {}
};

class IllConditionedSupportError : public Error {
 public:
  explicit IllConditionedSupportError(const std::string& msg) : Error(msg) {}
};

class InvalidPoseError : public Error {
 public:
  explicit InvalidPoseError(const std::string& msg) : Error(msg) {}
};

class MetricError : public Error {
 public:
  explicit MetricError(const std::string& msg) : Error(msg) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& msg) : Error(msg) {}
};

}  // namespace isac4d
