#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

namespace smoge {

inline constexpr double kLog2Pi = 1.8378770664093454835606594728112;
inline constexpr double kLogTwo = 0.6931471805599453094172321214582;

// Invalid arguments, dimension mismatches, malformed configs.
class ConfigError : public std::invalid_argument {
public:
  explicit ConfigError(const std::string& what) : std::invalid_argument(what) {}
};

// Runtime numerical failures (non-finite objective, aborted fits).
class NumericalError : public std::runtime_error {
public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

// File format / parse failures.
class ParseError : public std::runtime_error {
public:
  explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

inline void require(bool cond, const std::string& what) {
  if (!cond) throw ConfigError(what);
}

}  // namespace smoge
