// Copyright 2026 The atmg-lab Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef ATMG_COMMON_HPP_
#define ATMG_COMMON_HPP_

#include <cstdint>
#include <sstream>
#include <stdexcept>
#include <string>

namespace atmg {

// Error taxonomy mirrored by the C API status codes and the CLI exit codes.
class UsageError : public std::runtime_error {
 public:
  explicit UsageError(const std::string& what) : std::runtime_error(what) {}
};

class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(const std::string& what)
      : std::runtime_error(what) {}
};

class ParseError : public std::runtime_error {
 public:
  explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

enum class LogLevel { kError = 0, kWarn = 1, kInfo = 2, kDebug = 3 };

// Current level comes from the ATMG_LOG_LEVEL environment variable
// (error|warn|info|debug); defaults to warn.
LogLevel log_level();
void log_message(LogLevel level, const std::string& msg);

#define ATMG_LOG(level, expr)                                  \
  do {                                                         \
    if (static_cast<int>(level) <=                             \
        static_cast<int>(::atmg::log_level())) {               \
      std::ostringstream atmg_log_oss;                         \
      atmg_log_oss << expr;                                    \
      ::atmg::log_message(level, atmg_log_oss.str());          \
    }                                                          \
  } while (0)

#define ATMG_WARN(expr) ATMG_LOG(::atmg::LogLevel::kWarn, expr)
#define ATMG_INFO(expr) ATMG_LOG(::atmg::LogLevel::kInfo, expr)
#define ATMG_DEBUG(expr) ATMG_LOG(::atmg::LogLevel::kDebug, expr)

#define ATMG_CHECK(cond, exception_type, expr)  \
  do {                                          \
    if (!(cond)) {                              \
      std::ostringstream atmg_chk_oss;          \
      atmg_chk_oss << expr;                     \
      throw exception_type(atmg_chk_oss.str()); \
    }                                           \
  } while (0)

}  // namespace atmg

#endif  // ATMG_COMMON_HPP_
