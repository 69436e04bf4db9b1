#pragma once

#include <stdexcept>
#include <string>

namespace carboncast {

// Error taxonomy mirrored by the CLI exit codes: config -> 2, data -> 3,
// numerical -> 4.

class config_error : public std::runtime_error {
public:
  explicit config_error(const std::string& msg) : std::runtime_error(msg) {}
};

class data_error : public std::runtime_error {
public:
  explicit data_error(const std::string& msg) : std::runtime_error(msg) {}
};

class numerical_error : public std::runtime_error {
public:
  explicit numerical_error(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace carboncast
