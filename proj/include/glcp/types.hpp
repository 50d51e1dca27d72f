#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace glcp {

using NodeId = std::uint32_t;

enum class TaskKind { regression, classification };

enum class Split : std::uint8_t { train, valid, calib, test };

/// Malformed data: bad file contents, inconsistent tables, ids out of range.
class input_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Parameter outside its documented range.
class param_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline const char* to_string(Split s) {
  switch (s) {
    case Split::train: return "train";
    case Split::valid: return "valid";
    case Split::calib: return "calib";
    case Split::test: return "test";
  }
  throw param_error("unknown split value");
}

inline const char* to_string(TaskKind t) {
  return t == TaskKind::regression ? "regression" : "classification";
}

}  // namespace glcp
