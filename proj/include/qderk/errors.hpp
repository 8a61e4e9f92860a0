// Copyright (c) 2026 The qderk authors.
// Distributed under the MIT license; see LICENSE for details.

#pragma once

#include <stdexcept>
#include <string>

namespace qderk {

// Bad user input: wrong order parity, malformed documents, invalid flags.
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

// A structurally singular block: the requested free parameters do not admit a
// solution of the construction systems.
class InfeasibleError : public std::runtime_error {
 public:
  InfeasibleError(const std::string& what, int level = -1, int block = -1)
      : std::runtime_error(what), level_(level), block_(block) {}
  int level() const { return level_; }
  int block() const { return block_; }

 private:
  int level_;
  int block_;
};

// A produced tableau failed its order re-verification.
class VerificationError : public std::runtime_error {
 public:
  explicit VerificationError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace qderk
