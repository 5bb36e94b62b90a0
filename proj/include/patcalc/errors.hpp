#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace patcalc {

// Raised by the term/type parsers. `position` is a byte offset into the input.
struct ParseError : std::runtime_error {
  std::size_t position;
  ParseError(std::string msg, std::size_t pos)
      : std::runtime_error(std::move(msg) + " (at offset " + std::to_string(pos) + ")"),
        position(pos) {}
};

// A pattern binds the same variable twice.
struct LinearityError : std::runtime_error {
  std::string duplicated;
  explicit LinearityError(std::string name)
      : std::runtime_error("non-linear pattern: variable '" + name + "' bound twice"),
        duplicated(std::move(name)) {}
};

// An operation requiring a canonical form was handed something else.
struct NotCanonicalError : std::logic_error {
  explicit NotCanonicalError(const std::string& what) : std::logic_error(what) {}
};

// A derivation transformer was applied to a derivation of the wrong shape.
// `node_path` is a dotted premise-index path from the root ("" for the root).
struct ShapeMismatchError : std::logic_error {
  std::string node_path;
  ShapeMismatchError(std::string path, const std::string& detail)
      : std::logic_error("shape mismatch at node [" + path + "]: " + detail),
        node_path(std::move(path)) {}
};

// Malformed derivation document.
struct FormatError : std::runtime_error {
  explicit FormatError(const std::string& what) : std::runtime_error(what) {}
};

// The step budget ran out before a head normal form was reached.
struct NotHeadNormalizingError : std::runtime_error {
  explicit NotHeadNormalizingError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace patcalc
