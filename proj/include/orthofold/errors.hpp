#pragma once

#include <stdexcept>
#include <string>

namespace orthofold {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed numeric input: non-finite entries, wrong shapes, invalid representatives.
class InputError : public Error {
 public:
  using Error::Error;
};

/// Stabilizer data that does not describe a subgroup consistently.
class ClassificationError : public Error {
 public:
  using Error::Error;
};

/// Slice representation weights could not be recovered within tolerance.
class ExtractionError : public Error {
 public:
  using Error::Error;
};

/// An isostabilizer block met more than one Klein block.
class WellDefinednessError : public Error {
 public:
  WellDefinednessError(std::size_t block, const std::string& what)
      : Error(what), block_(block) {}
  std::size_t block() const { return block_; }

 private:
  std::size_t block_;
};

/// Lookup of an action id that is not in the catalog.
class UnknownActionError : public Error {
 public:
  using Error::Error;
};

}  // namespace orthofold
