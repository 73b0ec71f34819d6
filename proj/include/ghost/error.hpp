#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace ghost {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed or truncated input. `offset` is the byte offset of the record
// (binary) or of the offending line (text) within `file`.
class ParseError : public Error {
 public:
  ParseError(std::string file, std::uint64_t offset, const std::string& what)
      : Error(file + " @ byte " + std::to_string(offset) + ": " + what),
        file_(std::move(file)),
        offset_(offset) {}

  const std::string& file() const noexcept { return file_; }
  std::uint64_t offset() const noexcept { return offset_; }

 private:
  std::string file_;
  std::uint64_t offset_;
};

// A record refers to an id that does not exist in the table it points into.
// Positioned at the referencing record when raised by the parser; file is
// "<memory>" for in-memory validation.
class DanglingReferenceError : public ParseError {
 public:
  DanglingReferenceError(std::string file, std::uint64_t offset,
                         const std::string& what, std::vector<std::uint64_t> ids)
      : ParseError(std::move(file), offset, what + format_ids(ids)),
        ids_(std::move(ids)) {}
  DanglingReferenceError(const std::string& what, std::vector<std::uint64_t> ids)
      : DanglingReferenceError("<memory>", 0, what, std::move(ids)) {}

  const std::vector<std::uint64_t>& ids() const noexcept { return ids_; }

 private:
  static std::string format_ids(const std::vector<std::uint64_t>& ids) {
    std::string out = " [";
    for (std::size_t i = 0; i < ids.size() && i < 16; ++i) {
      if (i) out += ", ";
      out += std::to_string(ids[i]);
    }
    if (ids.size() > 16) out += ", ...";
    return out + "]";
  }

  std::vector<std::uint64_t> ids_;
};

class InvariantError : public Error {
 public:
  using Error::Error;
};

class NoValidFramesError : public Error {
 public:
  NoValidFramesError() : Error("no frame produced a valid height intercept") {}
};

}  // namespace ghost
