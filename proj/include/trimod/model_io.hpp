#pragma once

#include <filesystem>
#include <iosfwd>

#include "trimod/bundle.hpp"

namespace trimod {

/// Raised for unreadable or unsupported model files.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Model file layout:
///
///   TRIMOD1\n                      magic
///   version 1\n
///   section <name> <count>\n       followed by <count> entry lines
///   ...
///   end\n
///   payload                        float32 little-endian values
///
/// Sections: vocab.word, vocab.char, vocab.seg (one escaped entry per line),
/// model and config (`key = value`), tensors (`name rank d_1 ... d_rank`).
/// Tensors appear in lexicographic name order and the payload concatenates
/// their row-major values in that order.
void save_bundle(const ModelBundle& bundle, std::ostream& out);
void save_bundle(const ModelBundle& bundle, const std::filesystem::path& path);

ModelBundle load_bundle(std::istream& in, const std::string& source = "<stream>");
ModelBundle load_bundle(const std::filesystem::path& path);

}  // namespace trimod
