#pragma once

// Channel files: JSON with dims, optional labels, and either a normalized
// Choi matrix or Kraus operators, complex entries as [re, im] pairs in
// row-major order.

#include "entcost/tensorcore.hpp"

#include <json.hpp>

#include <string>

namespace entcost::app {

/// Malformed or unreadable file; maps to exit code 2.
class FileError : public InputError {
 public:
  using InputError::InputError;
};

struct ChannelFile {
  std::string name;
  std::string description;
  ChoiChannel channel;
  /// Extra top-level fields preserved on write (e.g. a stored plan).
  nlohmann::json extra = nlohmann::json::object();
};

/// Labels used when a file gives dims only: A / A,B / A,A',B,B'.
std::vector<std::string> default_labels(std::size_t n);

ChannelFile parse_channel(const nlohmann::json& j, const std::string& origin = "<json>");
nlohmann::json to_json(const ChannelFile& f);

ChannelFile read_channel(const std::string& path);
void write_channel(const std::string& path, const ChannelFile& f);

nlohmann::json matrix_to_json(const CMat& m);
CMat matrix_from_json(const nlohmann::json& j, const std::string& what);

}  // namespace entcost::app
