#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace mlab::cli {

enum class Kind { text, real, integer, real_list, text_list };

struct KeySpec {
  Kind kind;
  std::string doc;
};

// A key ending in ".*" admits any suffix of the given kind.
using Schema = std::map<std::string, KeySpec>;

Schema schema_for(const std::string& command);

/// Flat `key = value` experiment file. Lines starting with '#' are comments,
/// lists are comma separated. Unknown keys and malformed values are rejected
/// at parse time.
class Config {
 public:
  Config() = default;
  static Config parse(std::string_view text, const Schema& schema, const std::string& origin = "<config>");
  static Config load(const std::string& path, const Schema& schema);

  bool has(const std::string& key) const { return raw_.count(key) > 0; }
  void set(const std::string& key, const std::string& value);

  std::string text(const std::string& key, const std::string& fallback) const;
  double real(const std::string& key, double fallback) const;
  long integer(const std::string& key, long fallback) const;
  std::vector<double> reals(const std::string& key, const std::vector<double>& fallback) const;
  std::vector<std::string> texts(const std::string& key, const std::vector<std::string>& fallback) const;
  std::map<std::string, double> prefixed(const std::string& prefix) const;

  /// Sorted `key=value` lines; the input of the config hash.
  std::string canonical() const;

 private:
  std::map<std::string, std::string> raw_;
  Schema schema_;
};

double parse_real(std::string_view s);
long parse_integer(std::string_view s);
std::vector<std::string> split_list(std::string_view s);

std::uint64_t fnv1a(std::string_view bytes);
std::string hex64(std::uint64_t v);

}  // namespace mlab::cli
