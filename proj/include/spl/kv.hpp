#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace spl {

// Flat `key = value` document. Lines starting with '#' are comments. Keys
// keep insertion order so rendered files are stable across runs.
class KvDocument {
 public:
  static KvDocument parse(std::string_view text, const std::string& source = "<memory>");
  static KvDocument load(const std::string& path);

  void set(const std::string& key, std::string value);
  void set(const std::string& key, double value);
  void set(const std::string& key, std::int64_t value);
  void set(const std::string& key, int value) { set(key, static_cast<std::int64_t>(value)); }
  void set(const std::string& key, bool value);

  bool contains(const std::string& key) const;
  std::optional<std::string> find(const std::string& key) const;

  // Typed accessors throw Errc::Parse naming the key (and source) on failure.
  std::string get_string(const std::string& key) const;
  double get_double(const std::string& key) const;
  std::int64_t get_int(const std::string& key) const;
  bool get_bool(const std::string& key) const;
  std::vector<double> get_double_list(const std::string& key) const;
  std::vector<std::int64_t> get_int_list(const std::string& key) const;

  double get_double_or(const std::string& key, double fallback) const;
  std::int64_t get_int_or(const std::string& key, std::int64_t fallback) const;
  bool get_bool_or(const std::string& key, bool fallback) const;
  std::string get_string_or(const std::string& key, const std::string& fallback) const;

  // Keys under `prefix.` with the prefix stripped.
  KvDocument subtree(const std::string& prefix) const;
  void merge(const std::string& prefix, const KvDocument& other);

  std::string render() const;
  void save(const std::string& path) const;

  const std::vector<std::pair<std::string, std::string>>& entries() const { return entries_; }
  const std::string& source() const { return source_; }

 private:
  std::vector<std::pair<std::string, std::string>> entries_;
  std::string source_ = "<memory>";
};

// 17 significant digits, so every finite double round-trips. Infinities
// render as "inf"/"-inf".
std::string format_double(double value);
double parse_double(std::string_view text, const std::string& context);

}  // namespace spl
