#include "spl/kv.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include <fmt/format.h>

#include "spl/error.hpp"

namespace spl {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split_list(std::string_view s) {
  std::vector<std::string_view> out;
  s = trim(s);
  if (s.empty()) return out;
  std::size_t start = 0;
  while (true) {
    const auto comma = s.find(',', start);
    out.push_back(trim(s.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

}  // namespace

std::string format_double(double value) {
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  if (std::isnan(value)) return "nan";
  return fmt::format("{:.17g}", value);
}

double parse_double(std::string_view text, const std::string& context) {
  text = trim(text);
  if (text == "inf" || text == "+inf") return std::numeric_limits<double>::infinity();
  if (text == "-inf") return -std::numeric_limits<double>::infinity();
  double value = 0.0;
  const char* begin = text.data();
  const char* end = text.data() + text.size();
  if (!text.empty() && *begin == '+') ++begin;
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end || text.empty()) {
    throw Error(Errc::Parse, fmt::format("{}: '{}' is not a number", context, text));
  }
  return value;
}

KvDocument KvDocument::parse(std::string_view text, const std::string& source) {
  KvDocument doc;
  doc.source_ = source;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    const auto raw = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    ++line_no;
    const auto line = trim(raw);
    if (!line.empty() && line.front() != '#') {
      const auto eq = line.find('=');
      if (eq == std::string_view::npos) {
        throw Error(Errc::Parse, fmt::format("{}:{}: expected 'key = value'", source, line_no));
      }
      const auto key = trim(line.substr(0, eq));
      if (key.empty()) {
        throw Error(Errc::Parse, fmt::format("{}:{}: empty key", source, line_no));
      }
      doc.set(std::string(key), std::string(trim(line.substr(eq + 1))));
    }
    if (nl == std::string_view::npos) break;
    pos = nl + 1;
  }
  return doc;
}

KvDocument KvDocument::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::Io, fmt::format("cannot open '{}'", path));
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse(buffer.str(), path);
}

void KvDocument::set(const std::string& key, std::string value) {
  for (auto& [k, v] : entries_) {
    if (k == key) {
      v = std::move(value);
      return;
    }
  }
  entries_.emplace_back(key, std::move(value));
}

void KvDocument::set(const std::string& key, double value) { set(key, format_double(value)); }
void KvDocument::set(const std::string& key, std::int64_t value) { set(key, std::to_string(value)); }
void KvDocument::set(const std::string& key, bool value) { set(key, std::string(value ? "true" : "false")); }

bool KvDocument::contains(const std::string& key) const { return find(key).has_value(); }

std::optional<std::string> KvDocument::find(const std::string& key) const {
  for (const auto& [k, v] : entries_) {
    if (k == key) return v;
  }
  return std::nullopt;
}

std::string KvDocument::get_string(const std::string& key) const {
  auto value = find(key);
  if (!value) throw Error(Errc::Parse, fmt::format("{}: missing required field '{}'", source_, key));
  return *value;
}

double KvDocument::get_double(const std::string& key) const {
  return parse_double(get_string(key), fmt::format("{}: field '{}'", source_, key));
}

std::int64_t KvDocument::get_int(const std::string& key) const {
  const auto text = get_string(key);
  std::int64_t value = 0;
  const auto t = trim(text);
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
  if (ec != std::errc() || ptr != t.data() + t.size() || t.empty()) {
    throw Error(Errc::Parse, fmt::format("{}: field '{}': '{}' is not an integer", source_, key, text));
  }
  return value;
}

bool KvDocument::get_bool(const std::string& key) const {
  const auto text = get_string(key);
  if (text == "true" || text == "1" || text == "yes") return true;
  if (text == "false" || text == "0" || text == "no") return false;
  throw Error(Errc::Parse, fmt::format("{}: field '{}': '{}' is not a boolean", source_, key, text));
}

std::vector<double> KvDocument::get_double_list(const std::string& key) const {
  std::vector<double> out;
  const std::string text = get_string(key);
  for (auto item : split_list(text)) {
    out.push_back(parse_double(item, fmt::format("{}: field '{}'", source_, key)));
  }
  return out;
}

std::vector<std::int64_t> KvDocument::get_int_list(const std::string& key) const {
  std::vector<std::int64_t> out;
  const std::string text = get_string(key);
  for (auto item : split_list(text)) {
    std::int64_t value = 0;
    const auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), value);
    if (ec != std::errc() || ptr != item.data() + item.size() || item.empty()) {
      throw Error(Errc::Parse, fmt::format("{}: field '{}': '{}' is not an integer", source_, key, item));
    }
    out.push_back(value);
  }
  return out;
}

double KvDocument::get_double_or(const std::string& key, double fallback) const {
  return contains(key) ? get_double(key) : fallback;
}

std::int64_t KvDocument::get_int_or(const std::string& key, std::int64_t fallback) const {
  return contains(key) ? get_int(key) : fallback;
}

bool KvDocument::get_bool_or(const std::string& key, bool fallback) const {
  return contains(key) ? get_bool(key) : fallback;
}

std::string KvDocument::get_string_or(const std::string& key, const std::string& fallback) const {
  return find(key).value_or(fallback);
}

KvDocument KvDocument::subtree(const std::string& prefix) const {
  KvDocument out;
  out.source_ = source_;
  const std::string lead = prefix + ".";
  for (const auto& [k, v] : entries_) {
    if (k.rfind(lead, 0) == 0) out.entries_.emplace_back(k.substr(lead.size()), v);
  }
  return out;
}

void KvDocument::merge(const std::string& prefix, const KvDocument& other) {
  for (const auto& [k, v] : other.entries_) {
    set(prefix.empty() ? k : prefix + "." + k, v);
  }
}

std::string KvDocument::render() const {
  std::string out;
  for (const auto& [k, v] : entries_) {
    out += k;
    out += " = ";
    out += v;
    out += '\n';
  }
  return out;
}

void KvDocument::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw Error(Errc::Io, fmt::format("cannot write '{}'", path));
  out << render();
}

}  // namespace spl
