#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "nonloc/kernel.hpp"

namespace nonloc {

// Malformed key/value text. line and column are 1-based; 0 means "whole document".
class ParseError : public std::runtime_error {
 public:
  ParseError(int line, int column, const std::string& message);
  int line() const { return line_; }
  int column() const { return column_; }

 private:
  int line_;
  int column_;
};

struct SpecEntry {
  std::string key;
  std::string value;
  int line = 0;
  int value_column = 0;
};

// Ordered `key = value` entries. Order matters for transforms.
class KeyValueText {
 public:
  static KeyValueText parse(const std::string& text);
  static KeyValueText load(const std::string& path);

  const std::vector<SpecEntry>& entries() const { return entries_; }
  void add(const std::string& key, const std::string& value);
  const SpecEntry* find(const std::string& key) const;
  bool has(const std::string& key) const { return find(key) != nullptr; }

  std::string get(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  double require_double(const std::string& key) const;
  long get_int(const std::string& key, long fallback) const;
  std::vector<double> get_list(const std::string& key) const;

  std::string to_text() const;

 private:
  std::vector<SpecEntry> entries_;
};

double parse_number(const SpecEntry& e);
std::vector<double> parse_number_list(const SpecEntry& e);

// Builds a kernel from parsed text: `family`, `dimension`, family parameters, `norm`,
// then transforms (outside_ball, exclude_ball, cap, symmetrize) in file order.
Kernel construct(const KeyValueText& spec);
Kernel construct_from_text(const std::string& text);

}  // namespace nonloc
