#pragma once

// Plain-text report document: an ordered list of sections, each either
// key/value pairs or a tab-separated table.
//
//   [meta]
//   schema_version = 1
//
//   [corpus:table]
//   metric<TAB>value
//   BLEU4<TAB>36.1
//
// Field order is preserved on write and parse. Keys, values and cells may not
// contain newlines; table cells may not contain tabs.

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

namespace phonecap {

inline constexpr int kReportSchemaVersion = 1;

class Report {
 public:
  struct KeyValues {
    std::vector<std::pair<std::string, std::string>> entries;

    KeyValues& set(std::string key, std::string value);
    const std::string* find(std::string_view key) const;
  };

  struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;

    void add_row(std::vector<std::string> row);
    std::size_t column(std::string_view name) const;  // throws when absent
  };

  // Get-or-create; sections keep their creation order.
  KeyValues& kv(std::string_view section);
  Table& table(std::string_view section, std::vector<std::string> columns);

  const KeyValues* find_kv(std::string_view section) const;
  const Table* find_table(std::string_view section) const;
  // Value of `key` in key/value `section`; throws when absent.
  const std::string& value(std::string_view section, std::string_view key) const;

  std::string to_string() const;
  static Report parse(std::string_view text, std::string_view source = "<report>");
  static Report load(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;

 private:
  struct Section {
    std::string name;
    std::variant<KeyValues, Table> body;
  };
  std::vector<Section> sections_;
};

// Shortest decimal that reads back to the same double.
std::string format_number(double value);
double parse_number(std::string_view text);

std::string sha256_hex(std::string_view data);
std::string sha256_file(const std::filesystem::path& path);
std::string read_file(const std::filesystem::path& path);

// Writes to a sibling temporary file, then renames over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

}  // namespace phonecap
