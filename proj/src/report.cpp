#include "phonecap/report.hpp"

#include <openssl/evp.h>

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iterator>
#include <memory>
#include <sstream>
#include <system_error>

#include "phonecap/core.hpp"

namespace phonecap {

namespace {

void check_text(std::string_view s, bool allow_tab) {
  if (s.find_first_of(allow_tab ? "\n\r" : "\n\r\t") != std::string_view::npos) {
    throw Error("report text may not contain line breaks" +
                std::string(allow_tab ? "" : " or tabs") + ": '" + std::string(s) + "'");
  }
}

std::vector<std::string> split_tabs(std::string_view line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = line.find('\t', start);
    out.emplace_back(line.substr(start, pos == std::string_view::npos ? pos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

}  // namespace

Report::KeyValues& Report::KeyValues::set(std::string key, std::string value) {
  check_text(key, false);
  check_text(value, true);
  if (key.find(" = ") != std::string::npos) throw Error("report key may not contain ' = '");
  for (auto& [k, v] : entries) {
    if (k == key) {
      v = std::move(value);
      return *this;
    }
  }
  entries.emplace_back(std::move(key), std::move(value));
  return *this;
}

const std::string* Report::KeyValues::find(std::string_view key) const {
  for (const auto& [k, v] : entries) {
    if (k == key) return &v;
  }
  return nullptr;
}

void Report::Table::add_row(std::vector<std::string> row) {
  if (row.size() != columns.size()) throw Error("report row width does not match its table");
  for (const auto& cell : row) check_text(cell, false);
  rows.push_back(std::move(row));
}

std::size_t Report::Table::column(std::string_view name) const {
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (columns[i] == name) return i;
  }
  throw Error("report table has no column " + std::string(name));
}

Report::KeyValues& Report::kv(std::string_view section) {
  for (auto& s : sections_) {
    if (s.name == section) {
      if (auto* body = std::get_if<KeyValues>(&s.body)) return *body;
      throw Error("report section " + s.name + " is a table");
    }
  }
  check_text(section, false);
  sections_.push_back({std::string(section), KeyValues{}});
  return std::get<KeyValues>(sections_.back().body);
}

Report::Table& Report::table(std::string_view section, std::vector<std::string> columns) {
  for (auto& s : sections_) {
    if (s.name == section) {
      if (auto* body = std::get_if<Table>(&s.body)) return *body;
      throw Error("report section " + s.name + " is not a table");
    }
  }
  check_text(section, false);
  for (const auto& c : columns) check_text(c, false);
  sections_.push_back({std::string(section), Table{std::move(columns), {}}});
  return std::get<Table>(sections_.back().body);
}

const Report::KeyValues* Report::find_kv(std::string_view section) const {
  for (const auto& s : sections_) {
    if (s.name == section) return std::get_if<KeyValues>(&s.body);
  }
  return nullptr;
}

const Report::Table* Report::find_table(std::string_view section) const {
  for (const auto& s : sections_) {
    if (s.name == section) return std::get_if<Table>(&s.body);
  }
  return nullptr;
}

const std::string& Report::value(std::string_view section, std::string_view key) const {
  const auto* kvs = find_kv(section);
  const std::string* v = kvs ? kvs->find(key) : nullptr;
  if (v == nullptr) {
    throw Error("report has no " + std::string(section) + "." + std::string(key));
  }
  return *v;
}

std::string Report::to_string() const {
  std::ostringstream os;
  bool first = true;
  for (const auto& s : sections_) {
    if (!first) os << '\n';
    first = false;
    if (const auto* kvs = std::get_if<KeyValues>(&s.body)) {
      os << '[' << s.name << "]\n";
      for (const auto& [k, v] : kvs->entries) os << k << " = " << v << '\n';
    } else {
      const auto& t = std::get<Table>(s.body);
      os << '[' << s.name << ":table]\n";
      auto write_row = [&](const std::vector<std::string>& row) {
        for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "\t" : "") << row[i];
        os << '\n';
      };
      write_row(t.columns);
      for (const auto& row : t.rows) write_row(row);
    }
  }
  return os.str();
}

Report Report::parse(std::string_view text, std::string_view source) {
  Report report;
  Section* current = nullptr;
  bool expect_columns = false;
  std::size_t lineno = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(pos, nl - pos);
    pos = nl + 1;
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;

    if (line.front() == '[' && line.back() == ']') {
      std::string_view name = line.substr(1, line.size() - 2);
      constexpr std::string_view kTableSuffix = ":table";
      if (name.size() > kTableSuffix.size() && name.ends_with(kTableSuffix)) {
        name.remove_suffix(kTableSuffix.size());
        report.sections_.push_back({std::string(name), Table{}});
        expect_columns = true;
      } else {
        report.sections_.push_back({std::string(name), KeyValues{}});
        expect_columns = false;
      }
      current = &report.sections_.back();
      continue;
    }
    if (current == nullptr) throw ParseError(source, lineno, "content before first section");

    if (auto* kvs = std::get_if<KeyValues>(&current->body)) {
      const auto eq = line.find(" = ");
      if (eq == std::string_view::npos) throw ParseError(source, lineno, "expected 'key = value'");
      kvs->entries.emplace_back(std::string(line.substr(0, eq)), std::string(line.substr(eq + 3)));
    } else {
      auto& t = std::get<Table>(current->body);
      auto cells = split_tabs(line);
      if (expect_columns) {
        t.columns = std::move(cells);
        expect_columns = false;
      } else {
        if (cells.size() != t.columns.size()) {
          throw ParseError(source, lineno, "table row width does not match its header");
        }
        t.rows.push_back(std::move(cells));
      }
    }
  }
  return report;
}

Report Report::load(const std::filesystem::path& path) {
  return parse(read_file(path), path.string());
}

void Report::save(const std::filesystem::path& path) const { write_file_atomic(path, to_string()); }

std::string format_number(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  std::array<char, 64> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  if (ec != std::errc{}) throw Error("cannot format number");
  return std::string(buf.data(), ptr);
}

double parse_number(std::string_view text) {
  if (text == "nan") return std::nan("");
  if (text == "inf") return INFINITY;
  if (text == "-inf") return -INFINITY;
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    throw Error("not a number: '" + std::string(text) + "'");
  }
  return value;
}

std::string sha256_hex(std::string_view data) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest.data(), &len, EVP_sha256(), nullptr) != 1) {
    throw Error("SHA-256 digest failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(len * 2);
  for (unsigned int i = 0; i < len; ++i) {
    out += kHex[digest[i] >> 4];
    out += kHex[digest[i] & 0xf];
  }
  return out;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

std::string sha256_file(const std::filesystem::path& path) { return sha256_hex(read_file(path)); }

void write_file_atomic(const std::filesystem::path& path, std::string_view content) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) throw Error("write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    throw Error("cannot rename " + tmp.string() + " to " + path.string() + ": " + ec.message());
  }
}

}  // namespace phonecap
