#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace headroom {

/** RFC-4180 reader over an in-memory buffer. Accepts LF and CRLF line ends; quoted fields may span lines. */
class CsvReader {
 public:
  explicit CsvReader(std::string text, std::string source_name = "<memory>");

  /** Reads the next record into `fields`; returns false at end of input. */
  bool next(std::vector<std::string>& fields);

  /** 1-based physical line on which the last returned record started. */
  std::size_t line() const { return record_line_; }

  const std::string& source_name() const { return source_name_; }

 private:
  std::string text_;
  std::string source_name_;
  std::size_t pos_ = 0;
  std::size_t current_line_ = 1;
  std::size_t record_line_ = 0;
};

/** Quotes a field when it contains a separator, quote, line break, or is empty. */
std::string csv_escape(std::string_view field);

}  // namespace headroom
