#include "headroom/csv.hpp"

#include "headroom/error.hpp"

namespace headroom {

CsvReader::CsvReader(std::string text, std::string source_name)
    : text_(std::move(text)), source_name_(std::move(source_name)) {
  if (text_.size() >= 3 && text_.compare(0, 3, "\xEF\xBB\xBF") == 0) pos_ = 3;
}

bool CsvReader::next(std::vector<std::string>& fields) {
  fields.clear();
  if (pos_ >= text_.size()) return false;

  record_line_ = current_line_;
  std::string field;
  bool quoted = false;
  bool field_was_quoted = false;

  while (pos_ < text_.size()) {
    const char c = text_[pos_];
    if (quoted) {
      if (c == '"') {
        if (pos_ + 1 < text_.size() && text_[pos_ + 1] == '"') {
          field.push_back('"');
          pos_ += 2;
        } else {
          quoted = false;
          ++pos_;
        }
      } else {
        if (c == '\n') ++current_line_;
        field.push_back(c);
        ++pos_;
      }
      continue;
    }

    if (c == '"') {
      if (!field.empty() || field_was_quoted) {
        throw Error("data", source_name_ + ":" + std::to_string(current_line_) + ": stray quote inside field");
      }
      quoted = true;
      field_was_quoted = true;
      ++pos_;
    } else if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
      field_was_quoted = false;
      ++pos_;
    } else if (c == '\r' || c == '\n') {
      if (c == '\r' && pos_ + 1 < text_.size() && text_[pos_ + 1] == '\n') ++pos_;
      ++pos_;
      ++current_line_;
      fields.push_back(std::move(field));
      return true;
    } else {
      if (field_was_quoted) {
        throw Error("data", source_name_ + ":" + std::to_string(current_line_) + ": text after closing quote");
      }
      field.push_back(c);
      ++pos_;
    }
  }

  if (quoted) throw Error("data", source_name_ + ":" + std::to_string(record_line_) + ": unterminated quoted field");
  fields.push_back(std::move(field));
  return true;
}

std::string csv_escape(std::string_view field) {
  const bool needs_quotes = field.empty() || field.find_first_of(",\"\r\n") != std::string_view::npos;
  if (!needs_quotes) return std::string(field);
  std::string out = "\"";
  for (const char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

}  // namespace headroom
