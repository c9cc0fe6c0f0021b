#pragma once

// RFC-4180 writing and a small reader for configuration tables.

#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace adtracker::csv {

// Quotes when the field holds a comma, quote, CR or LF, or when forced.
void write_field(std::ostream& out, std::string_view field, bool force_quote = false);

class Writer {
 public:
  explicit Writer(std::ostream& out) : out_(out) {}

  Writer& field(std::string_view value, bool force_quote = false);
  // Terminates the current record with CRLF.
  void end_row();

 private:
  std::ostream& out_;
  bool row_started_ = false;
};

// Parses a whole document. Accepts CRLF or LF line endings; a trailing
// newline does not produce an empty record. Throws std::runtime_error on an
// unterminated quoted field.
std::vector<std::vector<std::string>> parse(std::string_view text);

}  // namespace adtracker::csv
