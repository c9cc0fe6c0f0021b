#pragma once

// Structured JSON-lines event log.

#include <ostream>
#include <string_view>

#include <nlohmann/json.hpp>

namespace adtracker::log {

// Writes {"event": ..., <fields>} as one line. Thread-safe.
void event(std::string_view name, nlohmann::json fields = nlohmann::json::object());

// nullptr silences the log. Defaults to std::clog.
void set_sink(std::ostream* sink);

}  // namespace adtracker::log
