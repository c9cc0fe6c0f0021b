#include "adtracker/log.hpp"

#include <iostream>
#include <mutex>

namespace adtracker::log {

namespace {
std::mutex g_mutex;
std::ostream* g_sink = &std::clog;
}  // namespace

void event(std::string_view name, nlohmann::json fields) {
  std::lock_guard lock(g_mutex);
  if (!g_sink) return;
  nlohmann::json line = nlohmann::json::object();
  line["event"] = name;
  if (fields.is_object()) line.update(fields);
  *g_sink << line.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace) << '\n';
  g_sink->flush();
}

void set_sink(std::ostream* sink) {
  std::lock_guard lock(g_mutex);
  g_sink = sink;
}

}  // namespace adtracker::log
