#include "shapeseg/common/log.hpp"

#include <iostream>
#include <mutex>

namespace shapeseg::log {
namespace {

std::mutex g_mutex;
bool g_custom = false;
Sink g_sink;

}  // namespace

void set_warning_sink(Sink sink) {
  std::lock_guard lock(g_mutex);
  g_custom = true;
  g_sink = std::move(sink);
}

void reset_warning_sink() {
  std::lock_guard lock(g_mutex);
  g_custom = false;
  g_sink = nullptr;
}

void warn(const std::string& message) {
  std::lock_guard lock(g_mutex);
  if (!g_custom) {
    std::cerr << "warning: " << message << '\n';
  } else if (g_sink) {
    g_sink(message);
  }
}

}  // namespace shapeseg::log
