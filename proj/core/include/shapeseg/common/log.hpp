#pragma once

#include <functional>
#include <string>

namespace shapeseg::log {

using Sink = std::function<void(const std::string&)>;

// Warnings go to stderr unless a sink is installed. Installing an empty
// sink silences them.
void set_warning_sink(Sink sink);
void reset_warning_sink();
void warn(const std::string& message);

}  // namespace shapeseg::log
