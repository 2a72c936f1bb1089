#pragma once

#include <functional>
#include <string_view>

namespace edis::log {

using Sink = std::function<void(std::string_view)>;

// Replaces the warning sink and returns the previous one. An empty sink
// silences warnings. The default sink writes "warning: <msg>" to stderr.
Sink set_warning_sink(Sink sink);

void warn(std::string_view message);

// Restores the previous sink on destruction. Handy in tests.
class ScopedSink {
 public:
  explicit ScopedSink(Sink sink) : previous_(set_warning_sink(std::move(sink))) {}
  ~ScopedSink() { set_warning_sink(std::move(previous_)); }
  ScopedSink(const ScopedSink&) = delete;
  ScopedSink& operator=(const ScopedSink&) = delete;

 private:
  Sink previous_;
};

}  // namespace edis::log
