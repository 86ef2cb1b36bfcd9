#include "dmaps/diagnostics.hpp"

#include <iostream>
#include <mutex>

namespace dmaps {
namespace {

std::mutex sink_mutex;
WarningSink global_sink;
thread_local WarningCapture* active_capture = nullptr;

}  // namespace

void set_warning_sink(WarningSink sink) {
  std::scoped_lock lock(sink_mutex);
  global_sink = std::move(sink);
}

void warn(std::string_view message) {
  if (active_capture != nullptr) {
    active_capture->record(message);
    return;
  }
  std::scoped_lock lock(sink_mutex);
  if (global_sink) {
    global_sink(message);
  } else {
    std::cerr << "warning: " << message << '\n';
  }
}

WarningCapture::WarningCapture() : previous_(active_capture) { active_capture = this; }

WarningCapture::~WarningCapture() { active_capture = previous_; }

}  // namespace dmaps
