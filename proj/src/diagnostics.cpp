#include "mlcache/diagnostics.hpp"

#include <iostream>
#include <mutex>
#include <utility>

namespace mlcache {
namespace {

std::mutex& sink_mutex() {
  static std::mutex m;
  return m;
}

WarningSink& current_sink() {
  static WarningSink sink = [](std::string_view msg) {
    std::cerr << "warning: " << msg << '\n';
  };
  return sink;
}

}  // namespace

void set_warning_sink(WarningSink sink) {
  std::lock_guard lock(sink_mutex());
  current_sink() = std::move(sink);
}

void warn(std::string_view message) {
  std::lock_guard lock(sink_mutex());
  if (current_sink()) current_sink()(message);
}

ScopedWarningCapture::ScopedWarningCapture() {
  std::lock_guard lock(sink_mutex());
  previous_ = std::move(current_sink());
  current_sink() = [this](std::string_view msg) { messages_.emplace_back(msg); };
}

ScopedWarningCapture::~ScopedWarningCapture() {
  std::lock_guard lock(sink_mutex());
  current_sink() = std::move(previous_);
}

bool ScopedWarningCapture::contains(std::string_view needle) const {
  for (const auto& m : messages_)
    if (m.find(needle) != std::string::npos) return true;
  return false;
}

}  // namespace mlcache
