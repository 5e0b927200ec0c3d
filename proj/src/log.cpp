#include "subadapt/log.hpp"

#include <iostream>
#include <mutex>
#include <utility>

namespace subadapt {
namespace {

std::mutex& sink_mutex() {
  static std::mutex m;
  return m;
}

WarningHandler& sink() {
  static WarningHandler h = [](const std::string& msg) { std::cerr << "warning: " << msg << '\n'; };
  return h;
}

}  // namespace

void warn(const std::string& message) {
  std::lock_guard<std::mutex> lock(sink_mutex());
  if (sink()) sink()(message);
}

WarningHandler set_warning_handler(WarningHandler handler) {
  std::lock_guard<std::mutex> lock(sink_mutex());
  return std::exchange(sink(), std::move(handler));
}

}  // namespace subadapt
