#pragma once

#include <functional>
#include <string>

namespace subadapt {

using WarningHandler = std::function<void(const std::string&)>;

/// Emit a non-fatal diagnostic. Defaults to stderr.
void warn(const std::string& message);

/// Replace the warning sink; returns the previous one.
WarningHandler set_warning_handler(WarningHandler handler);

}  // namespace subadapt
