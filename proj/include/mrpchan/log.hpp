#pragma once

#include <memory>

#include <spdlog/spdlog.h>

namespace mrpchan {

/// Library logger writing to stderr; level from MRPCHAN_LOG (trace..off, default warn).
spdlog::logger& logger();

}  // namespace mrpchan
