#pragma once

// Thin shim: the project vendors nlohmann/json as a flat single header; this
// keeps the conventional include path working.
#include <json.hpp>
