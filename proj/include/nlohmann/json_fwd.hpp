#pragma once

// The vendored single header embeds its own forward declarations; including
// it here trades a little compile time for version-proof declarations.
#include <json.hpp>
