#pragma once

#include "lhbs/config.hpp"
#include "lhbs/constants.hpp"
#include "lhbs/crlb.hpp"
#include "lhbs/errors.hpp"
#include "lhbs/channel.hpp"
#include "lhbs/estimators.hpp"
#include "lhbs/geometry.hpp"
#include "lhbs/harness.hpp"
#include "lhbs/protocol.hpp"
#include "lhbs/signals.hpp"

namespace lhbs {
inline constexpr const char* kVersion = "0.1.0";
}
