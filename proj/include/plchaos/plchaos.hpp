#pragma once

#include "plchaos/error.hpp"
#include "plchaos/params.hpp"
#include "plchaos/pl_core.hpp"
#include "plchaos/integrate.hpp"
#include "plchaos/equilibria.hpp"
#include "plchaos/poincare.hpp"
#include "plchaos/parallel.hpp"
#include "plchaos/geometry.hpp"
#include "plchaos/continuation.hpp"
#include "plchaos/manifold.hpp"
#include "plchaos/control.hpp"
#include "plchaos/lyapunov.hpp"

namespace plchaos {
inline constexpr const char* kVersion = "0.1.0";
}
