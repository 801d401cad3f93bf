#pragma once

// Umbrella header for the charpoly library.

#include "charpoly/acceptance.hpp"
#include "charpoly/asymptotics.hpp"
#include "charpoly/errors.hpp"
#include "charpoly/fn_eval.hpp"
#include "charpoly/log_complex.hpp"
#include "charpoly/moments.hpp"
#include "charpoly/pfaffian.hpp"
#include "charpoly/quadrature.hpp"
#include "charpoly/results.hpp"
#include "charpoly/rmt.hpp"
#include "charpoly/rng.hpp"
#include "charpoly/special.hpp"

namespace charpoly {
inline constexpr const char* kVersionTag = "charpoly 1.0.0";
}
