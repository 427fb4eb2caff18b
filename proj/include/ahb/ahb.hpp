#pragma once

// Umbrella header for the adaptive Hessian-barrier toolkit.

#include "ahba.hpp"
#include "barrier.hpp"
#include "certification.hpp"
#include "cubic.hpp"
#include "errors.hpp"
#include "harness.hpp"
#include "linear_geometry.hpp"
#include "model.hpp"
#include "problems.hpp"
#include "sahba.hpp"
#include "trace.hpp"
#include "types.hpp"
