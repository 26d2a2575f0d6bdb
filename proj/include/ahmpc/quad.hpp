#pragma once

// Quad-precision scalar for reference computations (residual-order checks
// need coefficients well below double rounding). Requires GNU extensions and
// libquadmath.

#include <boost/multiprecision/float128.hpp>
#include <boost/multiprecision/eigen.hpp>

namespace ahmpc {

using Quad = boost::multiprecision::float128;

}  // namespace ahmpc
