#pragma once

// Terminal cost and feedback for the pendulum from the power series of the
// infinite-horizon problem, with the cost completed to a sum of squares.

#include "ahmpc/albrekht.hpp"
#include "ahmpc/controller.hpp"
#include "ahmpc/plant.hpp"
#include "ahmpc/sos.hpp"

namespace ahmpc {

struct TerminalBuild {
  TerminalPair pair;
  ValueFeedbackSeries series;  // V degrees 2..d+1, kappa degrees 1..d
  SquareCompletion completion;
};

// d = 1: LQR quadratic and linear gain. d = 3, 5: series to degrees (d+1, d)
// and completed cost of degree 2d. Throws std::invalid_argument otherwise.
TerminalBuild build_terminal(int d, const PendulumParams& params = {});

}  // namespace ahmpc
