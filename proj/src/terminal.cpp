#include "ahmpc/terminal.hpp"

#include <stdexcept>

namespace ahmpc {

TerminalBuild build_terminal(int d, const PendulumParams& params) {
  if (d != 1 && d != 3 && d != 5) {
    throw std::invalid_argument("terminal degree must be 1, 3 or 5");
  }
  TerminalBuild b;
  b.series = albrekht(taylor_dynamics(params, d), pendulum_lagrangian().as_polynomial(), d);
  b.completion = complete_squares(b.series.V);
  b.pair.degree = d;
  b.pair.V_f = b.completion.W;
  b.pair.kappa = b.series.kappa;
  return b;
}

}  // namespace ahmpc
