#include "ahmpc/plant.hpp"

#include <stdexcept>

#include "ahmpc/jet.hpp"
#include "ahmpc/quad.hpp"

namespace ahmpc {

void PendulumParams::validate() const {
  if (!(l1 > 0 && l2 > 0 && m1 > 0 && m2 > 0 && c1 > 0 && c2 > 0 && g > 0 &&
        h > 0)) {
    throw std::invalid_argument("pendulum parameters must all be positive");
  }
}

template <typename T>
BasicTaylorMap<T> taylor_dynamics(const PendulumParams& p, int d) {
  p.validate();
  if (d < 1 || d > 6) {
    throw std::invalid_argument("pendulum Taylor degree must be in 1..6");
  }
  constexpr int kInputs = 6;
  using J = BasicJet<T>;
  std::vector<J> seeds;
  for (int i = 0; i < kInputs; ++i) {
    seeds.push_back(J::variable(kInputs, d, i, T(0)));
  }
  const auto next = pendulum_step<J>(p, {seeds[0], seeds[1], seeds[2], seeds[3]},
                                     {seeds[4], seeds[5]});
  BasicTaylorMap<T> map;
  map.n_in = kInputs;
  map.n_out = 4;
  for (const auto& row : next) {
    if (row.value() != 0) {
      throw NumericalError("upright state is not an equilibrium");
    }
    map.rows.push_back(row.series().restricted(1, d));
  }
  return map;
}

template BasicTaylorMap<double> taylor_dynamics<double>(const PendulumParams&, int);
template BasicTaylorMap<Quad> taylor_dynamics<Quad>(const PendulumParams&, int);

GaussianNoise::GaussianNoise(std::uint64_t seed, double variance)
    : enabled_(true), rng_(seed), normal_(0.0, std::sqrt(variance)) {
  if (!(variance >= 0.0)) throw std::invalid_argument("noise variance");
}

Eigen::VectorXd GaussianNoise::sample(Eigen::Index n) {
  Eigen::VectorXd w = Eigen::VectorXd::Zero(n);
  if (!enabled_) return w;
  for (Eigen::Index i = 0; i < n; ++i) w[i] = normal_(rng_);
  return w;
}

Eigen::VectorXd add_noise(const Eigen::VectorXd& x, GaussianNoise& noise) {
  if (!noise.enabled()) return x;
  return x + noise.sample(x.size());
}

}  // namespace ahmpc
