#include "eqlab/mcts.hpp"

namespace eqlab::mcts {

Vector prior_mix(const Vector& policy_probs, double tau, double alpha,
                 double p_mix, Rng& rng) {
  const Index n = policy_probs.size();
  EQLAB_CHECK(n >= 1, "prior_mix: needs at least one action");
  EQLAB_CHECK(tau > 0.0 && alpha > 0.0 && p_mix >= 0.0 && p_mix <= 1.0,
              "prior_mix: bad parameters");
  // softmax(log pi / tau) = pi^(1/tau) normalized; zero entries stay zero.
  Vector x(n);
  for (Index i = 0; i < n; ++i)
    x[i] = policy_probs[i] > 0.0 ? std::pow(policy_probs[i], 1.0 / tau) : 0.0;
  const double z = x.sum();
  if (z > 0.0) x /= z;
  else x.setConstant(1.0 / static_cast<double>(n));
  const std::vector<double> d = rng.dirichlet(alpha, static_cast<int>(n));
  for (Index i = 0; i < n; ++i) x[i] = p_mix * x[i] + (1.0 - p_mix) * d[i];
  return x;
}

double rollout_value(const card::CardGame& game, const card::CardGameState& s,
                     int perspective, int playouts, Rng& rng) {
  EQLAB_CHECK(playouts >= 1, "rollout_value: playouts must be >= 1");
  const double sign = perspective == 0 ? 1.0 : -1.0;
  double total = 0.0;
  for (int i = 0; i < playouts; ++i) {
    card::CardGameState cur = s;
    // Decorrelate the playouts' chance streams.
    cur.rng = Rng(rng.next_u64());
    while (!cur.terminal) {
      const auto ids = card::legal_actions(game, cur, cur.to_act).legal_ids();
      cur = card::step(game, std::move(cur),
                       ids[rng.uniform_int(static_cast<int>(ids.size()))]);
    }
    total += sign * cur.reward;
  }
  return total / playouts;
}

}  // namespace eqlab::mcts
