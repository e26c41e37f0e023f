#include <doctest.h>

#include <cmath>
#include <sstream>

#include "eqlab/policy_grad.hpp"
#include "eqlab/simplex.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace eqlab;
using namespace eqlab::pg;
using eqlab::efg::GameTree;
using eqlab::efg::SequencePolicy;
using eqlab::efg::Treeplex;

namespace {

card::InfoState synthetic_state(const std::string& key) {
  card::InfoState s;
  s.stage = TabularPolicy::stage_of_key(key);
  s.key = key;
  return s;
}

card::ActionMask full_mask(int n) {
  card::ActionMask m;
  m.legal.assign(n, 1);
  return m;
}

// Push-down without simplex validation, for unnormalized perturbations.
SequencePolicy push_down(const Treeplex& tp, const std::vector<Vector>& pi) {
  SequencePolicy x = SequencePolicy::Zero(tp.num_sequences);
  for (int s = 0; s < tp.num_infosets(); ++s) {
    const auto& is = tp.infosets[s];
    const double mass = is.parent_seq < 0 ? 1.0 : x[is.parent_seq];
    for (int a = 0; a < is.num_actions; ++a)
      x[is.first_seq + a] = mass * pi[s][a];
  }
  return x;
}

std::vector<Vector> random_pi(const Treeplex& tp, Rng& rng) {
  std::vector<Vector> pi;
  for (const auto& is : tp.infosets) pi.push_back(random_simplex(is.num_actions, rng));
  return pi;
}

}  // namespace

TEST_CASE("act: masked softmax, temperatures, argmax") {
  TabularPolicy p;
  const auto s = synthetic_state("BT|P0|x");

  // Unseen state, tau 1: uniform over legal actions only.
  card::ActionMask m = full_mask(4);
  m.legal[2] = 0;
  Vector probs = p.act(s, m, 1.0);
  CHECK(probs[2] == 0.0);
  CHECK(probs.sum() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(probs[0] == doctest::Approx(1.0 / 3).epsilon(1e-12));

  Vector& row = p.logits(card::Stage::kBattle, "BT|P0|x", 4);
  row << 2.0, 1.0, 5.0, 0.0;  // the masked action must not win
  probs = p.act(s, m, 0.0);
  CHECK(probs[0] == 1.0);
  CHECK(probs[2] == 0.0);

  // logits (1, 0) at tau 2: softmax((0.5, 0)).
  TabularPolicy q;
  q.logits(card::Stage::kBattle, "BT|P0|y", 2) << 1.0, 0.0;
  const auto sy = synthetic_state("BT|P0|y");
  probs = q.act(sy, full_mask(2), 2.0);
  const double e = std::exp(0.5);
  CHECK(probs[0] == doctest::Approx(e / (e + 1.0)).epsilon(1e-12));

  // argmax is temperature invariant; tau 0 returns it deterministically.
  Rng rng(5);
  for (int t = 0; t < 200; ++t) {
    TabularPolicy r;
    Vector& l = r.logits(card::Stage::kBattle, "BT|P0|z", 5);
    for (int i = 0; i < 5; ++i) l[i] = 4.0 * rng.uniform() - 2.0;
    const auto sz = synthetic_state("BT|P0|z");
    const Index am = argmax(r.act(sz, full_mask(5), 0.0));
    for (double tau : {0.1, 1.0, 10.0})
      CHECK(argmax(r.act(sz, full_mask(5), tau)) == am);
  }
}

TEST_CASE("act: stage blocks are disjoint") {
  TabularPolicy p;
  p.logits(card::Stage::kBuild, "CB|P0|k", 2) << 3.0, 0.0;
  // A battle key with the same spelling reads the battle block (zeros).
  const Vector probs = p.act(synthetic_state("BT|P0|k"), full_mask(2), 1.0);
  CHECK(probs[0] == doctest::Approx(0.5));
  const Vector cb = p.act(synthetic_state("CB|P0|k"), full_mask(2), 1.0);
  CHECK(cb[0] > 0.9);
}

TEST_CASE("policy serialization round-trip and block identity") {
  TabularPolicy p;
  p.logits(card::Stage::kBuild, "CB|P0|a", 3) << 0.25, -1.5, 3.125;
  p.logits(card::Stage::kBattle, "BT|P1|b", 2) << 1e-17, 42.0;
  std::stringstream ss;
  p.save(ss);
  const TabularPolicy q = TabularPolicy::load(ss);
  CHECK(p.block_identical(q, card::Stage::kBuild));
  CHECK(p.block_identical(q, card::Stage::kBattle));
  TabularPolicy r = q;
  r.logits(card::Stage::kBattle, "BT|P1|b", 2)[0] += 1e-18;
  CHECK(q.block_identical(r, card::Stage::kBuild));
  CHECK_FALSE(q.block_identical(r, card::Stage::kBattle));

  std::stringstream bad("eqlab-policy v9\n");
  CHECK_THROWS_AS(TabularPolicy::load(bad), ConfigError);
}

TEST_CASE("opponent mixture: weights and sampling") {
  std::vector<SequencePolicy> opps(3, SequencePolicy::Zero(0));
  OpponentMixture mix = make_opponent_mixture(opps, 1.0);
  CHECK(mix.mu == doctest::Approx(4.0));
  CHECK(mix.alpha_tilde[0] == doctest::Approx(0.25));
  CHECK(mix.alpha_tilde[1] == doctest::Approx(0.25));
  CHECK(mix.alpha_tilde[2] == doctest::Approx(0.5));
  CHECK(mix.alpha_tilde.sum() == doctest::Approx(1.0).epsilon(1e-12));

  OpponentMixture one = make_opponent_mixture({SequencePolicy::Zero(0)}, 0.3);
  Rng rng(7);
  for (int t = 0; t < 100; ++t) CHECK(sample_opponent(one, rng) == 0);

  OpponentMixture five =
      make_opponent_mixture(std::vector<SequencePolicy>(5, SequencePolicy::Zero(0)), 2.0);
  const int n = 100000;
  Vector counts = Vector::Zero(5);
  for (int t = 0; t < n; ++t) counts[sample_opponent(five, rng)] += 1.0;
  for (int i = 0; i < 5; ++i) {
    const double want = five.alpha_tilde[i];
    const double sigma = std::sqrt(want * (1 - want) / n);
    CHECK(std::abs(counts[i] / n - want) < 3.0 * sigma);
  }
}

TEST_CASE("policy_gradient: depth-1 gradient is the reward vector") {
  const GameTree d1 = fixtures::depth1({0.4, -0.2, 0.9});
  const SequencePolicy x = efg::behavioral_to_sequence(
      d1.plex(0), efg::uniform_behavioral(d1.plex(0)));
  const Vector g = policy_gradient(d1, x, SequencePolicy(0), 0);
  CHECK(g[0] == doctest::Approx(0.4));
  CHECK(g[1] == doctest::Approx(-0.2));
  CHECK(g[2] == doctest::Approx(0.9));
}

TEST_CASE("policy_gradient: finite differences on random games with chance") {
  Rng rng(11);
  for (int t = 0; t < 10; ++t) {
    const GameTree gt = t % 2 == 0 ? fixtures::kuhn_like(3, rng)
                                   : fixtures::random_pi_tree(rng, 3);
    for (int player = 0; player < 2; ++player) {
      const Treeplex& tp = gt.plex(player);
      std::vector<Vector> pi = random_pi(tp, rng);
      std::vector<Vector> pi_other = random_pi(gt.plex(1 - player), rng);
      const SequencePolicy own = push_down(tp, pi);
      const SequencePolicy other = push_down(gt.plex(1 - player), pi_other);
      const Vector grad = policy_gradient(gt, own, other, player);

      auto ret = [&](const std::vector<Vector>& p_own) {
        const SequencePolicy xs = push_down(tp, p_own);
        const SequencePolicy& x = player == 0 ? xs : other;
        const SequencePolicy& y = player == 0 ? other : xs;
        double total = 0.0;
        for (int leaf : gt.leaves()) {
          const auto& n = gt.node(leaf);
          const double vx = n.seq[0] < 0 ? 1.0 : x[n.seq[0]];
          const double vy = n.seq[1] < 0 ? 1.0 : y[n.seq[1]];
          total += vx * vy * n.chance_reach * n.payoff;
        }
        return player == 0 ? total : -total;
      };

      const double h = 1e-5;
      for (int s = 0; s < tp.num_infosets(); ++s) {
        const auto& is = tp.infosets[s];
        double v_proj = 0.0;
        for (int a = 0; a < is.num_actions; ++a)
          v_proj += pi[s][a] * grad[is.first_seq + a];
        for (int a = 0; a < is.num_actions; ++a) {
          // Unnormalized perturbation: d return / d pi(a|s) = rho(s) Q(s,a).
          std::vector<Vector> up = pi, dn = pi;
          up[s][a] += h;
          dn[s][a] -= h;
          const double fd = (ret(up) - ret(dn)) / (2 * h);
          const double an = grad[is.first_seq + a];
          CHECK(std::abs(fd - an) <= 1e-4 * std::max(1.0, std::abs(an)));

          // Renormalized perturbation matches the tangent-projected gradient.
          std::vector<Vector> upn = pi, dnn = pi;
          upn[s][a] += h;
          upn[s] /= upn[s].sum();
          dnn[s][a] -= h;
          dnn[s] /= dnn[s].sum();
          const double fdn = (ret(upn) - ret(dnn)) / (2 * h);
          const double ann = an - v_proj;
          CHECK(std::abs(fdn - ann) <= 1e-4 * std::max(1.0, std::abs(ann)));
        }
      }
    }
  }
}

TEST_CASE("policy_gradient: unreachable information states get zero") {
  const GameTree c2 = fixtures::chain2({{1, 0}, {0, 1}});
  const Treeplex& tp = c2.plex(0);
  SequencePolicy x = SequencePolicy::Zero(tp.num_sequences);
  x[tp.seq(0, 0)] = 1.0;
  x[tp.seq(1, 0)] = 1.0;
  const Vector g = policy_gradient(c2, x, SequencePolicy(0), 0);
  // The information state under the unchosen branch has zero reach.
  bool saw_zero_row = false;
  for (int s = 0; s < tp.num_infosets(); ++s) {
    double mass = 0.0;
    for (int a = 0; a < tp.infosets[s].num_actions; ++a)
      mass += x[tp.seq(s, a)];
    if (mass == 0.0) {
      saw_zero_row = true;
      for (int a = 0; a < tp.infosets[s].num_actions; ++a)
        CHECK(g[tp.seq(s, a)] == 0.0);
    }
  }
  CHECK(saw_zero_row);
}

TEST_CASE("dilated entropy gradient: finite differences") {
  Rng rng(13);
  const GameTree gt = fixtures::kuhn_like(3, rng);
  const Treeplex& tp = gt.plex(0);
  std::vector<Vector> pi = random_pi(tp, rng);
  const SequencePolicy x = push_down(tp, pi);
  const Vector g = dilated_entropy_pi_gradient(tp, x);
  // Free-coordinate extension of sum_s x(s) sum_a pi(a|s) log pi(a|s): the
  // conditionals are treated as independent variables, which is the
  // extension the analytic gradient uses. On the simplex it coincides with
  // the sequence-form dilated entropy.
  auto psi = [&](const std::vector<Vector>& p) {
    const SequencePolicy xs = push_down(tp, p);
    double total = 0.0;
    for (int s = 0; s < tp.num_infosets(); ++s) {
      const auto& is = tp.infosets[s];
      const double mass = is.parent_seq < 0 ? 1.0 : xs[is.parent_seq];
      for (int a = 0; a < is.num_actions; ++a)
        if (p[s][a] > 0) total += mass * p[s][a] * std::log(p[s][a]);
    }
    return total;
  };
  CHECK(psi(pi) == doctest::Approx(efg::dilated_entropy(tp, x)).epsilon(1e-12));
  const double h = 1e-6;
  for (int s = 0; s < tp.num_infosets(); ++s) {
    const auto& is = tp.infosets[s];
    double inner = 0.0;
    for (int a = 0; a < is.num_actions; ++a)
      inner += pi[s][a] * g[is.first_seq + a];
    for (int a = 0; a < is.num_actions; ++a) {
      std::vector<Vector> up = pi, dn = pi;
      up[s][a] += h;
      dn[s][a] -= h;
      const double fd = (psi(up) - psi(dn)) / (2 * h);
      CHECK(std::abs(fd - g[is.first_seq + a]) < 1e-5);

      // Tangent-projected agreement against the sequence-form entropy,
      // which renormalizes: both conventions share the projected gradient.
      std::vector<Vector> upn = pi, dnn = pi;
      upn[s][a] += h;
      upn[s] /= upn[s].sum();
      dnn[s][a] -= h;
      dnn[s] /= dnn[s].sum();
      const double fdn = (efg::dilated_entropy(tp, push_down(tp, upn)) -
                          efg::dilated_entropy(tp, push_down(tp, dnn))) /
                         (2 * h);
      CHECK(std::abs(fdn - (g[is.first_seq + a] - inner)) < 1e-5);
    }
  }
}

TEST_CASE("sbr_objective: definitional oracle and limits") {
  Rng rng(17);
  const GameTree gt = fixtures::kuhn_like(3, rng);
  std::vector<SequencePolicy> opps;
  for (int i = 0; i < 3; ++i)
    opps.push_back(efg::behavioral_to_sequence(
        gt.plex(1), [&] {
          efg::BehavioralPolicy b;
          for (const auto& is : gt.plex(1).infosets)
            b.pi.push_back(random_simplex(is.num_actions, rng));
          return b;
        }()));
  const SequencePolicy x = efg::behavioral_to_sequence(
      gt.plex(0), efg::uniform_behavioral(gt.plex(0)));

  const OpponentMixture mix = make_opponent_mixture(opps, 0.5);
  const double obj = sbr_objective(gt, x, mix);
  double want = 0.0;
  for (int i = 0; i < 3; ++i)
    want += mix.alpha_tilde[i] *
            (-efg::expected_return(gt, x, opps[i]) +
             efg::dilated_entropy(gt.plex(0), x) / mix.mu);
  CHECK(obj == doctest::Approx(want).epsilon(1e-12));

  // Large mu: the entropy term vanishes.
  const OpponentMixture sharp = make_opponent_mixture(opps, 1e9);
  double linear = 0.0;
  for (int i = 0; i < 3; ++i)
    linear += sharp.alpha_tilde[i] * -efg::expected_return(gt, x, opps[i]);
  CHECK(sbr_objective(gt, x, sharp) == doctest::Approx(linear).epsilon(1e-6));

  // Single opponent, pure learner: plain loss, zero entropy.
  const auto pures = efg::enumerate_pure_policies(gt.plex(0), 2000);
  const OpponentMixture one = make_opponent_mixture({opps[0]}, 1.0);
  const double pure_obj = sbr_objective(gt, pures[0], one);
  CHECK(pure_obj ==
        doctest::Approx(-efg::expected_return(gt, pures[0], opps[0])).epsilon(1e-12));
}

TEST_CASE("gradient estimator is unbiased over opponent sampling") {
  Rng rng(19);
  const GameTree gt = fixtures::kuhn_like(2, rng);
  for (int k : {2, 3, 4}) {
    std::vector<SequencePolicy> opps;
    for (int i = 0; i < k; ++i) {
      efg::BehavioralPolicy b;
      for (const auto& is : gt.plex(1).infosets)
        b.pi.push_back(random_simplex(is.num_actions, rng));
      opps.push_back(efg::behavioral_to_sequence(gt.plex(1), b));
    }
    const OpponentMixture mix = make_opponent_mixture(opps, 0.7);
    efg::BehavioralPolicy bx;
    for (const auto& is : gt.plex(0).infosets)
      bx.pi.push_back(random_simplex(is.num_actions, rng));
    const SequencePolicy x = efg::behavioral_to_sequence(gt.plex(0), bx);

    Vector expectation = Vector::Zero(gt.plex(0).num_sequences);
    for (int i = 0; i < k; ++i)
      expectation += mix.alpha_tilde[i] * sbr_pi_gradient(gt, x, mix, i);
    const Vector full = sbr_pi_gradient(gt, x, mix);
    // The entropy part appears once in each per-opponent loss, so the
    // sampled-gradient expectation reproduces the mixture gradient exactly.
    CHECK((expectation - full).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("solve_sbr_pg: exact mode reaches the smooth best response") {
  // Single uniform opponent on the symmetric matching pennies tree: the
  // smooth best response is uniform.
  const GameTree mp = GameTree::matching_pennies();
  const SequencePolicy uy = efg::behavioral_to_sequence(
      mp.plex(1), efg::uniform_behavioral(mp.plex(1)));
  Rng rng(23);
      {
    const OpponentMixture mix = make_opponent_mixture({uy}, 0.5);  // mu = 1
    SbrPgParams params;
    const SequencePolicy x = solve_sbr_pg(mp, mix, params, rng);
    CHECK((x - efg::behavioral_to_sequence(
                   mp.plex(0), efg::uniform_behavioral(mp.plex(0))))
              .cwiseAbs()
              .maxCoeff() < 1e-6);
  }

  // Mixed opponents, mu = 1: compare against the exact dilated minimizer.
  {
    efg::BehavioralPolicy skew;
    skew.pi.push_back((Vector(2) << 0.8, 0.2).finished());
    const SequencePolicy ys = efg::behavioral_to_sequence(mp.plex(1), skew);
    const OpponentMixture mix = make_opponent_mixture({ys, uy}, 1.0 / 3.0);
    CHECK(mix.mu == doctest::Approx(1.0));
    Vector fbar = Vector::Zero(mp.plex(0).num_sequences);
    const SequencePolicy dummy = efg::behavioral_to_sequence(
        mp.plex(0), efg::uniform_behavioral(mp.plex(0)));
    for (int i = 0; i < mix.size(); ++i)
      fbar += mix.alpha_tilde[i] *
              efg::sequence_payoff(mp, dummy, mix.opponents[i]).f0;
    const SequencePolicy exact = efg::sbr_treeplex(mp.plex(0), fbar, 1.0 / mix.mu);

    SbrPgParams params;
    params.steps = 3000;
    params.lr = 0.3;
    const SequencePolicy got = solve_sbr_pg(mp, mix, params, rng);
    CHECK((got - exact).cwiseAbs().sum() < 1e-2);
    const OpponentMixture m2 = mix;
    CHECK(std::abs(sbr_objective(mp, got, m2) - sbr_objective(mp, exact, m2)) < 1e-4);
  }
}

TEST_CASE("solve_sbr_pg: objective matches the exact optimum on a deal game") {
  Rng rng(29);
  const GameTree gt = fixtures::kuhn_like(2, rng);
  REQUIRE(gt.plex(0).num_infosets() <= 10);
  std::vector<SequencePolicy> opps;
  for (int i = 0; i < 2; ++i) {
    efg::BehavioralPolicy b;
    for (const auto& is : gt.plex(1).infosets)
      b.pi.push_back(random_simplex(is.num_actions, rng));
    opps.push_back(efg::behavioral_to_sequence(gt.plex(1), b));
  }
  const OpponentMixture mix = make_opponent_mixture(opps, 0.4);
  const SequencePolicy dummy = efg::behavioral_to_sequence(
      gt.plex(0), efg::uniform_behavioral(gt.plex(0)));
  Vector fbar = Vector::Zero(gt.plex(0).num_sequences);
  for (int i = 0; i < mix.size(); ++i)
    fbar += mix.alpha_tilde[i] * efg::sequence_payoff(gt, dummy, mix.opponents[i]).f0;
  const SequencePolicy exact = efg::sbr_treeplex(gt.plex(0), fbar, 1.0 / mix.mu);

  SbrPgParams params;
  params.steps = 4000;
  params.lr = 0.3;
  const SequencePolicy got = solve_sbr_pg(gt, mix, params, rng);
  CHECK(std::abs(sbr_objective(gt, got, mix) - sbr_objective(gt, exact, mix)) < 1e-2);
}

TEST_CASE("solve_sbr_pg: scaling payoffs and temperature jointly is invariant") {
  // <2F, x> + 2(1/mu) psi = 2(<F, x> + psi/mu): doubling the payoffs while
  // halving mu (here via eta) keeps the minimizer.
  Rng rng(31);
  const GameTree mp = GameTree::matching_pennies();
  efg::BehavioralPolicy skew;
  skew.pi.push_back((Vector(2) << 0.7, 0.3).finished());
  const SequencePolicy ys = efg::behavioral_to_sequence(mp.plex(1), skew);

  efg::GameTreeBuilder b;
  const int ll = b.add_leaf(-2), lr = b.add_leaf(2);
  const int rl = b.add_leaf(2), rr = b.add_leaf(-2);
  const int yl = b.add_decision(1, "y", {ll, lr});
  const int yr = b.add_decision(1, "y", {rl, rr});
  const GameTree mp2 = [&] {
    GameTree t = b.build(b.add_decision(0, "x", {yl, yr}));
    return t;
  }();

  const OpponentMixture mix1 = make_opponent_mixture({ys}, 1.0);
  const OpponentMixture mix2 = make_opponent_mixture({ys}, 0.5);
  SbrPgParams params;
  params.steps = 2000;
  params.lr = 0.2;
  Rng r1(7), r2(7);
  const SequencePolicy x1 = solve_sbr_pg(mp, mix1, params, r1);
  const SequencePolicy x2 = solve_sbr_pg(mp2, mix2, params, r2);
  CHECK((x1 - x2).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("solve_sbr_pg: sampled rollouts approach the exact answer") {
  const GameTree mp = GameTree::matching_pennies();
  efg::BehavioralPolicy skew;
  skew.pi.push_back((Vector(2) << 0.8, 0.2).finished());
  const SequencePolicy ys = efg::behavioral_to_sequence(mp.plex(1), skew);
  const OpponentMixture mix = make_opponent_mixture({ys}, 0.5);  // mu = 1

  Vector fbar = efg::sequence_payoff(
                    mp,
                    efg::behavioral_to_sequence(mp.plex(0),
                                                efg::uniform_behavioral(mp.plex(0))),
                    ys)
                    .f0;
  const SequencePolicy exact = efg::sbr_treeplex(mp.plex(0), fbar, 1.0 / mix.mu);

  SbrPgParams params;
  params.exact_gradient = false;
  params.steps = 400;
  params.episodes_per_step = 64;
  params.lr = 0.05;
  params.discount = 0.99;
  Rng rng(37);
  const SequencePolicy got = solve_sbr_pg(mp, mix, params, rng);
  CHECK((got - exact).cwiseAbs().sum() < 0.15);
}

TEST_CASE("reinforce_update: stage freezing is bit-exact") {
  TabularPolicy p;
  p.logits(card::Stage::kBuild, "CB|P0|a", 2) << 0.5, -0.5;
  p.logits(card::Stage::kBattle, "BT|P0|b", 2) << 0.1, 0.2;
  const TabularPolicy before = p;

  Episode ep;
  ep.steps.push_back({"CB|P0|a", {0, 1}, 0, 0.5});
  ep.steps.push_back({"BT|P0|b", {0, 1}, 1, 0.5});
  ep.ret = 1.0;
  ReinforceParams rp;
  rp.baseline = false;
  const card::Stage battle = card::Stage::kBattle;
  std::vector<Episode> batch{ep};
  reinforce_update(p, batch, rp, &battle);
  CHECK(p.block_identical(before, card::Stage::kBuild));
  CHECK_FALSE(p.block_identical(before, card::Stage::kBattle));

  const card::Stage build = card::Stage::kBuild;
  TabularPolicy q = before;
  reinforce_update(q, batch, rp, &build);
  CHECK(q.block_identical(before, card::Stage::kBattle));
  CHECK_FALSE(q.block_identical(before, card::Stage::kBuild));
}
