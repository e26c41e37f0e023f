#include "eqlab/fp_solvers.hpp"

#include <cmath>
#include <ostream>

#include "eqlab/simplex.hpp"

namespace eqlab {

double EntropyRegularizer::value(const Vector& p) { return negentropy(p); }

Vector EntropyRegularizer::smooth_argmin(const Vector& scaled_loss) {
  return softmax(-scaled_loss);
}

JointPolicy sbr(const PayoffVector& f, double eta) {
  EQLAB_CHECK(eta > 0.0, "sbr: eta must be positive");
  return {EntropyRegularizer::smooth_argmin(eta * f.fx),
          EntropyRegularizer::smooth_argmin(eta * f.fy)};
}

namespace {

PayoffVector zero_payoff(const MatrixGame& game) {
  return {Vector::Zero(game.rows()), Vector::Zero(game.cols())};
}

// One fictitious-play step. `optimism` scales the extra F_k term: 1 is the
// optimistic update, 0 plain FTRL; any other weight is not used but falls
// out of the same formula.
SolverState fp_step(SolverState s, const MatrixGame& game, double optimism) {
  const PayoffVector f_k = payoff_vector(game, s.z);
  s.f_tilde += f_k;
  const PayoffVector target{s.f_tilde.fx + optimism * f_k.fx,
                            s.f_tilde.fy + optimism * f_k.fy};
  s.z = sbr(target, s.eta);
  s.k += 1;
  const double w = 1.0 / static_cast<double>(s.k);
  s.z_bar.x += w * (s.z.x - s.z_bar.x);
  s.z_bar.y += w * (s.z.y - s.z_bar.y);
  s.f_prev = f_k;
  return s;
}

}  // namespace

SolverState make_solver_state(const MatrixGame& game, double eta) {
  return make_solver_state(game, uniform_joint(game), eta);
}

SolverState make_solver_state(const MatrixGame& game, JointPolicy z1, double eta) {
  EQLAB_CHECK(eta > 0.0, "solver state: eta must be positive");
  validate_joint(game, z1);
  SolverState s;
  s.k = 1;
  s.z = z1;
  s.z_bar = std::move(z1);
  s.f_tilde = zero_payoff(game);
  s.f_prev = zero_payoff(game);
  s.eta = eta;
  return s;
}

SolverState sfp_step(SolverState state, const MatrixGame& game) {
  return fp_step(std::move(state), game, 0.0);
}

SolverState osfp_step(SolverState state, const MatrixGame& game) {
  return fp_step(std::move(state), game, 1.0);
}

OmdState make_omd_state(const MatrixGame& game, double eta) {
  EQLAB_CHECK(eta > 0.0, "omd state: eta must be positive");
  OmdState s;
  s.k = 1;
  s.z = uniform_joint(game);
  s.z_hat = s.z;
  s.eta = eta;
  return s;
}

namespace {

// argmin_z eta <f, z> + D_psi(z, p) over the simplex: multiplicative weights.
Vector mirror_step(const Vector& p, const Vector& scaled_loss) {
  return softmax(p.array().log().matrix() - scaled_loss);
}

}  // namespace

OmdState omd_step(OmdState state, const MatrixGame& game) {
  const PayoffVector f_k = payoff_vector(game, state.z);
  state.z_hat.x = mirror_step(state.z_hat.x, state.eta * f_k.fx);
  state.z_hat.y = mirror_step(state.z_hat.y, state.eta * f_k.fy);
  state.z.x = mirror_step(state.z_hat.x, state.eta * f_k.fx);
  state.z.y = mirror_step(state.z_hat.y, state.eta * f_k.fy);
  state.k += 1;
  return state;
}

Method parse_method(const std::string& name) {
  if (name == "sfp") return Method::kSfp;
  if (name == "osfp") return Method::kOsfp;
  if (name == "omd") return Method::kOmd;
  throw ConfigError("unknown method '" + name + "', expected sfp|osfp|omd");
}

std::vector<IterationRecord> solve(const MatrixGame& game, Method method,
                                   double eta, int iters,
                                   const JointPolicy* z1) {
  EQLAB_CHECK(iters >= 1, "solve: iters must be >= 1");
  std::vector<IterationRecord> trace;
  trace.reserve(iters);
  if (method == Method::kOmd) {
    EQLAB_CHECK(z1 == nullptr, "omd starts at the mirror-map minimum");
    OmdState s = make_omd_state(game, eta);
    JointPolicy bar = s.z;
    for (int i = 0; i < iters; ++i) {
      s = omd_step(s, game);
      const double w = 1.0 / static_cast<double>(s.k);
      bar.x += w * (s.z.x - bar.x);
      bar.y += w * (s.z.y - bar.y);
      trace.push_back({s.k, duality_gap(game, s.z), duality_gap(game, bar)});
    }
    return trace;
  }
  SolverState s = z1 ? make_solver_state(game, *z1, eta)
                     : make_solver_state(game, eta);
  for (int i = 0; i < iters; ++i) {
    s = method == Method::kSfp ? sfp_step(std::move(s), game)
                               : osfp_step(std::move(s), game);
    trace.push_back({s.k, duality_gap(game, s.z), duality_gap(game, s.z_bar)});
  }
  return trace;
}

void write_trace_csv(std::ostream& out, const std::vector<IterationRecord>& trace) {
  out << "k,gap_actual,gap_average\n";
  for (const auto& r : trace)
    out << r.k << ',' << fmt_double(r.gap_actual) << ','
        << fmt_double(r.gap_average) << '\n';
}

}  // namespace eqlab
