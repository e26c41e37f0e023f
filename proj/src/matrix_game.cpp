#include "eqlab/matrix_game.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "eqlab/rng.hpp"
#include "eqlab/simplex.hpp"

namespace eqlab {

MatrixGame::MatrixGame(Matrix a) : a_(std::move(a)) {
  EQLAB_CHECK(a_.rows() >= 1 && a_.cols() >= 1, "payoff matrix must be nonempty");
  EQLAB_CHECK(a_.allFinite(), "payoff matrix must be finite");
}

MatrixGame MatrixGame::load(std::istream& in) {
  Index rows = 0, cols = 0;
  if (!(in >> rows >> cols) || rows < 1 || cols < 1)
    throw ConfigError("matrix game: bad header, expected 'rows cols'");
  Matrix a(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j)
      if (!(in >> a(i, j)))
        throw ConfigError("matrix game: not enough entries");
  return MatrixGame(std::move(a));
}

MatrixGame MatrixGame::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("matrix game: cannot open " + path);
  return load(in);
}

void MatrixGame::save(std::ostream& out) const {
  out << a_.rows() << ' ' << a_.cols() << '\n';
  for (Index i = 0; i < a_.rows(); ++i) {
    for (Index j = 0; j < a_.cols(); ++j)
      out << (j ? " " : "") << fmt_double(a_(i, j));
    out << '\n';
  }
}

MatrixGame MatrixGame::rock_paper_scissors() {
  Matrix a(3, 3);
  a << 0, -1, 1,
       1, 0, -1,
       -1, 1, 0;
  return MatrixGame(a);
}

MatrixGame MatrixGame::matching_pennies() {
  Matrix a(2, 2);
  a << 1, -1,
       -1, 1;
  return MatrixGame(a);
}

MatrixGame MatrixGame::random(Index rows, Index cols, Rng& rng) {
  Matrix a(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j)
      a(i, j) = 2.0 * rng.uniform() - 1.0;
  return MatrixGame(std::move(a));
}

JointPolicy uniform_joint(const MatrixGame& game) {
  return {uniform_simplex(game.rows()), uniform_simplex(game.cols())};
}

void validate_joint(const MatrixGame& game, const JointPolicy& z) {
  EQLAB_CHECK(z.x.size() == game.rows() && z.y.size() == game.cols(),
              "policy dimensions do not match the game");
  EQLAB_CHECK(is_simplex(z.x) && is_simplex(z.y), "policies must lie on the simplex");
}

double payoff(const MatrixGame& game, const JointPolicy& z) {
  validate_joint(game, z);
  return z.x.dot(game.payoff_matrix() * z.y);
}

PayoffVector payoff_vector(const MatrixGame& game, const JointPolicy& z) {
  validate_joint(game, z);
  const Matrix& a = game.payoff_matrix();
  return {a * z.y, -(a.transpose() * z.x)};
}

JointPolicy best_response(const PayoffVector& f) {
  EQLAB_CHECK(f.fx.allFinite() && f.fy.allFinite(), "payoff vector must be finite");
  return {one_hot(f.fx.size(), argmin(f.fx)), one_hot(f.fy.size(), argmin(f.fy))};
}

double duality_gap(const MatrixGame& game, const JointPolicy& z) {
  validate_joint(game, z);
  const Matrix& a = game.payoff_matrix();
  // Player 2's best deviation maximizes u; player 1's minimizes it.
  const double best_col = (a.transpose() * z.x).maxCoeff();
  const double best_row = (a * z.y).minCoeff();
  return best_col - best_row;
}

bool ne_check(const MatrixGame& game, const JointPolicy& z, double tol) {
  EQLAB_CHECK(tol > 0.0, "tolerance must be positive");
  return duality_gap(game, z) <= tol;
}

}  // namespace eqlab
