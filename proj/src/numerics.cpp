#include "cabs/numerics.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "cabs/error.hpp"

namespace causabs {

namespace {

std::string format_number(double v) {
  std::ostringstream os;
  os.precision(12);
  os << v;
  return os.str();
}

std::optional<std::string> vector_violation(const Vector& p) {
  double sum = 0.0;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    if (!std::isfinite(p[i]) || p[i] < 0.0 || p[i] > 1.0 + kStochasticTolerance) {
      return "entry " + std::to_string(i + 1) + " = " + format_number(p[i]) + " is outside [0,1]";
    }
    sum += p[i];
  }
  if (std::abs(sum - 1.0) > kStochasticTolerance) {
    return "sums to " + format_number(sum) + " (expected 1)";
  }
  return std::nullopt;
}

// (1+d)ln(1+d) + (1-d)ln(1-d) for d in [-1,1], without cancellation near 0.
double jensen_term(double d) {
  const double a = std::abs(d);
  if (a >= 1.0) return 2.0 * std::numbers::ln2;
  if (a < 1e-2) {
    // sum_k d^{2k} / (k (2k - 1))
    const double d2 = d * d;
    double pow = d2;
    double acc = 0.0;
    for (int k = 1; k <= 8; ++k) {
      acc += pow / (k * (2.0 * k - 1.0));
      pow *= d2;
    }
    return acc;
  }
  return (1.0 + d) * std::log1p(d) + (1.0 - d) * std::log1p(-d);
}

}  // namespace

std::optional<std::string> stochastic_violation(const Matrix& m) {
  if (m.rows() < 1 || m.cols() < 1) return "matrix must have at least one row and one column";
  for (Eigen::Index c = 0; c < m.cols(); ++c) {
    if (auto v = vector_violation(Vector(m.col(c)))) {
      return "column " + std::to_string(c + 1) + " " + *v;
    }
  }
  return std::nullopt;
}

Distribution::Distribution(Vector p) : p_(std::move(p)) {
  if (p_.size() < 1) throw Error("distribution must have at least one entry");
  if (auto v = vector_violation(p_)) throw Error("invalid distribution: " + *v);
}

Distribution::Distribution(std::initializer_list<double> p)
    : Distribution(Vector(Eigen::Map<const Vector>(p.begin(), static_cast<Eigen::Index>(p.size())))) {}

Distribution Distribution::uniform(Eigen::Index n) {
  return Distribution(Vector::Constant(n, 1.0 / static_cast<double>(n)));
}

Distribution Distribution::point_mass(Eigen::Index n, Eigen::Index at) {
  Vector p = Vector::Zero(n);
  p[at] = 1.0;
  return Distribution(std::move(p));
}

StochasticMatrix::StochasticMatrix(Matrix m) : m_(std::move(m)) {
  if (auto v = stochastic_violation(m_)) throw Error("matrix is not column-stochastic: " + *v);
}

StochasticMatrix StochasticMatrix::identity(Eigen::Index n) { return StochasticMatrix(Matrix::Identity(n, n)); }

BinaryStochasticMatrix::BinaryStochasticMatrix(Eigen::Index rows, std::vector<int> assignment)
    : rows_(rows), assign_(std::move(assignment)) {
  if (rows_ < 1 || assign_.empty()) throw Error("binary stochastic matrix must be non-empty");
  for (int r : assign_) {
    if (r < 0 || r >= rows_) throw Error("binary stochastic matrix assignment out of range");
  }
}

BinaryStochasticMatrix BinaryStochasticMatrix::from_matrix(const Matrix& m) {
  if (m.rows() < 1 || m.cols() < 1) throw Error("binary stochastic matrix must be non-empty");
  std::vector<int> assign(static_cast<std::size_t>(m.cols()), -1);
  for (Eigen::Index c = 0; c < m.cols(); ++c) {
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      const double v = m(r, c);
      if (v == 1.0) {
        if (assign[static_cast<std::size_t>(c)] != -1) {
          throw Error("column " + std::to_string(c + 1) + " has more than one 1");
        }
        assign[static_cast<std::size_t>(c)] = static_cast<int>(r);
      } else if (v != 0.0) {
        throw Error("entry (" + std::to_string(r + 1) + "," + std::to_string(c + 1) + ") = " + format_number(v) +
                    " is not binary");
      }
    }
    if (assign[static_cast<std::size_t>(c)] == -1) throw Error("column " + std::to_string(c + 1) + " has no 1");
  }
  return BinaryStochasticMatrix(m.rows(), std::move(assign));
}

BinaryStochasticMatrix BinaryStochasticMatrix::identity(Eigen::Index n) {
  std::vector<int> assign(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) assign[static_cast<std::size_t>(i)] = static_cast<int>(i);
  return BinaryStochasticMatrix(n, std::move(assign));
}

std::vector<int> BinaryStochasticMatrix::row_counts() const {
  std::vector<int> counts(static_cast<std::size_t>(rows_), 0);
  for (int r : assign_) ++counts[static_cast<std::size_t>(r)];
  return counts;
}

bool BinaryStochasticMatrix::is_surjective() const {
  for (int c : row_counts()) {
    if (c == 0) return false;
  }
  return true;
}

Matrix BinaryStochasticMatrix::matrix() const {
  Matrix m = Matrix::Zero(rows_, cols());
  for (Eigen::Index c = 0; c < cols(); ++c) m(row_of(c), c) = 1.0;
  return m;
}

bool is_binary(const Matrix& m) {
  for (Eigen::Index c = 0; c < m.cols(); ++c) {
    int ones = 0;
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      if (m(r, c) == 1.0) {
        ++ones;
      } else if (m(r, c) != 0.0) {
        return false;
      }
    }
    if (ones != 1) return false;
  }
  return m.size() > 0;
}

double kl_divergence(const Distribution& p, const Distribution& q) {
  if (p.size() != q.size()) throw Error("kl_divergence: length mismatch");
  double acc = 0.0;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    if (p[i] == 0.0) continue;
    if (q[i] == 0.0) throw Error("kl_divergence: infinite divergence (q is zero where p is positive)");
    acc += p[i] * std::log(p[i] / q[i]);
  }
  return acc;
}

double jsd_distance(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) throw Error("jsd_distance: length mismatch");
  // With s = p + q and d = (p - q) / s, each coordinate contributes
  // s/4 * [(1+d)ln(1+d) + (1-d)ln(1-d)] to 1/2 KL(p||m) + 1/2 KL(q||m).
  double div = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double s = p[i] + q[i];
    if (s <= 0.0 || p[i] == q[i]) continue;
    div += 0.25 * s * jensen_term((p[i] - q[i]) / s);
  }
  return std::sqrt(div);
}

double jsd_distance(const Distribution& p, const Distribution& q) {
  return jsd_distance(std::span<const double>(p.values().data(), static_cast<std::size_t>(p.size())),
                      std::span<const double>(q.values().data(), static_cast<std::size_t>(q.size())));
}

Matrix kronecker(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

StochasticMatrix kronecker(const StochasticMatrix& a, const StochasticMatrix& b) {
  return StochasticMatrix(kronecker(a.matrix(), b.matrix()));
}

StochasticMatrix l1_normalize_columns(const Matrix& m) {
  Matrix out = m;
  for (Eigen::Index c = 0; c < m.cols(); ++c) {
    const double sum = m.col(c).sum();
    if (!(sum > 0.0)) {
      throw Error("non-surjective map has empty preimage (column " + std::to_string(c + 1) + " sums to zero)");
    }
    out.col(c) /= sum;
  }
  return StochasticMatrix(std::move(out));
}

Distribution apply(const StochasticMatrix& m, const Distribution& p) {
  if (m.cols() != p.size()) {
    throw Error("apply: matrix has " + std::to_string(m.cols()) + " columns but distribution has length " +
                std::to_string(p.size()));
  }
  return Distribution(Vector(m.matrix() * p.values()));
}

}  // namespace causabs
