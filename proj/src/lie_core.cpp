#include "carnot/lie_core.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace carnot {

namespace {

// Dense n x n x n table, entry (i, j, k) = c_{ij}^k, both orders filled.
std::vector<double> dense_table(const CarnotSpec& spec) {
  const int n = spec.dim();
  std::vector<double> t(static_cast<std::size_t>(n) * n * n, 0.0);
  for (const auto& b : spec.brackets()) {
    t[(static_cast<std::size_t>(b.i) * n + b.j) * n + b.k] += b.coeff;
    t[(static_cast<std::size_t>(b.j) * n + b.i) * n + b.k] -= b.coeff;
  }
  return t;
}

std::string join_ints(std::initializer_list<int> xs) {
  std::ostringstream os;
  os << '(';
  bool first = true;
  for (int x : xs) {
    if (!first) os << ',';
    os << x + 1;
    first = false;
  }
  os << ')';
  return os.str();
}

}  // namespace

CarnotSpec::CarnotSpec(std::string name, std::vector<int> layer_dims,
                       std::vector<BracketTerm> brackets, Matrix first_layer_metric)
    : name_(std::move(name)), layer_dims_(std::move(layer_dims)), metric_(std::move(first_layer_metric)) {
  if (layer_dims_.empty()) throw std::invalid_argument("layer_dims must be non-empty");
  for (int d : layer_dims_) {
    if (d <= 0) throw std::invalid_argument("layer dimensions must be positive");
  }
  int off = 0;
  for (std::size_t l = 0; l < layer_dims_.size(); ++l) {
    offsets_.push_back(off);
    for (int i = 0; i < layer_dims_[l]; ++i) degrees_.push_back(static_cast<int>(l) + 1);
    off += layer_dims_[l];
  }
  dim_ = off;

  const int m = layer_dims_.front();
  if (metric_.size() == 0) metric_ = Matrix::Identity(m, m);
  if (metric_.rows() != m || metric_.cols() != m) {
    throw std::invalid_argument("first-layer metric must be " + std::to_string(m) + "x" + std::to_string(m));
  }

  // Canonical form: i < j, duplicates merged, zeros dropped.
  std::map<std::array<int, 3>, double> merged;
  for (auto b : brackets) {
    if (b.i < 0 || b.j < 0 || b.k < 0 || b.i >= dim_ || b.j >= dim_ || b.k >= dim_) {
      throw std::invalid_argument("bracket index out of range " + join_ints({b.i, b.j, b.k}));
    }
    if (b.i == b.j) {
      if (b.coeff != 0.0) throw std::invalid_argument("[v_i, v_i] must vanish " + join_ints({b.i, b.j, b.k}));
      continue;
    }
    if (b.i > b.j) {
      std::swap(b.i, b.j);
      b.coeff = -b.coeff;
    }
    merged[{b.i, b.j, b.k}] += b.coeff;
  }
  for (const auto& [key, c] : merged) {
    if (c != 0.0) brackets_.push_back({key[0], key[1], key[2], c});
  }
}

bool CarnotSpec::has_identity_metric() const {
  return metric_ == Matrix::Identity(rank(), rank());
}

CarnotSpec CarnotSpec::orthonormalized() const {
  if (has_identity_metric()) return *this;
  const int m = rank();
  const int n = dim_;
  if ((metric_ - metric_.transpose()).cwiseAbs().maxCoeff() > kValidationTolerance) {
    throw std::invalid_argument("first-layer metric is not symmetric");
  }
  Eigen::LLT<Matrix> llt(metric_);
  if (llt.info() != Eigen::Success) throw std::invalid_argument("first-layer metric is not positive definite");
  const Matrix L = llt.matrixL();

  // P maps new coordinates to old: e_a = sum_i v_i P_{ia}.
  Matrix P = Matrix::Identity(n, n);
  P.topLeftCorner(m, m) = L.transpose().triangularView<Eigen::Upper>().solve(Matrix::Identity(m, m));
  const Matrix Pinv = P.inverse();

  const auto t = dense_table(*this);
  auto at = [&](int i, int j, int k) { return t[(static_cast<std::size_t>(i) * n + j) * n + k]; };

  std::vector<BracketTerm> out;
  for (int a = 0; a < n; ++a) {
    for (int b = a + 1; b < n; ++b) {
      Vector v = Vector::Zero(n);
      for (int i = 0; i < n; ++i) {
        if (P(i, a) == 0.0) continue;
        for (int j = 0; j < n; ++j) {
          if (P(j, b) == 0.0) continue;
          for (int l = 0; l < n; ++l) v(l) += P(i, a) * P(j, b) * at(i, j, l);
        }
      }
      const Vector w = Pinv * v;
      for (int k = 0; k < n; ++k) {
        if (w(k) != 0.0) out.push_back({a, b, k, w(k)});
      }
    }
  }
  return CarnotSpec(name_, layer_dims_, std::move(out), Matrix::Identity(m, m));
}

ValidationReport validate_spec(const CarnotSpec& spec) {
  ValidationReport report;
  auto fail = [&](std::string inv, std::string detail) {
    report.violations.push_back({std::move(inv), std::move(detail)});
  };
  const int n = spec.dim();
  const int s = spec.step();
  const int m = spec.rank();

  if (m < 2 && s > 1) fail("rank", "first layer must have dimension >= 2, got " + std::to_string(m));

  const auto t = dense_table(spec);
  auto at = [&](int i, int j, int k) { return t[(static_cast<std::size_t>(i) * n + j) * n + k]; };

  double scale = 1.0;
  for (const auto& b : spec.brackets()) scale = std::max(scale, std::abs(b.coeff));
  const double tol = kValidationTolerance * scale * scale;

  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      for (int k = 0; k < n; ++k) {
        if (std::abs(at(i, j, k) + at(j, i, k)) > kValidationTolerance * scale) {
          fail("antisymmetry", "c" + join_ints({i, j, k}) + " != -c" + join_ints({j, i, k}));
        }
      }
    }
  }

  for (const auto& b : spec.brackets()) {
    const int di = spec.degree(b.i), dj = spec.degree(b.j);
    if (di + dj > s) {
      fail("grading", "[v" + std::to_string(b.i + 1) + ",v" + std::to_string(b.j + 1) +
                          "] must vanish (degree " + std::to_string(di + dj) + " > step)");
    } else if (spec.degree(b.k) != di + dj) {
      fail("grading", "[v" + std::to_string(b.i + 1) + ",v" + std::to_string(b.j + 1) + "] has a component on v" +
                          std::to_string(b.k + 1) + " of degree " + std::to_string(spec.degree(b.k)) +
                          ", expected degree " + std::to_string(di + dj));
    }
  }

  // Jacobi: [a,[b,c]] + [b,[c,a]] + [c,[a,b]] = 0.
  for (int a = 0; a < n; ++a) {
    for (int b = a + 1; b < n; ++b) {
      for (int c = b + 1; c < n; ++c) {
        double worst = 0.0;
        for (int k = 0; k < n; ++k) {
          double r = 0.0;
          for (int l = 0; l < n; ++l) {
            r += at(b, c, l) * at(a, l, k) + at(c, a, l) * at(b, l, k) + at(a, b, l) * at(c, l, k);
          }
          worst = std::max(worst, std::abs(r));
        }
        if (worst > tol) {
          std::ostringstream os;
          os << "residual " << worst << " for basis triple " << join_ints({a, b, c});
          fail("jacobi", os.str());
        }
      }
    }
  }

  // [V_1, V_j] must span V_{j+1}.
  for (int j = 1; j < s; ++j) {
    const int rows = spec.layer_dim(j + 1);
    Matrix images(rows, m * spec.layer_dim(j));
    int col = 0;
    for (int a = 0; a < m; ++a) {
      for (int b = spec.layer_offset(j); b < spec.layer_offset(j) + spec.layer_dim(j); ++b) {
        for (int r = 0; r < rows; ++r) images(r, col) = at(a, b, spec.layer_offset(j + 1) + r);
        ++col;
      }
    }
    Eigen::ColPivHouseholderQR<Matrix> qr(images);
    qr.setThreshold(kValidationTolerance * 1e3);
    const int rk = images.cols() == 0 ? 0 : static_cast<int>(qr.rank());
    if (rk < rows) {
      fail("stratification", "[V_1, V_" + std::to_string(j) + "] spans dimension " + std::to_string(rk) +
                                 " but V_" + std::to_string(j + 1) + " has dimension " + std::to_string(rows));
    }
  }

  const Matrix& g = spec.first_layer_metric();
  if ((g - g.transpose()).cwiseAbs().maxCoeff() > kValidationTolerance) {
    fail("metric", "first-layer metric is not symmetric");
  } else if (Eigen::LLT<Matrix>(g).info() != Eigen::Success) {
    fail("metric", "first-layer metric is not positive definite");
  }
  return report;
}

namespace detail {

void bracket_into(const CarnotSpec& spec, const double* x, const double* y, double* out) {
  std::fill(out, out + spec.dim(), 0.0);
  for (const auto& b : spec.brackets()) out[b.k] += b.coeff * (x[b.i] * y[b.j] - x[b.j] * y[b.i]);
}

}  // namespace detail

AlgebraVector bracket(const CarnotSpec& spec, const AlgebraVector& x, const AlgebraVector& y) {
  if (x.size() != spec.dim() || y.size() != spec.dim()) {
    throw std::invalid_argument("bracket: dimension mismatch");
  }
  AlgebraVector out(spec.dim());
  detail::bracket_into(spec, x.data(), y.data(), out.data());
  return out;
}

AlgebraVector ad_pow(const CarnotSpec& spec, const AlgebraVector& v, int k, const AlgebraVector& w) {
  if (k < 0) throw std::invalid_argument("ad_pow: k must be >= 0");
  AlgebraVector r = w;
  for (int i = 0; i < k; ++i) {
    if (i >= spec.step()) return AlgebraVector::Zero(spec.dim());
    r = bracket(spec, v, r);
  }
  return r;
}

AlgebraVector dexpinv_apply(const CarnotSpec& spec, const AlgebraVector& c, const AlgebraVector& w) {
  AlgebraVector out = w;
  AlgebraVector term = w;
  double fact = 1.0;
  for (int k = 1; k < spec.step(); ++k) {
    term = bracket(spec, c, term);
    fact *= (k + 1);
    out += ((k % 2 == 0) ? 1.0 : -1.0) / fact * term;
  }
  return out;
}

AlgebraVector dexpinv_solve(const CarnotSpec& spec, const AlgebraVector& c, const AlgebraVector& rhs) {
  // x = sum_{j<s} (-N)^j rhs with N = B(c) - I.
  AlgebraVector x = rhs;
  AlgebraVector term = rhs;
  for (int j = 1; j < spec.step(); ++j) {
    term = -(dexpinv_apply(spec, c, term) - term);
    x += term;
  }
  return x;
}

Matrix dexpinv_matrix(const CarnotSpec& spec, const AlgebraVector& c) {
  const int n = spec.dim();
  Matrix B(n, n);
  for (int j = 0; j < n; ++j) B.col(j) = dexpinv_apply(spec, c, AlgebraVector::Unit(n, j));
  return B;
}

namespace {

struct Rational {
  std::int64_t num = 0;
  std::int64_t den = 1;

  Rational() = default;
  Rational(std::int64_t n, std::int64_t d) : num(n), den(d) { normalize(); }

  void normalize() {
    if (den < 0) {
      num = -num;
      den = -den;
    }
    const std::int64_t g = std::gcd(num < 0 ? -num : num, den);
    if (g > 1) {
      num /= g;
      den /= g;
    }
  }
  Rational& operator+=(const Rational& o) {
    num = num * o.den + o.num * den;
    den *= o.den;
    normalize();
    return *this;
  }
  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
};

// A right-nested bracket word over {X, Y}: [w_0, [w_1, ..., [w_{L-2}, w_{L-1}]]].
struct BchWord {
  std::string letters;
  double coeff;
};

std::int64_t factorial(int k) {
  std::int64_t f = 1;
  for (int i = 2; i <= k; ++i) f *= i;
  return f;
}

// Dynkin's formula:
// log(e^X e^Y) = sum_k (-1)^{k-1}/k sum_{r_i+s_i>0} [X^{r_1} Y^{s_1} ... X^{r_k} Y^{s_k}]
//                                            / ((sum r_i + s_i) prod r_i! s_i!)
std::vector<BchWord> dynkin_words(int max_order) {
  std::map<std::string, Rational> acc;
  for (int k = 1; k <= max_order; ++k) {
    // Enumerate k pairs (r_i, s_i) with r_i + s_i >= 1 and total length <= max_order.
    std::vector<std::pair<int, int>> pairs(k);
    auto recurse = [&](auto&& self, int idx, int used) -> void {
      if (idx == k) {
        std::string word;
        std::int64_t denom = used;
        for (const auto& [r, s] : pairs) {
          word.append(r, 'X');
          word.append(s, 'Y');
          denom *= factorial(r) * factorial(s);
        }
        denom *= k;
        const std::int64_t sign = (k % 2 == 1) ? 1 : -1;
        acc[word] += Rational(sign, denom);
        return;
      }
      for (int r = 0; used + r <= max_order; ++r) {
        for (int s = 0; used + r + s <= max_order; ++s) {
          if (r + s == 0) continue;
          pairs[idx] = {r, s};
          self(self, idx + 1, used + r + s);
        }
      }
    };
    recurse(recurse, 0, 0);
  }
  std::vector<BchWord> words;
  for (const auto& [w, c] : acc) {
    if (c.num == 0) continue;
    // Words ending in a repeated letter nest to [a, a] = 0 (except length 1).
    if (w.size() >= 2 && w[w.size() - 1] == w[w.size() - 2]) continue;
    words.push_back({w, c.value()});
  }
  return words;
}

const std::vector<BchWord>& bch_table(int step) {
  static const std::array<std::vector<BchWord>, kMaxBchStep + 1> tables = [] {
    std::array<std::vector<BchWord>, kMaxBchStep + 1> t;
    for (int s = 1; s <= kMaxBchStep; ++s) t[s] = dynkin_words(s);
    return t;
  }();
  return tables.at(step);
}

}  // namespace

GroupPoint group_product(const CarnotSpec& spec, const GroupPoint& x, const GroupPoint& y) {
  if (x.size() != spec.dim() || y.size() != spec.dim()) {
    throw std::invalid_argument("group_product: dimension mismatch");
  }
  if (spec.step() > kMaxBchStep) {
    throw std::domain_error("group_product: step " + std::to_string(spec.step()) + " exceeds supported maximum " +
                            std::to_string(kMaxBchStep));
  }
  GroupPoint z = GroupPoint::Zero(spec.dim());
  for (const auto& w : bch_table(spec.step())) {
    const auto& L = w.letters;
    AlgebraVector v = (L.back() == 'X') ? x : y;
    for (int i = static_cast<int>(L.size()) - 2; i >= 0; --i) v = bracket(spec, L[i] == 'X' ? x : y, v);
    z += w.coeff * v;
  }
  return z;
}

GroupPoint dilate(const CarnotSpec& spec, double lambda, const GroupPoint& x) {
  if (!(lambda > 0.0)) throw std::invalid_argument("dilate: lambda must be positive");
  if (x.size() != spec.dim()) throw std::invalid_argument("dilate: dimension mismatch");
  GroupPoint out = x;
  for (int i = 0; i < spec.dim(); ++i) out(i) *= std::pow(lambda, spec.degree(i));
  return out;
}

Covector covector_dilate(const CarnotSpec& spec, double lambda, const Covector& h) {
  if (!(lambda > 0.0)) throw std::invalid_argument("covector_dilate: lambda must be positive");
  if (h.size() != spec.dim()) throw std::invalid_argument("covector_dilate: dimension mismatch");
  Covector out = h;
  for (int i = 0; i < spec.dim(); ++i) out(i) *= std::pow(lambda, 2 - spec.degree(i));
  return out;
}

int homogeneous_dimension(const CarnotSpec& spec) {
  int D = 0;
  for (int l = 1; l <= spec.step(); ++l) D += l * spec.layer_dim(l);
  return D;
}

}  // namespace carnot
