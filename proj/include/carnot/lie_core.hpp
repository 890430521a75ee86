#pragma once

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace carnot {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// All three live in R^n with the graded basis v_1..v_n; the aliases name the role.
using AlgebraVector = Vector;  // element of the Lie algebra
using GroupPoint = Vector;     // exponential coordinates of a group element
using Covector = Vector;       // layered momentum (h^1, ..., h^s)

/// Structure constant c_{ij}^k, 0-based, stored once with i < j.
/// [v_i, v_j] = sum_k c_{ij}^k v_k and [v_j, v_i] = -[v_i, v_j].
struct BracketTerm {
  int i;
  int j;
  int k;
  double coeff;
};

/// A stratified nilpotent Lie algebra g = V_1 + ... + V_s given by structure
/// constants in a graded basis, plus a metric on the first layer.
///
/// Construction only checks that the data is well formed (sizes and index
/// ranges); the algebraic axioms are checked by validate_spec().
///
/// Downstream modules (geodesics, densities, singular curves) assume the first
/// layer basis is orthonormal; call orthonormalized() on specs loaded with a
/// non-identity metric.
class CarnotSpec {
public:
  CarnotSpec(std::string name, std::vector<int> layer_dims,
             std::vector<BracketTerm> brackets, Matrix first_layer_metric = Matrix());

  const std::string& name() const { return name_; }
  int step() const { return static_cast<int>(layer_dims_.size()); }
  int dim() const { return dim_; }
  /// m = dim V_1.
  int rank() const { return layer_dims_.front(); }
  const std::vector<int>& layer_dims() const { return layer_dims_; }
  /// Layer l is 1-based; returns the 0-based index of its first coordinate.
  int layer_offset(int l) const { return offsets_[l - 1]; }
  int layer_dim(int l) const { return layer_dims_[l - 1]; }
  /// Degree d_i (1-based layer) of the 0-based coordinate i.
  int degree(int i) const { return degrees_[i]; }
  const std::vector<BracketTerm>& brackets() const { return brackets_; }
  const Matrix& first_layer_metric() const { return metric_; }
  bool has_identity_metric() const;

  /// Same group expressed in a basis whose first layer is orthonormal for the
  /// metric (Cholesky G = L L^T, new first-layer basis v L^{-T}).
  /// Throws std::invalid_argument if the metric is not positive definite.
  CarnotSpec orthonormalized() const;

private:
  std::string name_;
  std::vector<int> layer_dims_;
  std::vector<int> offsets_;
  std::vector<int> degrees_;
  std::vector<BracketTerm> brackets_;
  Matrix metric_;
  int dim_ = 0;
};

struct Violation {
  std::string invariant;
  std::string detail;
};

struct ValidationReport {
  std::vector<Violation> violations;
  bool ok() const { return violations.empty(); }
};

inline constexpr double kValidationTolerance = 1e-12;

ValidationReport validate_spec(const CarnotSpec& spec);

/// Block of the V_l coordinates (l is 1-based).
inline auto layer(const CarnotSpec& spec, const Vector& x, int l) {
  return x.segment(spec.layer_offset(l), spec.layer_dim(l));
}
inline auto layer(const CarnotSpec& spec, Vector& x, int l) {
  return x.segment(spec.layer_offset(l), spec.layer_dim(l));
}

AlgebraVector bracket(const CarnotSpec& spec, const AlgebraVector& x, const AlgebraVector& y);

/// ad_v^k(w).
AlgebraVector ad_pow(const CarnotSpec& spec, const AlgebraVector& v, int k, const AlgebraVector& w);

/// B(c) w = sum_{k<s} (-1)^k/(k+1)! ad_c^k(w), the left-trivialized
/// differential of the exponential map at c.
AlgebraVector dexpinv_apply(const CarnotSpec& spec, const AlgebraVector& c, const AlgebraVector& w);

/// Solves B(c) x = rhs by the finite Neumann series (B(c) - I is nilpotent).
AlgebraVector dexpinv_solve(const CarnotSpec& spec, const AlgebraVector& c, const AlgebraVector& rhs);

/// Matrix of B(c) in the graded basis.
Matrix dexpinv_matrix(const CarnotSpec& spec, const AlgebraVector& c);

inline constexpr int kMaxBchStep = 5;

/// x * y in exponential coordinates via the Dynkin series truncated at the
/// step (exact by nilpotency). Supports step <= kMaxBchStep.
GroupPoint group_product(const CarnotSpec& spec, const GroupPoint& x, const GroupPoint& y);

inline GroupPoint group_inverse(const GroupPoint& x) { return -x; }

/// delta_lambda: coordinate i scaled by lambda^{d_i}.
GroupPoint dilate(const CarnotSpec& spec, double lambda, const GroupPoint& x);

/// Covector dilation compatible with the exponential map:
/// exp_map(covector_dilate(lambda, h)) == dilate(lambda, exp_map(h)).
/// Layer l is scaled by lambda^{2-l}.
Covector covector_dilate(const CarnotSpec& spec, double lambda, const Covector& h);

/// D = sum_j j m_j.
int homogeneous_dimension(const CarnotSpec& spec);

namespace detail {

// Raw kernels used by the integrators; out must not alias inputs.
void bracket_into(const CarnotSpec& spec, const double* x, const double* y, double* out);

}  // namespace detail

}  // namespace carnot
