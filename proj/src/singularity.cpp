#include "carnot/singularity.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>
#include <vector>

namespace carnot {

Matrix s_matrix(const CarnotSpec& spec, const Covector& hbar) {
  if (hbar.size() != spec.dim()) throw std::invalid_argument("s_matrix: covector has wrong dimension");
  const int m = spec.rank();
  if (hbar.head(m).cwiseAbs().maxCoeff() > 0.0) throw std::invalid_argument("s_matrix: hbar must vanish on V_1");
  const int rows = spec.dim() - spec.layer_dim(spec.step());
  Matrix S = Matrix::Zero(rows, m);
  for (const auto& b : spec.brackets()) {
    // [v_i, v_j] = c v_k: c_{ij}^k = c, c_{ji}^k = -c.
    if (b.i < m && b.j < rows) S(b.j, b.i) += b.coeff * hbar(b.k);
    if (b.j < m && b.i < rows) S(b.i, b.j) -= b.coeff * hbar(b.k);
  }
  return S;
}

namespace {

struct SmallestSingular {
  double sigma;
  Vector u;
};

SmallestSingular smallest_singular(const Matrix& S) {
  const int m = static_cast<int>(S.cols());
  if (S.rows() == 0) return {0.0, Vector::Unit(m, 0)};
  Eigen::JacobiSVD<Matrix> svd(S, Eigen::ComputeFullV);
  const double sigma = (S.rows() < m) ? 0.0 : svd.singularValues()(m - 1);
  return {sigma, svd.matrixV().col(m - 1)};
}

class WitnessProblem {
public:
  explicit WitnessProblem(const CarnotSpec& spec) : spec_(spec), m_(spec.rank()), q_dim_(spec.dim() - spec.rank()) {
    for (int k = 0; k < q_dim_; ++k) {
      Covector e = Covector::Zero(spec.dim());
      e(m_ + k) = 1.0;
      basis_.push_back(s_matrix(spec, e));
    }
  }

  int q_dim() const { return q_dim_; }

  Matrix S(const Vector& q) const {
    Matrix out = Matrix::Zero(basis_.front().rows(), m_);
    for (int k = 0; k < q_dim_; ++k) out += q(k) * basis_[k];
    return out;
  }

  Covector hbar(const Vector& q) const {
    Covector h = Covector::Zero(spec_.dim());
    h.tail(q_dim_) = q;
    return h;
  }

  // One local descent from q0; returns the final q.
  Vector descend(Vector q, int iterations) const {
    auto eval = [&](const Vector& x) { return smallest_singular(S(x)); };
    SmallestSingular cur = eval(q);
    double alpha = 1.0;
    for (int it = 0; it < iterations && cur.sigma > 1e-14; ++it) {
      const Vector Su = S(q) * cur.u;
      Vector g(q_dim_);
      for (int k = 0; k < q_dim_; ++k) g(k) = 2.0 * (basis_[k] * cur.u).dot(Su);
      g -= g.dot(q) * q;
      const double gg = g.squaredNorm();
      if (!(gg > 1e-32)) break;
      const double f = cur.sigma * cur.sigma;
      alpha = std::min(alpha * 2.0, 1e3);
      bool moved = false;
      while (alpha > 1e-20) {
        const Vector trial = (q - alpha * g).normalized();
        const SmallestSingular next = eval(trial);
        if (next.sigma * next.sigma <= f - 1e-4 * alpha * gg) {
          q = trial;
          cur = next;
          moved = true;
          break;
        }
        alpha *= 0.5;
      }
      if (!moved) break;
    }
    // Alternating polish: for fixed u, S(q) u = M q is linear in q.
    for (int it = 0; it < 30 && cur.sigma > 1e-15; ++it) {
      Matrix M(basis_.front().rows(), q_dim_);
      for (int k = 0; k < q_dim_; ++k) M.col(k) = basis_[k] * cur.u;
      const SmallestSingular lin = smallest_singular(M);
      Vector trial = lin.u;
      if (trial.dot(q) < 0) trial = -trial;
      const SmallestSingular next = eval(trial);
      if (!(next.sigma < cur.sigma)) break;
      q = trial;
      cur = next;
    }
    return q;
  }

private:
  const CarnotSpec& spec_;
  int m_;
  int q_dim_;
  std::vector<Matrix> basis_;
};

struct StartResult {
  double sigma = std::numeric_limits<double>::infinity();
  Vector q;
  Vector u;
};

}  // namespace

bool verify_witness(const CarnotSpec& spec, const SingularWitness& w, double tol) {
  if (w.hbar.size() != spec.dim() || w.u.size() != spec.rank()) return false;
  if (w.hbar.head(spec.rank()).cwiseAbs().maxCoeff() != 0.0) return false;
  if (std::abs(w.hbar.norm() - 1.0) > 1e-12 || std::abs(w.u.norm() - 1.0) > 1e-12) return false;
  const Matrix S = s_matrix(spec, w.hbar);
  return (S * w.u).norm() <= tol;
}

WitnessSearchResult singular_witness_search(const CarnotSpec& spec, int budget, std::uint64_t seed, Execution exec,
                                            int iterations) {
  if (budget < 1) throw std::invalid_argument("singular_witness_search: budget must be >= 1");
  WitnessSearchResult res;
  res.budget = budget;
  res.seed = seed;
  const int rows = spec.dim() - spec.layer_dim(spec.step());
  if (spec.step() < 2 || rows == 0) {
    res.min_singular_value = std::numeric_limits<double>::infinity();
    return res;
  }
  const WitnessProblem problem(spec);
  std::vector<StartResult> starts(budget);
  auto run_start = [&](int i) {
    auto eng = stream_engine(seed, static_cast<std::uint64_t>(i), 0x7769);
    std::normal_distribution<double> normal(0.0, 1.0);
    Vector q(problem.q_dim());
    do {
      for (int k = 0; k < q.size(); ++k) q(k) = normal(eng);
    } while (!(q.norm() > 0));
    q.normalize();
    q = problem.descend(q, iterations);
    const SmallestSingular ss = smallest_singular(problem.S(q));
    starts[i] = {ss.sigma, q, ss.u};
  };
  if (exec == Execution::serial) {
    for (int i = 0; i < budget; ++i) run_start(i);
  } else {
#pragma omp parallel for schedule(dynamic, 1)
    for (int i = 0; i < budget; ++i) run_start(i);
  }

  int best = 0;
  for (int i = 1; i < budget; ++i) {
    if (starts[i].sigma < starts[best].sigma) best = i;
  }
  res.min_singular_value = starts[best].sigma;
  res.best_hbar = problem.hbar(starts[best].q);
  SingularWitness w{problem.hbar(starts[best].q), starts[best].u.normalized(), 0.0};
  w.sigma = (s_matrix(spec, w.hbar) * w.u).norm();
  if (verify_witness(spec, w)) res.witness = w;
  return res;
}

FatResult fat_check_step2(const CarnotSpec& spec, int budget, std::uint64_t seed) {
  if (spec.step() != 2) throw std::invalid_argument("fat_check_step2: group must have step 2");
  const int n = spec.dim();
  FatResult res;
  if (spec.layer_dim(2) == 1) {
    // Single bracket direction: fat iff the skew matrix A_ij = c_ij^n is invertible.
    res.exact = true;
    Covector h = Covector::Zero(n);
    h(n - 1) = 1.0;
    const Matrix A = s_matrix(spec, h);
    const SmallestSingular ss = smallest_singular(A);
    Eigen::JacobiSVD<Matrix> svd(A);
    const double scale = std::max(1.0, svd.singularValues()(0));
    res.min_singular_value = ss.sigma;
    if (ss.sigma > 1e-10 * scale) {
      res.verdict = FatVerdict::fat;
    } else {
      res.verdict = FatVerdict::not_fat;
      res.witness_v = ss.u;
      res.witness_h = h;
    }
    return res;
  }
  const WitnessSearchResult search = singular_witness_search(spec, budget, seed);
  res.min_singular_value = search.min_singular_value;
  if (search.witness) {
    res.verdict = FatVerdict::not_fat;
    res.witness_v = search.witness->u;
    res.witness_h = search.witness->hbar;
  }
  return res;
}

ScreenResult growth_vector_ideal_screen(const CarnotSpec& spec) {
  ScreenResult res;
  const int s = spec.step();
  const int m1 = spec.rank();
  if (s >= 3) {
    for (int r = 2; r <= s - 1; ++r) {
      if (spec.layer_dim(r) < m1) {
        res.verdict = IdealVerdict::not_ideal;
        res.reason = "growth vector has m_" + std::to_string(r) + " = " + std::to_string(spec.layer_dim(r)) +
                     " < m_1 = " + std::to_string(m1);
        return res;
      }
    }
    res.reason = "m_r >= m_1 for every 2 <= r <= s-1";
    return res;
  }
  if (s == 2) {
    const FatResult fat = fat_check_step2(spec);
    if (fat.verdict == FatVerdict::not_fat) {
      res.verdict = IdealVerdict::not_ideal;
      res.reason = "step 2 and not fat";
    } else if (fat.verdict == FatVerdict::fat) {
      res.reason = "screen silent; group is fat, hence ideal";
    } else {
      res.reason = "screen silent; fat check inconclusive";
    }
    return res;
  }
  res.reason = "step 1";
  return res;
}

AuditVerdict singularity_audit(const CarnotSpec& spec, int budget, std::uint64_t seed, Execution exec) {
  AuditVerdict v;
  v.group = spec.name();
  v.budget = budget;
  v.seed = seed;
  const WitnessSearchResult search = singular_witness_search(spec, budget, seed, exec);
  v.min_singular_value = search.min_singular_value;
  v.witness = search.witness;

  if (spec.step() == 2) {
    const FatResult fat = fat_check_step2(spec, budget, seed);
    if (fat.verdict == FatVerdict::fat) {
      v.verdict = "fat";
      v.reason = "exact fat check";
      return v;
    }
    if (fat.verdict == FatVerdict::not_fat) {
      v.verdict = "not-ideal";
      v.reason = "step 2 and not fat";
      if (!v.witness) {
        SingularWitness w{fat.witness_h.normalized(), fat.witness_v.normalized(), 0.0};
        w.sigma = (s_matrix(spec, w.hbar) * w.u).norm();
        if (verify_witness(spec, w)) v.witness = w;
      }
      return v;
    }
  }
  const ScreenResult screen = growth_vector_ideal_screen(spec);
  if (screen.verdict == IdealVerdict::not_ideal) {
    v.verdict = "not-ideal";
    v.reason = screen.reason;
    return v;
  }
  v.verdict = v.witness ? "witness-found" : "none-found";
  v.reason = v.witness ? "singular witness certified" : "none found within budget (not a proof of idealness)";
  return v;
}

std::string AuditVerdict::to_json() const {
  nlohmann::json j;
  j["group"] = group;
  j["verdict"] = verdict;
  auto vec = [](const Vector& x) { return std::vector<double>(x.data(), x.data() + x.size()); };
  j["witness_hbar"] = witness ? nlohmann::json(vec(witness->hbar)) : nlohmann::json(nullptr);
  j["witness_u"] = witness ? nlohmann::json(vec(witness->u)) : nlohmann::json(nullptr);
  j["min_singular_value"] =
      std::isfinite(min_singular_value) ? nlohmann::json(min_singular_value) : nlohmann::json(nullptr);
  j["budget"] = budget;
  j["seed"] = seed;
  j["reason"] = reason;
  return j.dump(2);
}

std::string to_string(FatVerdict v) {
  switch (v) {
    case FatVerdict::fat: return "fat";
    case FatVerdict::not_fat: return "not-fat";
    case FatVerdict::inconclusive: return "inconclusive";
  }
  return "inconclusive";
}

std::string to_string(IdealVerdict v) { return v == IdealVerdict::not_ideal ? "not-ideal" : "inconclusive"; }

}  // namespace carnot
