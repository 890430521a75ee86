#include "carnot/geodesic.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <stdexcept>

namespace carnot {

Covector euler_arnold_rhs(const CarnotSpec& spec, const Covector& h) {
  if (h.size() != spec.dim()) throw std::invalid_argument("euler_arnold_rhs: dimension mismatch");
  const int m = spec.rank();
  Covector dh = Covector::Zero(spec.dim());
  for (const auto& b : spec.brackets()) {
    // [v_i, v_j] = c v_k contributes u_i c h_k to dh_j and -u_j c h_k to dh_i.
    if (b.i < m) dh(b.j) += h(b.i) * b.coeff * h(b.k);
    if (b.j < m) dh(b.i) -= h(b.j) * b.coeff * h(b.k);
  }
  return dh;
}

double GeodesicPath::speed_drift() const {
  double worst = 0.0;
  for (double u : u_norm) worst = std::max(worst, std::abs(u - u_norm.front()));
  return worst;
}

ExtremalIntegrator::ExtremalIntegrator(const CarnotSpec& spec)
    : spec_(&spec), n_(spec.dim()), m_(spec.rank()), s_(spec.step()) {
  if (!spec.has_identity_metric()) {
    throw std::invalid_argument("geodesic integration needs an orthonormal first layer; use orthonormalized()");
  }
  for (const auto& b : spec.brackets()) {
    if (b.i < m_) couplings_.push_back({b.i, b.j, b.k, b.coeff});
    if (b.j < m_) couplings_.push_back({b.j, b.i, b.k, -b.coeff});
  }
  double fact = 1.0;
  for (int k = 0; k < s_; ++k) {
    fact *= (k + 1);
    dexp_coeff_.push_back(((k % 2 == 0) ? 1.0 : -1.0) / fact);
  }
  // h, c, 4 stage derivatives for each, stage state (h, c), u, and four work vectors.
  buf_.assign(static_cast<std::size_t>(n_) * 17, 0.0);
}

void ExtremalIntegrator::dexpinv_solve_into(const double* c, const double* rhs, double* x) {
  double* term = buf_.data() + 13 * n_;
  double* ad = buf_.data() + 14 * n_;
  double* nxt = buf_.data() + 15 * n_;
  double* tmp = buf_.data() + 16 * n_;
  std::copy(rhs, rhs + n_, x);
  if (s_ == 1) return;
  std::copy(rhs, rhs + n_, term);
  for (int j = 1; j < s_; ++j) {
    // term <- -(B(c) - I) term
    std::fill(nxt, nxt + n_, 0.0);
    std::copy(term, term + n_, ad);
    for (int k = 1; k < s_; ++k) {
      detail::bracket_into(*spec_, c, ad, tmp);
      std::copy(tmp, tmp + n_, ad);
      const double w = -dexp_coeff_[k];
      for (int i = 0; i < n_; ++i) nxt[i] += w * ad[i];
    }
    std::copy(nxt, nxt + n_, term);
    for (int i = 0; i < n_; ++i) x[i] += term[i];
  }
}

void ExtremalIntegrator::rhs(const double* h, const double* c, double* dh, double* dc) {
  std::fill(dh, dh + n_, 0.0);
  for (const auto& cp : couplings_) dh[cp.target] += h[cp.first] * cp.coeff * h[cp.source];
  double* u = buf_.data() + 12 * n_;
  std::fill(u, u + n_, 0.0);
  std::copy(h, h + m_, u);
  dexpinv_solve_into(c, u, dc);
}

void ExtremalIntegrator::run(const double* h0, double T, int steps, double* h_out, double* c_out,
                             const Observer* observer) {
  if (steps < 1) throw std::invalid_argument("integration needs steps >= 1");
  if (!(T > 0.0)) throw std::invalid_argument("integration needs T > 0");
  double* h = buf_.data();
  double* c = h + n_;
  double* kh[4] = {c + n_, c + 2 * n_, c + 3 * n_, c + 4 * n_};
  double* kc[4] = {c + 5 * n_, c + 6 * n_, c + 7 * n_, c + 8 * n_};
  double* sh = buf_.data() + 10 * n_;
  double* sc = buf_.data() + 11 * n_;
  std::copy(h0, h0 + n_, h);
  std::fill(c, c + n_, 0.0);
  const double dt = T / steps;
  if (observer) (*observer)(0, 0.0, h, c);
  for (int step = 0; step < steps; ++step) {
    rhs(h, c, kh[0], kc[0]);
    for (int i = 0; i < n_; ++i) {
      sh[i] = h[i] + 0.5 * dt * kh[0][i];
      sc[i] = c[i] + 0.5 * dt * kc[0][i];
    }
    rhs(sh, sc, kh[1], kc[1]);
    for (int i = 0; i < n_; ++i) {
      sh[i] = h[i] + 0.5 * dt * kh[1][i];
      sc[i] = c[i] + 0.5 * dt * kc[1][i];
    }
    rhs(sh, sc, kh[2], kc[2]);
    for (int i = 0; i < n_; ++i) {
      sh[i] = h[i] + dt * kh[2][i];
      sc[i] = c[i] + dt * kc[2][i];
    }
    rhs(sh, sc, kh[3], kc[3]);
    for (int i = 0; i < n_; ++i) {
      h[i] += dt / 6.0 * (kh[0][i] + 2.0 * kh[1][i] + 2.0 * kh[2][i] + kh[3][i]);
      c[i] += dt / 6.0 * (kc[0][i] + 2.0 * kc[1][i] + 2.0 * kc[2][i] + kc[3][i]);
    }
    if (observer) (*observer)(step + 1, (step + 1 == steps) ? T : dt * (step + 1), h, c);
  }
  if (h_out) std::copy(h, h + n_, h_out);
  if (c_out) std::copy(c, c + n_, c_out);
}

GroupPoint ExtremalIntegrator::endpoint(const Covector& h0, double T, int steps) {
  if (h0.size() != n_) throw std::invalid_argument("covector has wrong dimension");
  GroupPoint out(n_);
  run(h0.data(), T, steps, nullptr, out.data());
  return out;
}

GeodesicPath integrate_normal_extremal(const CarnotSpec& spec, const Covector& h0, double T, int steps) {
  if (h0.size() != spec.dim()) throw std::invalid_argument("covector has wrong dimension");
  ExtremalIntegrator integrator(spec);
  const int n = spec.dim();
  const int m = spec.rank();
  GeodesicPath path;
  path.t.reserve(steps + 1);
  path.c.reserve(steps + 1);
  path.h.reserve(steps + 1);
  path.u_norm.reserve(steps + 1);
  const ExtremalIntegrator::Observer record = [&](int, double t, const double* h, const double* c) {
    path.t.push_back(t);
    path.c.emplace_back(Eigen::Map<const Vector>(c, n));
    path.h.emplace_back(Eigen::Map<const Vector>(h, n));
    path.u_norm.push_back(Eigen::Map<const Vector>(h, m).norm());
  };
  integrator.run(h0.data(), T, steps, nullptr, nullptr, &record);
  return path;
}

GroupPoint exp_map(const CarnotSpec& spec, const Covector& h0, int steps) {
  ExtremalIntegrator integrator(spec);
  return integrator.endpoint(h0, 1.0, steps);
}

double path_length(const GeodesicPath& path) {
  double len = 0.0;
  for (std::size_t k = 1; k < path.t.size(); ++k) {
    len += 0.5 * (path.t[k] - path.t[k - 1]) * (path.u_norm[k] + path.u_norm[k - 1]);
  }
  return len;
}

bool LayerOrderReport::pass() const {
  return std::all_of(orders.begin(), orders.end(), [](const LayerOrderEntry& e) { return e.pass; });
}

double LayerOrderReport::max_forbidden() const {
  double worst = 0.0;
  for (const auto& e : orders) worst = std::max(worst, e.forbidden_norm);
  return worst;
}

LayerOrderReport taylor_layer_orders(const CarnotSpec& spec, const Covector& h0, int max_order, double t_max,
                                     int nodes) {
  if (max_order < 1 || max_order > 6) throw std::invalid_argument("taylor_layer_orders: max_order must be in 1..6");
  if (nodes < max_order + 2) throw std::invalid_argument("taylor_layer_orders: too few nodes for the fit");
  const int n = spec.dim();
  constexpr int kSubsteps = 20;

  Matrix samples(nodes, n);
  Vector tau(nodes);
  ExtremalIntegrator integrator(spec);
  const ExtremalIntegrator::Observer grab = [&](int k, double, const double*, const double* c) {
    if (k % kSubsteps != 0) return;
    const int row = k / kSubsteps;
    tau(row) = static_cast<double>(row) / (nodes - 1);
    for (int i = 0; i < n; ++i) samples(row, i) = c[i];
  };
  integrator.run(h0.data(), t_max, (nodes - 1) * kSubsteps, nullptr, nullptr, &grab);

  // Fit in scaled time tau = t / t_max to keep the Vandermonde matrix tame.
  Matrix V(nodes, max_order + 1);
  for (int r = 0; r < nodes; ++r) {
    double p = 1.0;
    for (int l = 0; l <= max_order; ++l) {
      V(r, l) = p;
      p *= tau(r);
    }
  }
  LayerOrderReport report;
  Eigen::JacobiSVD<Matrix> svd(V);
  const auto& sv = svd.singularValues();
  report.condition_number = sv(0) / sv(sv.size() - 1);
  report.ill_conditioned = report.condition_number > 1e8;
  const Matrix coeffs = V.colPivHouseholderQr().solve(samples);

  double fact = 1.0;
  for (int l = 1; l <= max_order; ++l) {
    fact *= l;
    // c^(l)(0) = l! a_l / t_max^l
    const Vector deriv = coeffs.row(l).transpose() * (fact / std::pow(t_max, l));
    const int first_forbidden = (l == 1) ? 2 : l;
    double forbidden = 0.0;
    for (int i = 0; i < n; ++i) {
      if (spec.degree(i) >= first_forbidden) forbidden += deriv(i) * deriv(i);
    }
    LayerOrderEntry e;
    e.order = l;
    e.forbidden_norm = std::sqrt(forbidden);
    e.derivative_norm = deriv.norm();
    e.tolerance = 1e-6 * std::max(1.0, e.derivative_norm);
    e.pass = e.forbidden_norm <= e.tolerance;
    report.orders.push_back(e);
  }
  return report;
}

void write_curve_csv(std::ostream& out, const GeodesicPath& path) {
  const int n = path.c.empty() ? 0 : static_cast<int>(path.c.front().size());
  out << "t";
  for (int i = 1; i <= n; ++i) out << ",c_" << i;
  for (int i = 1; i <= n; ++i) out << ",h_" << i;
  out << ",u_norm\n";
  const auto old_prec = out.precision(17);
  for (std::size_t k = 0; k < path.t.size(); ++k) {
    out << path.t[k];
    for (int i = 0; i < n; ++i) out << ',' << path.c[k](i);
    for (int i = 0; i < n; ++i) out << ',' << path.h[k](i);
    out << ',' << path.u_norm[k] << '\n';
  }
  out.precision(old_prec);
}

}  // namespace carnot
