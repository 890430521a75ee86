// carnot: command-line driver for the Carnot-group toolkit.
// Exit codes: 0 pass, 1 violation / witness found, 2 invalid input.

#include "carnot/contraction.hpp"
#include "carnot/geodesic.hpp"
#include "carnot/group_io.hpp"
#include "carnot/heisenberg.hpp"
#include "carnot/lie_core.hpp"
#include "carnot/parallel.hpp"
#include "carnot/riemann.hpp"
#include "carnot/singularity.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace {

using namespace carnot;

constexpr int kPass = 0;
constexpr int kFail = 1;
constexpr int kBadInput = 2;

struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Common {
  int threads = 0;
  std::uint64_t seed = 0;
  std::string out;
};

void emit(const Common& c, const std::string& text) {
  if (c.out.empty()) {
    std::cout << text;
    if (!text.empty() && text.back() != '\n') std::cout << '\n';
    return;
  }
  std::ofstream f(c.out, std::ios::binary);
  if (!f) throw InputError("cannot write " + c.out);
  f << text;
  if (!text.empty() && text.back() != '\n') f << '\n';
}

std::string format_report(const ValidationReport& rep) {
  std::ostringstream os;
  if (rep.ok()) {
    os << "valid\n";
  } else {
    for (const auto& v : rep.violations) os << "violation: " << v.invariant << ": " << v.detail << '\n';
  }
  return os.str();
}

/// Load, validate, orthonormalize.
CarnotSpec load_checked(const std::string& path) {
  CarnotSpec raw = load_group(path);
  const ValidationReport rep = validate_spec(raw);
  if (!rep.ok()) throw InputError("invalid group " + path + ":\n" + format_report(rep));
  try {
    return raw.orthonormalized();
  } catch (const std::invalid_argument& e) {
    throw InputError(e.what());
  }
}

Covector parse_covector(const std::string& text, int n) {
  std::vector<double> vals;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t pos = 0;
      vals.push_back(std::stod(item, &pos));
      if (item.find_first_not_of(" \t", pos) != std::string::npos) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw InputError("covector entry '" + item + "' is not a number");
    }
  }
  if (static_cast<int>(vals.size()) != n) {
    throw InputError("covector needs " + std::to_string(n) + " comma-separated entries, got " + std::to_string(vals.size()));
  }
  return Eigen::Map<Covector>(vals.data(), n);
}

std::vector<double> as_vector(const Vector& v) { return {v.data(), v.data() + v.size()}; }

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--threads", c.threads, "worker threads (CARNOT_THREADS overrides)")->check(CLI::NonNegativeNumber);
  cmd->add_option("--seed", c.seed, "RNG seed");
  cmd->add_option("--out", c.out, "write the report to this file instead of stdout");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Carnot-group geodesics, densities and curvature-exponent checks"};
  app.require_subcommand(1);
  Common common;
  std::function<int()> action;

  // validate
  std::string group;
  auto* validate = app.add_subcommand("validate", "check the algebra axioms of a group file");
  validate->add_option("group", group, "group JSON file or built-in name")->required();
  add_common(validate, common);
  validate->callback([&] {
    action = [&] {
      const CarnotSpec spec = load_group(group);
      const ValidationReport rep = validate_spec(spec);
      emit(common, format_report(rep));
      return rep.ok() ? kPass : kBadInput;
    };
  });

  // bound
  auto* bound = app.add_subcommand("bound", "print n, m, D and the lower bound D + n - m");
  bound->add_option("group", group)->required();
  add_common(bound, common);
  bound->callback([&] {
    action = [&] {
      const CarnotSpec spec = load_checked(group);
      std::ostringstream os;
      os << "n=" << spec.dim() << " m=" << spec.rank() << " D=" << homogeneous_dimension(spec)
         << " bound=" << theorem2_bound(spec) << '\n';
      emit(common, os.str());
      return kPass;
    };
  });

  // geodesic
  std::string h_text;
  double T = 1.0;
  int steps = kDefaultSteps;
  auto* geodesic = app.add_subcommand("geodesic", "integrate a normal extremal and write the curve CSV");
  geodesic->add_option("group", group)->required();
  geodesic->add_option("--covector", h_text, "initial covector, comma separated")->required();
  geodesic->add_option("--T", T, "final time")->check(CLI::PositiveNumber);
  geodesic->add_option("--steps", steps, "RK4 steps")->check(CLI::PositiveNumber);
  add_common(geodesic, common);
  geodesic->callback([&] {
    action = [&] {
      const CarnotSpec spec = load_checked(group);
      const GeodesicPath path = integrate_normal_extremal(spec, parse_covector(h_text, spec.dim()), T, steps);
      std::ostringstream os;
      write_curve_csv(os, path);
      emit(common, os.str());
      return kPass;
    };
  });

  // density
  double s_min = 1e-3, s_max = 0.9;
  int points = 25;
  double fd_step = 1e-5;
  auto* density_cmd = app.add_subcommand("density", "scaled density profile D(sh) and its vanishing order");
  density_cmd->add_option("group", group)->required();
  density_cmd->add_option("--covector", h_text, "covector, comma separated")->required();
  density_cmd->add_option("--s-min", s_min)->check(CLI::Range(1e-12, 1.0));
  density_cmd->add_option("--s-max", s_max)->check(CLI::Range(1e-12, 1.0));
  density_cmd->add_option("--points", points)->check(CLI::Range(2, 100000));
  density_cmd->add_option("--fd-step", fd_step)->check(CLI::PositiveNumber);
  density_cmd->add_option("--steps", steps)->check(CLI::PositiveNumber);
  add_common(density_cmd, common);
  density_cmd->callback([&] {
    action = [&] {
      const CarnotSpec spec = load_checked(group);
      const Covector h = parse_covector(h_text, spec.dim());
      const DensityOptions opt{fd_step, steps};
      const DensityProfile prof = scaled_density_profile(spec, h, geometric_grid(s_min, s_max, points), opt);
      const SlopeEstimate slope = vanishing_order(prof);
      nlohmann::json j;
      j["group"] = spec.name();
      j["h"] = as_vector(h);
      j["D_h"] = density(spec, h, opt);
      j["s"] = prof.s;
      j["D"] = prof.D;
      j["scaled"] = prof.scaled;
      j["truncated"] = prof.truncated;
      j["vanishing_order"] = slope.degenerate ? nlohmann::json(nullptr) : nlohmann::json(slope.slope);
      j["vanishing_order_std_error"] = slope.std_error;
      j["theorem2_bound"] = theorem2_bound(spec);
      emit(common, j.dump(2));
      return kPass;
    };
  });

  // exponent
  int samples = 1000;
  std::optional<double> N_opt;
  double beta = 3.0;
  double tolerance = 1e-3;
  auto* exponent = app.add_subcommand("exponent", "estimate the density-level curvature exponent by sampling");
  exponent->add_option("group", group)->required();
  exponent->add_option("--samples", samples)->check(CLI::PositiveNumber);
  exponent->add_option("--N", N_opt, "exponent to test (default: D + n - m)");
  exponent->add_option("--s-min", s_min)->check(CLI::Range(1e-12, 1.0));
  exponent->add_option("--s-max", s_max)->check(CLI::Range(1e-12, 1.0));
  exponent->add_option("--points", points)->check(CLI::Range(2, 100000));
  exponent->add_option("--beta", beta)->check(CLI::PositiveNumber);
  exponent->add_option("--tolerance", tolerance)->check(CLI::NonNegativeNumber);
  exponent->add_option("--fd-step", fd_step)->check(CLI::PositiveNumber);
  exponent->add_option("--steps", steps)->check(CLI::PositiveNumber);
  add_common(exponent, common);
  exponent->callback([&] {
    action = [&] {
      const CarnotSpec spec = load_checked(group);
      SamplerConfig cfg;
      cfg.samples = samples;
      cfg.beta = beta;
      cfg.tolerance = tolerance;
      cfg.density = {fd_step, steps};
      const double N = N_opt.value_or(theorem2_bound(spec));
      const McpReport rep =
          estimate_curvature_exponent(spec, cfg, geometric_grid(s_min, s_max, points), common.seed, N);
      emit(common, rep.to_json());
      return rep.pass() ? kPass : kFail;
    };
  });

  // mcp-density
  auto* mcp_density = app.add_subcommand("mcp-density", "check s^n D(sh) >= s^N D(h) along one covector's profile");
  mcp_density->add_option("group", group)->required();
  mcp_density->add_option("--covector", h_text, "covector, comma separated")->required();
  mcp_density->add_option("--N", N_opt, "exponent to test (default: D + n - m)");
  mcp_density->add_option("--s-min", s_min)->check(CLI::Range(1e-12, 1.0));
  mcp_density->add_option("--s-max", s_max)->check(CLI::Range(1e-12, 1.0));
  mcp_density->add_option("--points", points)->check(CLI::Range(2, 100000));
  mcp_density->add_option("--tolerance", tolerance)->check(CLI::NonNegativeNumber);
  mcp_density->add_option("--fd-step", fd_step)->check(CLI::PositiveNumber);
  mcp_density->add_option("--steps", steps)->check(CLI::PositiveNumber);
  add_common(mcp_density, common);
  mcp_density->callback([&] {
    action = [&] {
      const CarnotSpec spec = load_checked(group);
      const Covector h = parse_covector(h_text, spec.dim());
      const DensityOptions opt{fd_step, steps};
      const double N = N_opt.value_or(theorem2_bound(spec));
      const double D_h = density(spec, h, opt);
      if (!(D_h > 0)) throw InputError("D(h) is not positive at the given covector");
      McpReport rep;
      rep.group = spec.name();
      rep.N_tested = N;
      rep.samples = 1;
      rep.seed = common.seed;
      rep.tolerance = tolerance;
      bool any = false;
      for (double s : geometric_grid(s_min, s_max, points)) {
        if (!(s < 1)) continue;
        const double D_sh = density(spec, Covector(s * h), opt);
        const double v = (D_sh > 0) ? required_exponent_from(spec.dim(), D_h, D_sh, s)
                                    : std::numeric_limits<double>::infinity();
        if (!any || v > rep.sup_required_exponent) {
          rep.sup_required_exponent = v;
          rep.sup_s = s;
          any = true;
        }
        if (v > N + tolerance) rep.violations.push_back({h, s, v});
      }
      emit(common, rep.to_json());
      return rep.pass() ? kPass : kFail;
    };
  });

  // singular
  int budget = 100;
  auto* singular = app.add_subcommand("singular", "fat check, growth-vector screen and singular-witness search");
  singular->add_option("group", group)->required();
  singular->add_option("--budget", budget, "number of descent starts")->check(CLI::PositiveNumber);
  add_common(singular, common);
  singular->callback([&] {
    action = [&] {
      const CarnotSpec spec = load_checked(group);
      const AuditVerdict v = singularity_audit(spec, budget, common.seed);
      emit(common, v.to_json());
      return v.found_singular() ? kFail : kPass;
    };
  });

  // heisenberg verify
  double s_val = 0.5, N_val = 5.0, eps = 0.0;
  long long mc_samples = 1000000;
  std::string set_json = R"({"type": "annulus", "r_in": 0.5, "r_out": 1.0})";
  auto* heis = app.add_subcommand("heisenberg", "closed-form Heisenberg checks");
  heis->require_subcommand(1);
  auto* verify = heis->add_subcommand("verify", "set-level Monte Carlo check of vol(A_s) >= s^N vol(A)");
  verify->add_option("--s", s_val)->check(CLI::Range(1e-12, 1.0));
  verify->add_option("--N", N_val);
  verify->add_option("--samples", mc_samples)->check(CLI::Range(1000LL, 1000000000000LL));
  verify->add_option("--eps", eps)->check(CLI::NonNegativeNumber);
  verify->add_option("--set", set_json, "set spec JSON (annulus or box)");
  add_common(verify, common);
  verify->callback([&] {
    action = [&] {
      const auto set = heisenberg::SetSpec::from_json(set_json);
      const auto rep = heisenberg::mcp_monte_carlo(set, s_val, N_val, mc_samples, eps, common.seed);
      emit(common, rep.to_json());
      return rep.pass() ? kPass : kFail;
    };
  });

  // riemann compare
  double K = 0.0;
  int dim = 3;
  std::string model = "equality";
  double kappa = 1.0;
  std::string csv_path;
  T = 1.0;
  steps = kDefaultSteps;
  auto* riem = app.add_subcommand("riemann", "Jacobi / Riccati comparison on model spaces");
  riem->require_subcommand(1);
  auto* compare = riem->add_subcommand("compare", "compare a constant-curvature model against Ric >= K");
  compare->add_option("--K", K, "Ricci lower bound");
  compare->add_option("--n", dim, "manifold dimension")->check(CLI::Range(2, 64));
  compare->add_option("--model", model, "equality (R = K/(n-1) I) or constant (R = kappa I)")
      ->check(CLI::IsMember({"equality", "constant"}));
  compare->add_option("--kappa", kappa, "sectional curvature of the constant model");
  compare->add_option("--T", T)->check(CLI::PositiveNumber);
  compare->add_option("--steps", steps)->check(CLI::PositiveNumber);
  compare->add_option("--csv", csv_path, "write t,D to this file");
  add_common(compare, common);
  compare->callback([&] {
    action = [&] {
      const double sect = (model == "equality") ? K / (dim - 1) : kappa;
      const CurvatureFn R = constant_curvature_model(sect * (dim - 1), dim);
      const ComparisonReport rep = comparison_check(K, dim, R, T, steps);
      if (!csv_path.empty()) {
        std::ofstream f(csv_path);
        if (!f) throw InputError("cannot write " + csv_path);
        write_determinant_csv(f, jacobi_integrate(R, dim, T, std::max(4, (steps + 3) / 4 * 4)));
      }
      emit(common, rep.to_json());
      return rep.min_margin >= -1e-6 ? kPass : kFail;
    };
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kBadInput;
  }

  try {
    set_thread_count(resolve_thread_count(common.threads));
    return action ? action() : kBadInput;
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kBadInput;
  } catch (const GroupFileError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kBadInput;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kBadInput;
  } catch (const std::domain_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kBadInput;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kBadInput;
  }
}
