#pragma once

#include "carnot/lie_core.hpp"
#include "carnot/parallel.hpp"

#include <cstdint>
#include <optional>
#include <string>

namespace carnot {

inline constexpr double kWitnessTolerance = 1e-10;

/// S_hbar: R^m -> R^{n - m_s}, row a (a in V_1..V_{s-1}), column j (j in V_1):
///   sum_k hbar_k c_{ja}^k,  k in V_{deg(a)+1}.
/// S_hbar u = 0 means the constant control u keeps hbar stationary under the
/// Euler-Arnold flow. Throws std::invalid_argument if hbar^1 != 0.
Matrix s_matrix(const CarnotSpec& spec, const Covector& hbar);

struct SingularWitness {
  Covector hbar;  // unit, hbar^1 = 0
  Vector u;       // unit, S_hbar u ~ 0
  double sigma = 0.0;
};

struct WitnessSearchResult {
  std::optional<SingularWitness> witness;
  double min_singular_value = 0.0;  // best value reached over all starts
  Covector best_hbar;
  int budget = 0;
  std::uint64_t seed = 0;
};

/// Multi-start projected-gradient descent of sigma_min(S_hbar)^2 over the
/// unit sphere of {hbar^1 = 0} (budget starts, `iterations` steps each,
/// alternating kernel polish at the end). Start i uses stream_engine(seed, i).
/// A witness is returned only if verify_witness accepts it; "none found" is
/// not a proof that S_hbar is injective for every hbar.
WitnessSearchResult singular_witness_search(const CarnotSpec& spec, int budget = 100, std::uint64_t seed = 0,
                                            Execution exec = Execution::parallel, int iterations = 500);

/// Recomputes S_hbar from scratch and checks the witness invariants.
bool verify_witness(const CarnotSpec& spec, const SingularWitness& w, double tol = kWitnessTolerance);

enum class FatVerdict { fat, not_fat, inconclusive };

struct FatResult {
  FatVerdict verdict = FatVerdict::inconclusive;
  bool exact = false;
  Vector witness_v;      // v in V_1 with [v, V_1] != V_2 (not_fat only)
  Covector witness_h;    // h in V_2^* annihilating [v, V_1]
  double min_singular_value = 0.0;
};

/// Step-2 fatness. m_2 = 1: exact test on the skew matrix of the single
/// bracket. m_2 > 1: searches for h in V_2^* with h([v, .]) = 0 on V_1,
/// equivalently a kernel of S_h; not-fat with witness, otherwise inconclusive.
/// Throws std::invalid_argument when step != 2.
FatResult fat_check_step2(const CarnotSpec& spec, int budget = 100, std::uint64_t seed = 0);

enum class IdealVerdict { not_ideal, inconclusive };

struct ScreenResult {
  IdealVerdict verdict = IdealVerdict::inconclusive;
  std::string reason;
};

/// not-ideal if s >= 3 and m_r < m_1 for some 2 <= r <= s-1, or if s = 2 and
/// fat_check_step2 is conclusively not-fat; inconclusive otherwise.
ScreenResult growth_vector_ideal_screen(const CarnotSpec& spec);

struct AuditVerdict {
  std::string group;
  std::string verdict;  // "fat", "not-ideal", "witness-found", "none-found"
  std::optional<SingularWitness> witness;
  double min_singular_value = 0.0;
  int budget = 0;
  std::uint64_t seed = 0;
  std::string reason;

  bool found_singular() const { return verdict == "not-ideal" || verdict == "witness-found"; }
  std::string to_json() const;
};

/// Fat check (step 2), growth-vector screen and witness search combined.
AuditVerdict singularity_audit(const CarnotSpec& spec, int budget = 100, std::uint64_t seed = 0,
                               Execution exec = Execution::parallel);

std::string to_string(FatVerdict v);
std::string to_string(IdealVerdict v);

}  // namespace carnot
