#ifndef MTC_CORE_ANALYSIS_HPP
#define MTC_CORE_ANALYSIS_HPP

#include <cstdint>
#include <span>
#include <vector>

#include "core/codec.hpp"
#include "core/rational.hpp"

// Analytics around the codec: Monte Carlo verification of the shared-prefix
// excess bound, power-law fitting of predictive distributions, the γ*
// bucket-ratio optimizer, the expected-length estimator built on it, and
// per-run statistics summaries.

namespace mtc {

struct RankWindow {
  uint64_t lo;  // inclusive, 1-based rank
  uint64_t hi;  // inclusive
};

// The "body" region convention: ranks 6 through 10% of the alphabet.
RankWindow default_rank_window(uint64_t alphabet_size);

struct PowerLawFit {
  double alpha;  // negated log-log slope
  double r2;
  RankWindow window;
};

// Ordinary least squares of log p against log rank over the window, after
// sorting the distribution into rank order. Scale-invariant: a constant
// multiplier changes neither alpha nor r².
PowerLawFit fit_power_law(std::span<const double> dist, RankWindow window);

// Per-token excess-bits objective as a function of the rank-space bucket
// ratio g = γ*:
//   ζ = α·g^(1−α)·log₂g / (1 − g^(1−α)) + log₂((g − c*⁻⁴)/(1 − g^(1−α)))
double zeta_objective(double gamma_star, double alpha, double c_star);

struct BucketDesign {
  double gamma_star;       // rank-space ratio, > 1
  double gamma;            // probability-space ratio, = gamma_star^(-alpha)
  double c_star;
  double objective_value;  // ζ at gamma_star
};

// Minimizes zeta_objective over γ* by golden-section search inside a
// bracket found by expanding probes from `bracket_start`. When the
// objective has no interior minimum (c* = 1 makes it increasing on the
// whole domain), the search settles on the lower domain edge.
BucketDesign optimize_gamma(double alpha, double c_star, double bracket_start = 1.5);

struct EtaEstimate {
  double mean_eta;  // E[max shared prefix] over the candidate set
  double excess;    // mean_eta − log₂(u_size)
};

// Draws `u_size` random bit strings per trial and measures the longest
// prefix any of them shares with an independent target string. Strings are
// extended lazily, so prefixes are unbounded in principle.
EtaEstimate eta_monte_carlo(uint32_t u_size, uint32_t trials, uint64_t seed);

// Differential entropy (bits) of the rank variable under the fitted
// power-law density (α−1)·t^(−α) on [1, ∞).
double power_law_differential_entropy(double alpha);

// Closed-form per-token length estimate:
//   κ + 2.33276 + 2·log₂c* + log₂(α−1) + h[T] − α/((α−1)·ln2) + ζ(α,c*)
// with c* = c^(1/α) and ζ evaluated at the optimal γ*.
double estimate_expected_length(double alpha, const Rational& c, double kappa, double h_T);

struct RunSummary {
  uint64_t tokens = 0;
  std::vector<uint64_t> bucket_counts;
  std::vector<uint64_t> bits_histogram;  // index = bits for one token
  double bucket_entropy = 0.0;           // H[Ψ], bits
  double mean_bucket_bits = 0.0;         // E[|A|], bits
  double mean_m = 0.0;                   // over tokens with competitors
  double mean_log2_u = 0.0;              // over tokens with competitors
  uint64_t empty_u_tokens = 0;
  uint64_t total_bits = 0;
  double mean_bits = 0.0;
  double ratio = 0.0;  // raw_bits / total_bits; 0 when either side is 0
};

RunSummary summarize_run(std::span<const TokenStats> stats, uint32_t bucket_count,
                         uint64_t raw_bits);

}  // namespace mtc

#endif
