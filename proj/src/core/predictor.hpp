#ifndef MTC_CORE_PREDICTOR_HPP
#define MTC_CORE_PREDICTOR_HPP

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "core/alphabet.hpp"
#include "core/rational.hpp"

// Predictive models: the interface supplying one next-token distribution
// per position, a Laplace-smoothed n-gram implementation, a replay source
// for externally produced distributions, and the mismatch simulator that
// turns a distribution p into a perturbed p'.

namespace mtc {

// Per-token probabilities, length = alphabet size, entries >= 0, sum within
// 1e-9 of 1.
void validate_distribution(std::span<const double> probs);

struct CertificateCheck {
  bool holds;
  double worst_ratio;  // max over tokens of max(p/p', p'/p); 0/0 counts as 1
};

// Checks the multiplicative-mismatch bound: holds iff every ratio is
// strictly below c. A probability that is zero on exactly one side makes
// the ratio infinite.
CertificateCheck verify_certificate(std::span<const double> p, std::span<const double> p_prime,
                                    double c);

class Predictor {
 public:
  virtual ~Predictor() = default;
  virtual uint32_t alphabet_size() const = 0;
  // Distribution for the token at `position` (0-based), given the tokens
  // before it. Deterministic: equal (position, prefix) gives equal output.
  // Fills `out` (resized to the alphabet size).
  virtual void next_distribution(uint64_t position, std::span<const uint32_t> prefix,
                                 std::vector<double>& out) const = 0;
};

// Laplace-smoothed n-gram model. `order` is the context length: prediction
// conditions on the last min(order, available) tokens; an unseen context
// falls back to the uniform distribution through the smoothing term alone.
class NGramModel : public Predictor {
 public:
  NGramModel(TokenAlphabet alphabet, uint32_t order, double delta);

  void train(std::span<const uint32_t> tokens);
  void finalize();  // sort count rows; call once after the last train()

  uint32_t alphabet_size() const override { return alphabet_.size(); }
  const TokenAlphabet& alphabet() const { return alphabet_; }
  uint32_t order() const { return order_; }
  double delta() const { return delta_; }

  void next_distribution(uint64_t position, std::span<const uint32_t> prefix,
                         std::vector<double>& out) const override;

  // Canonical serialization (sorted contexts); equal models produce equal
  // bytes, so the content hash is stable across processes.
  std::vector<uint8_t> serialize() const;
  static NGramModel deserialize(std::span<const uint8_t> bytes);
  void save(const std::string& path) const;
  static NGramModel load(const std::string& path);
  uint64_t content_hash() const;

 private:
  using Row = std::vector<std::pair<uint32_t, uint64_t>>;  // (token, count)

  uint64_t pack_context(std::span<const uint32_t> ctx) const;

  TokenAlphabet alphabet_;
  uint32_t order_;
  uint32_t token_bits_;
  double delta_;
  bool finalized_ = false;
  // counts_[l]: contexts of length l, keyed by the packed token window.
  std::vector<std::unordered_map<uint64_t, Row>> counts_;
  mutable uint64_t hash_cache_ = 0;
  mutable bool hash_valid_ = false;
};

// Replays a stored stream of distributions, one record per position;
// context is ignored. Used for externally generated model outputs.
class ReplaySource : public Predictor {
 public:
  ReplaySource(uint32_t alphabet_size, std::vector<std::vector<double>> records);
  static ReplaySource load(const std::string& path);
  void save(const std::string& path) const;

  uint32_t alphabet_size() const override { return alphabet_size_; }
  uint64_t record_count() const { return records_.size(); }
  void next_distribution(uint64_t position, std::span<const uint32_t> prefix,
                         std::vector<double>& out) const override;

 private:
  uint32_t alphabet_size_;
  std::vector<std::vector<double>> records_;
};

enum class PerturbMode : uint8_t { certified = 0, stress = 1 };

// Multiplies each probability by an independent factor drawn log-uniformly
// from (1/c_sim, c_sim), then renormalizes. Certified mode resamples any
// entries whose post-renormalization ratio escapes the bound, so the output
// provably satisfies the certificate at c_sim; stress mode skips the check.
std::vector<double> perturb(std::span<const double> dist, const Rational& c_sim, uint64_t seed,
                            PerturbMode mode);

// Wraps a predictor so every emitted distribution is perturbed with a
// position-derived seed. Deterministic per (seed, position); safe to share.
class PerturbingPredictor : public Predictor {
 public:
  PerturbingPredictor(const Predictor& base, Rational c_sim, uint64_t seed, PerturbMode mode);

  uint32_t alphabet_size() const override { return base_.alphabet_size(); }
  void next_distribution(uint64_t position, std::span<const uint32_t> prefix,
                         std::vector<double>& out) const override;

 private:
  const Predictor& base_;
  Rational c_sim_;
  uint64_t seed_;
  PerturbMode mode_;
};

}  // namespace mtc

#endif
