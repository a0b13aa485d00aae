// C ABI over the core library: opaque handles, error codes, thread-local
// error messages. Exceptions never cross this boundary.

#include "mtc.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <span>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "core/alphabet.hpp"
#include "core/analysis.hpp"
#include "core/buckets.hpp"
#include "core/codec.hpp"
#include "core/container.hpp"
#include "core/errors.hpp"
#include "core/hash.hpp"
#include "core/longform.hpp"
#include "core/predictor.hpp"
#include "core/rational.hpp"
#include "core/rng.hpp"

using namespace mtc;

struct mtc_model {
  std::unique_ptr<NGramModel> ngram;
  std::unique_ptr<ReplaySource> replay;
  uint64_t hash = 0;
};

namespace {

thread_local std::string g_last_error = "no error";

int map_code(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_argument: return MTC_E_INVALID_ARGUMENT;
    case ErrorCode::invalid_token: return MTC_E_INVALID_TOKEN;
    case ErrorCode::invalid_probability: return MTC_E_INVALID_PROBABILITY;
    case ErrorCode::unknown_word: return MTC_E_UNKNOWN_WORD;
    case ErrorCode::truncated_stream: return MTC_E_TRUNCATED;
    case ErrorCode::decode_integrity: return MTC_E_DECODE_INTEGRITY;
    case ErrorCode::calibration: return MTC_E_CALIBRATION;
    case ErrorCode::certification: return MTC_E_CERTIFICATION;
    case ErrorCode::replay_underrun: return MTC_E_REPLAY_UNDERRUN;
    case ErrorCode::domain: return MTC_E_DOMAIN;
    case ErrorCode::optimizer: return MTC_E_OPTIMIZER;
    case ErrorCode::io: return MTC_E_IO;
    case ErrorCode::bad_format: return MTC_E_BAD_FORMAT;
    case ErrorCode::model_mismatch: return MTC_E_MODEL_MISMATCH;
  }
  return MTC_E_INTERNAL;
}

template <typename F>
int guarded(F&& body) {
  try {
    body();
    return MTC_OK;
  } catch (const Error& e) {
    g_last_error = e.what();
    return map_code(e.code());
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return MTC_E_INTERNAL;
  }
}

void require(bool ok, const char* what) {
  if (!ok) fail(ErrorCode::invalid_argument, what);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::io, "cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, std::span<const uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::io, "cannot open file for writing: " + path);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) fail(ErrorCode::io, "write failed: " + path);
}

// --- spec-string parsing ---------------------------------------------------

TokenAlphabet parse_alphabet_spec(const std::string& spec) {
  if (spec == "byte") return TokenAlphabet::bytes();
  if (spec.rfind("word:", 0) == 0) return TokenAlphabet::words_from_file(spec.substr(5));
  if (spec.rfind("external:", 0) == 0) {
    uint64_t n = std::stoull(spec.substr(9));
    if (n < 2 || n > UINT32_MAX) fail(ErrorCode::invalid_argument, "bad external alphabet size");
    return TokenAlphabet::external(static_cast<uint32_t>(n));
  }
  fail(ErrorCode::invalid_argument, "alphabet spec must be byte, word:<path>, or external:<size>");
}

BucketPartition load_partition_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::io, "cannot open partition file: " + path);
  std::string word;
  while (in >> word && !word.empty() && word[0] == '#') std::getline(in, word);
  if (word == "geometric") {
    std::string ratio;
    uint32_t count;
    if (!(in >> ratio >> count)) fail(ErrorCode::bad_format, "malformed geometric partition file");
    return BucketPartition::geometric(Rational::parse(ratio), count);
  }
  if (word == "explicit") {
    uint32_t count;
    if (!(in >> count)) fail(ErrorCode::bad_format, "malformed explicit partition file");
    std::vector<double> bounds(count);
    for (uint32_t i = 0; i < count; ++i) {
      std::string tok;
      if (!(in >> tok)) fail(ErrorCode::bad_format, "partition file boundary list truncated");
      bounds[i] = std::strtod(tok.c_str(), nullptr);
    }
    return BucketPartition::explicit_list(std::move(bounds));
  }
  fail(ErrorCode::bad_format, "partition file must start with 'geometric' or 'explicit'");
}

BucketPartition parse_buckets_spec(const char* spec) {
  if (!spec) return BucketPartition::geometric(Rational(1, 8), 33);
  std::string s(spec);
  if (s.rfind("geometric:", 0) == 0) {
    auto rest = s.substr(10);
    auto colon = rest.find(':');
    if (colon == std::string::npos)
      fail(ErrorCode::invalid_argument, "buckets spec needs geometric:<gamma>:<count>");
    return BucketPartition::geometric(Rational::parse(rest.substr(0, colon)),
                                      static_cast<uint32_t>(std::stoul(rest.substr(colon + 1))));
  }
  if (s.rfind("file:", 0) == 0) return load_partition_file(s.substr(5));
  fail(ErrorCode::invalid_argument, "buckets spec must be geometric:<gamma>:<count> or file:<path>");
}

BucketCode load_code_file(const std::string& path, uint32_t bucket_count) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::io, "cannot open code file: " + path);
  std::string word;
  uint32_t count;
  if (!(in >> word >> count) || word != "huffman")
    fail(ErrorCode::bad_format, "code file must start with 'huffman <count>'");
  if (count != bucket_count)
    fail(ErrorCode::invalid_argument, "code file covers " + std::to_string(count) +
                                          " buckets, partition has " + std::to_string(bucket_count));
  std::vector<uint8_t> lengths(count);
  for (uint32_t i = 0; i < count; ++i) {
    uint32_t l;
    if (!(in >> l) || l > 255) fail(ErrorCode::bad_format, "bad length in code file");
    lengths[i] = static_cast<uint8_t>(l);
  }
  return BucketCode::from_lengths(CodeKind::huffman, lengths);
}

BucketCode parse_code_spec(const char* spec, uint32_t bucket_count) {
  if (!spec || std::string(spec) == "unary") return BucketCode::unary(bucket_count);
  std::string s(spec);
  if (s.rfind("huffman:", 0) == 0) return load_code_file(s.substr(8), bucket_count);
  fail(ErrorCode::invalid_argument, "code spec must be unary or huffman:<path>");
}

struct PerturbSpec {
  Rational c_sim;
  PerturbMode mode;
  uint64_t seed;
};

PerturbSpec parse_perturb_spec(const std::string& s) {
  auto c1 = s.find(':');
  auto c2 = s.find(':', c1 == std::string::npos ? c1 : c1 + 1);
  if (c1 == std::string::npos || c2 == std::string::npos)
    fail(ErrorCode::invalid_argument, "perturb spec is <c_sim>:<certified|stress>:<seed>");
  PerturbSpec out;
  out.c_sim = Rational::parse(s.substr(0, c1));
  std::string mode = s.substr(c1 + 1, c2 - c1 - 1);
  if (mode == "certified")
    out.mode = PerturbMode::certified;
  else if (mode == "stress")
    out.mode = PerturbMode::stress;
  else
    fail(ErrorCode::invalid_argument, "perturb mode must be certified or stress");
  out.seed = std::stoull(s.substr(c2 + 1));
  return out;
}

// --- model plumbing --------------------------------------------------------

const Predictor& predictor_of(const mtc_model* model) {
  require(model != nullptr, "model is NULL");
  if (model->ngram) return *model->ngram;
  return *model->replay;
}

TokenAlphabet alphabet_of(const mtc_model* model) {
  if (model->ngram) return model->ngram->alphabet();
  uint32_t n = model->replay->alphabet_size();
  return n == 256 ? TokenAlphabet::bytes() : TokenAlphabet::external(n);
}

// Perturbs every distribution on its way to the decoder and tracks the
// worst mismatch ratio actually produced, for the decompress report.
class TrackingPerturb final : public Predictor {
 public:
  TrackingPerturb(const Predictor& base, PerturbSpec spec) : base_(base), spec_(spec) {}

  uint32_t alphabet_size() const override { return base_.alphabet_size(); }

  void next_distribution(uint64_t position, std::span<const uint32_t> prefix,
                         std::vector<double>& out) const override {
    base_.next_distribution(position, prefix, scratch_);
    out = perturb(scratch_, spec_.c_sim, mix64(spec_.seed ^ mix64(position + 1)), spec_.mode);
    double w = verify_certificate(scratch_, out, spec_.c_sim.value()).worst_ratio;
    if (w > worst_) worst_ = w;
  }

  double worst_ratio() const { return worst_; }

 private:
  const Predictor& base_;
  PerturbSpec spec_;
  mutable std::vector<double> scratch_;
  mutable double worst_ = 1.0;
};

// --- compress / decompress cores -------------------------------------------

std::vector<uint8_t> compress_core(const mtc_model* model, std::span<const uint8_t> data,
                                   const mtc_compress_options* options,
                                   mtc_compress_report* report) {
  mtc_compress_options defaults{};
  if (!options) options = &defaults;

  TokenAlphabet alphabet = alphabet_of(model);
  std::vector<uint32_t> tokens =
      alphabet.tokenize(std::string(reinterpret_cast<const char*>(data.data()), data.size()));

  BucketPartition partition = parse_buckets_spec(options->buckets);
  BucketCode code = parse_code_spec(options->code, partition.bucket_count());
  Rational c = options->c ? Rational::parse(options->c) : Rational(1, 1);
  if (c.num < c.den) fail(ErrorCode::invalid_argument, "mismatch factor must be at least 1");

  CodecParams params{partition, code, LongformTable(options->seed, alphabet.size()), c};
  EncodeResult enc = encode_sequence(predictor_of(model), tokens, params);

  Container container;
  ContainerHeader& h = container.header;
  h.alphabet_kind = alphabet.kind();
  h.alphabet_size = alphabet.size();
  h.master_seed = options->seed;
  h.c = c;
  h.partition = partition.spec();
  h.code_kind = code.kind();
  if (code.kind() == CodeKind::huffman) h.code_lengths = code.lengths();
  h.model_kind = model->ngram ? ModelBinding::ngram : ModelBinding::replay;
  h.model_hash = model->hash;
  h.token_count = tokens.size();
  h.payload_bits = enc.payload_bits;
  container.payload = std::move(enc.payload);

  if (options->raw_bits_path) write_file(options->raw_bits_path, container.payload);

  std::vector<uint8_t> bytes = serialize_container(container);
  if (report) {
    *report = {};
    report->tokens = tokens.size();
    report->payload_bits = enc.payload_bits;
    report->container_bytes = bytes.size();
    if (!enc.stats.empty()) {
      RunSummary s = summarize_run(enc.stats, partition.bucket_count(), 8 * data.size());
      report->mean_bits_per_token = s.mean_bits;
      report->bucket_entropy = s.bucket_entropy;
      report->mean_bucket_bits = s.mean_bucket_bits;
      report->ratio = s.ratio;
    }
  }
  return bytes;
}

std::vector<uint8_t> decompress_core(const mtc_model* model, std::span<const uint8_t> bytes,
                                     const mtc_decompress_options* options,
                                     mtc_decompress_report* report) {
  mtc_decompress_options defaults{};
  if (!options) options = &defaults;
  require(model != nullptr, "model is NULL");

  Container container = parse_container(bytes);
  const ContainerHeader& h = container.header;

  const Predictor& base = predictor_of(model);
  if (h.alphabet_size != base.alphabet_size())
    fail(ErrorCode::model_mismatch, "container alphabet size " + std::to_string(h.alphabet_size) +
                                        " does not match the model");
  if (h.model_kind == ModelBinding::ngram) {
    if (!model->ngram) fail(ErrorCode::model_mismatch, "container was bound to an n-gram model");
    if (h.model_hash != model->hash)
      fail(ErrorCode::model_mismatch, "model content hash does not match the container binding");
    if (h.alphabet_kind != model->ngram->alphabet().kind())
      fail(ErrorCode::model_mismatch, "container alphabet kind does not match the model");
  } else if (!model->replay) {
    // Replay-bound containers accept any replay of the right shape: the
    // decoder's distributions may legitimately differ from the encoder's.
    fail(ErrorCode::model_mismatch, "container was bound to a replay source");
  }

  CodecParams params = params_from_header(h);

  std::unique_ptr<TrackingPerturb> wrapper;
  const Predictor* decoder = &base;
  if (options->perturb) {
    wrapper = std::make_unique<TrackingPerturb>(base, parse_perturb_spec(options->perturb));
    decoder = wrapper.get();
  }

  DecodeReport decode_report;
  std::vector<uint32_t> tokens = decode_sequence(*decoder, container.payload, h.payload_bits,
                                                 h.token_count, params, &decode_report);

  TokenAlphabet alphabet =
      model->ngram ? model->ngram->alphabet()
                   : (h.alphabet_kind == AlphabetKind::byte_tokens
                          ? TokenAlphabet::bytes()
                          : TokenAlphabet::external(h.alphabet_size));
  if (!model->ngram && h.alphabet_kind == AlphabetKind::word_tokens)
    fail(ErrorCode::model_mismatch, "word-alphabet containers need the n-gram model's dictionary");
  std::string text = alphabet.detokenize(tokens);

  if (report) {
    *report = {};
    report->tokens = tokens.size();
    report->integrity_flags = decode_report.flagged;
    report->worst_ratio = wrapper ? wrapper->worst_ratio() : 0.0;
  }
  return {text.begin(), text.end()};
}

uint8_t* to_c_buffer(std::span<const uint8_t> bytes, size_t* out_size) {
  auto* p = static_cast<uint8_t*>(std::malloc(bytes.size() ? bytes.size() : 1));
  if (!p) fail(ErrorCode::io, "out of memory");
  std::memcpy(p, bytes.data(), bytes.size());
  *out_size = bytes.size();
  return p;
}

}  // namespace

// ---------------------------------------------------------------------------

extern "C" {

const char* mtc_version(void) { return "1.0.0"; }

const char* mtc_last_error(void) { return g_last_error.c_str(); }

void mtc_free(void* p) { std::free(p); }

int mtc_model_train_ngram(const char* corpus_path, const char* alphabet, uint32_t order,
                          double delta, const char* out_path) {
  return guarded([&] {
    require(corpus_path && alphabet && out_path, "NULL argument");
    TokenAlphabet a = parse_alphabet_spec(alphabet);
    std::string corpus = read_file(corpus_path);
    NGramModel model(std::move(a), order, delta);
    std::vector<uint32_t> tokens = model.alphabet().tokenize(corpus);
    model.train(tokens);
    model.finalize();
    model.save(out_path);
  });
}

mtc_model* mtc_model_open_ngram(const char* path) {
  mtc_model* out = nullptr;
  int rc = guarded([&] {
    require(path != nullptr, "path is NULL");
    auto model = std::make_unique<NGramModel>(NGramModel::load(path));
    out = new mtc_model();
    out->hash = model->content_hash();
    out->ngram = std::move(model);
  });
  return rc == MTC_OK ? out : nullptr;
}

mtc_model* mtc_model_open_replay(const char* path) {
  mtc_model* out = nullptr;
  int rc = guarded([&] {
    require(path != nullptr, "path is NULL");
    std::string bytes = read_file(path);
    auto replay = std::make_unique<ReplaySource>(ReplaySource::load(path));
    out = new mtc_model();
    out->hash = fnv1a64({reinterpret_cast<const uint8_t*>(bytes.data()), bytes.size()});
    out->replay = std::move(replay);
  });
  return rc == MTC_OK ? out : nullptr;
}

void mtc_model_close(mtc_model* model) { delete model; }

uint32_t mtc_model_alphabet_size(const mtc_model* model) {
  return model ? predictor_of(model).alphabet_size() : 0;
}

uint64_t mtc_model_content_hash(const mtc_model* model) { return model ? model->hash : 0; }

int mtc_compress_file(const mtc_model* model, const char* input_path, const char* container_path,
                      const mtc_compress_options* options, mtc_compress_report* report) {
  return guarded([&] {
    require(model && input_path && container_path, "NULL argument");
    std::string data = read_file(input_path);
    auto bytes = compress_core(model, {reinterpret_cast<const uint8_t*>(data.data()), data.size()},
                               options, report);
    write_file(container_path, bytes);
  });
}

int mtc_decompress_file(const mtc_model* model, const char* container_path,
                        const char* output_path, const mtc_decompress_options* options,
                        mtc_decompress_report* report) {
  return guarded([&] {
    require(model && container_path && output_path, "NULL argument");
    std::string data = read_file(container_path);
    auto bytes = decompress_core(
        model, {reinterpret_cast<const uint8_t*>(data.data()), data.size()}, options, report);
    write_file(output_path, bytes);
  });
}

int mtc_compress_buffer(const mtc_model* model, const uint8_t* data, size_t size,
                        const mtc_compress_options* options, uint8_t** out, size_t* out_size,
                        mtc_compress_report* report) {
  return guarded([&] {
    require(model && out && out_size && (data || size == 0), "NULL argument");
    auto bytes = compress_core(model, {data, size}, options, report);
    *out = to_c_buffer(bytes, out_size);
  });
}

int mtc_decompress_buffer(const mtc_model* model, const uint8_t* container, size_t size,
                          const mtc_decompress_options* options, uint8_t** out, size_t* out_size,
                          mtc_decompress_report* report) {
  return guarded([&] {
    require(model && out && out_size && container, "NULL argument");
    auto bytes = decompress_core(model, {container, size}, options, report);
    *out = to_c_buffer(bytes, out_size);
  });
}

int mtc_calibrate(const mtc_model* model, const char* corpus_path, const char* buckets,
                  const char* code_out_path, double* kappa_out) {
  return guarded([&] {
    require(model && corpus_path && code_out_path, "NULL argument");
    TokenAlphabet alphabet = alphabet_of(model);
    std::vector<uint32_t> tokens = alphabet.tokenize(read_file(corpus_path));
    if (tokens.empty()) fail(ErrorCode::calibration, "calibration corpus is empty");
    BucketPartition partition = parse_buckets_spec(buckets);

    const Predictor& predictor = predictor_of(model);
    std::vector<uint64_t> counts(partition.bucket_count(), 0);
    std::vector<double> dist;
    for (size_t i = 0; i < tokens.size(); ++i) {
      predictor.next_distribution(i, std::span<const uint32_t>(tokens).subspan(0, i), dist);
      ++counts[partition.bucket_of(dist[tokens[i]])];
    }
    // The unit floor below is part of the empirical distribution the code
    // is calibrated on: every bucket must stay encodable.
    for (auto& c : counts)
      if (c == 0) c = 1;
    BucketCode code = BucketCode::huffman(counts);

    std::ofstream out(code_out_path);
    if (!out) fail(ErrorCode::io, "cannot open code file for writing: " + std::string(code_out_path));
    out << "huffman " << code.bucket_count() << "\n";
    for (uint32_t k = 0; k < code.bucket_count(); ++k)
      out << static_cast<uint32_t>(code.length(k)) << "\n";
    if (!out) fail(ErrorCode::io, "write failed: " + std::string(code_out_path));

    if (kappa_out) {
      uint64_t total = 0;
      for (uint64_t c : counts) total += c;
      double entropy = 0.0;
      for (uint64_t c : counts) {
        double p = static_cast<double>(c) / static_cast<double>(total);
        entropy -= p * std::log2(p);
      }
      *kappa_out = code.expected_length(counts) - entropy;
    }
  });
}

int mtc_fit_power_law(const mtc_model* model, uint64_t window_lo, uint64_t window_hi,
                      mtc_power_law_fit* fit) {
  return guarded([&] {
    require(model && fit, "NULL argument");
    const Predictor& predictor = predictor_of(model);
    RankWindow window = (window_lo == 0 && window_hi == 0)
                            ? default_rank_window(predictor.alphabet_size())
                            : RankWindow{window_lo, window_hi};
    std::vector<double> dist;
    if (model->ngram) {
      predictor.next_distribution(0, {}, dist);
      PowerLawFit f = fit_power_law(dist, window);
      *fit = {f.alpha, f.r2, f.window.lo, f.window.hi};
      return;
    }
    uint64_t n = model->replay->record_count();
    if (n == 0) fail(ErrorCode::domain, "replay has no records to fit");
    double alpha = 0.0, r2 = 0.0;
    for (uint64_t i = 0; i < n; ++i) {
      predictor.next_distribution(i, {}, dist);
      PowerLawFit f = fit_power_law(dist, window);
      alpha += f.alpha;
      r2 += f.r2;
    }
    *fit = {alpha / static_cast<double>(n), r2 / static_cast<double>(n), window.lo, window.hi};
  });
}

int mtc_optimize_gamma(double alpha, double c_star, double* gamma_star, double* gamma,
                       double* objective) {
  return guarded([&] {
    BucketDesign d = optimize_gamma(alpha, c_star);
    if (gamma_star) *gamma_star = d.gamma_star;
    if (gamma) *gamma = d.gamma;
    if (objective) *objective = d.objective_value;
  });
}

int mtc_write_partition(double alpha, double gamma_star, uint32_t count, const char* out_path) {
  return guarded([&] {
    require(out_path != nullptr, "path is NULL");
    if (!(alpha > 1.0)) fail(ErrorCode::domain, "alpha must exceed 1");
    if (!(gamma_star > 1.0)) fail(ErrorCode::domain, "gamma_star must exceed 1");
    double gamma = std::pow(gamma_star, -alpha);
    std::vector<double> bounds(count);
    double v = 1.0;
    bounds[count - 1] = 1.0;
    for (uint32_t i = count - 1; i-- > 0;) {
      v *= gamma;
      bounds[i] = v;
    }
    BucketPartition::explicit_list(bounds);  // reject degenerate layouts up front
    std::ofstream out(out_path);
    if (!out) fail(ErrorCode::io, "cannot open partition file for writing: " + std::string(out_path));
    out << "explicit " << count << "\n";
    char buf[64];
    for (double b : bounds) {
      std::snprintf(buf, sizeof buf, "%a", b);  // hex floats survive the roundtrip exactly
      out << buf << "\n";
    }
    if (!out) fail(ErrorCode::io, "write failed: " + std::string(out_path));
  });
}

int mtc_estimate_length(double alpha, const char* c, double kappa, double* h_t_out,
                        double* estimate_out) {
  return guarded([&] {
    require(c && estimate_out, "NULL argument");
    double h_t = power_law_differential_entropy(alpha);
    *estimate_out = estimate_expected_length(alpha, Rational::parse(c), kappa, h_t);
    if (h_t_out) *h_t_out = h_t;
  });
}

int mtc_eta_monte_carlo(uint32_t u_size, uint32_t trials, uint64_t seed, double* mean_eta,
                        double* excess) {
  return guarded([&] {
    EtaEstimate e = eta_monte_carlo(u_size, trials, seed);
    if (mean_eta) *mean_eta = e.mean_eta;
    if (excess) *excess = e.excess;
  });
}

}  // extern "C"
