// Command-line front end over the shared library's C API. Exit codes:
// 0 = success, 2 = success with integrity flags, >2 = error.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "mtc.h"

namespace {

constexpr int kExitFlagged = 2;
constexpr int kExitUsage = 3;
constexpr int kExitError = 4;

[[noreturn]] void die(const std::string& msg, int code = kExitError) {
  std::cerr << "mtc: " << msg << "\n";
  std::exit(code);
}

void check(int rc, const std::string& what) {
  if (rc != MTC_OK) die(what + ": " + mtc_last_error());
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) die("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Small exact-rational helper for the q = 1/c flags: q values like 0.3 are
// decimals, and their inverses (10/3) must stay exact strings end to end.
struct Frac {
  uint64_t num = 1, den = 1;

  static Frac parse(const std::string& s) {
    Frac f;
    auto slash = s.find('/');
    auto dot = s.find('.');
    try {
      if (slash != std::string::npos) {
        f.num = std::stoull(s.substr(0, slash));
        f.den = std::stoull(s.substr(slash + 1));
      } else if (dot != std::string::npos) {
        std::string digits = s.substr(0, dot) + s.substr(dot + 1);
        f.num = std::stoull(digits);
        f.den = 1;
        for (size_t i = dot + 1; i < s.size(); ++i) f.den *= 10;
      } else {
        f.num = std::stoull(s);
        f.den = 1;
      }
    } catch (const std::exception&) {
      die("bad rational '" + s + "'", kExitUsage);
    }
    if (f.den == 0 || f.num == 0) die("rational '" + s + "' must be positive", kExitUsage);
    uint64_t g = std::gcd(f.num, f.den);
    f.num /= g;
    f.den /= g;
    return f;
  }

  Frac inverse() const { return {den, num}; }
  Frac times(const Frac& o) const {
    Frac r{num * o.num, den * o.den};
    uint64_t g = std::gcd(r.num, r.den);
    r.num /= g;
    r.den /= g;
    return r;
  }
  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
  std::string str() const {
    return den == 1 ? std::to_string(num) : std::to_string(num) + "/" + std::to_string(den);
  }
};

struct ModelHandle {
  mtc_model* ptr = nullptr;
  ~ModelHandle() { mtc_model_close(ptr); }
};

void open_model(const std::string& spec, ModelHandle& out) {
  if (spec.rfind("ngram:", 0) == 0) {
    out.ptr = mtc_model_open_ngram(spec.substr(6).c_str());
  } else if (spec.rfind("replay:", 0) == 0) {
    out.ptr = mtc_model_open_replay(spec.substr(7).c_str());
  } else {
    die("model spec must be ngram:<path> or replay:<path>", kExitUsage);
  }
  if (!out.ptr) die(std::string("cannot open model: ") + mtc_last_error());
}

// Shared flags for commands that build codec parameters.
struct ParamFlags {
  std::string buckets;
  std::string code;
  std::string c;
  std::string q;
  uint64_t seed = 0;

  void attach(CLI::App* cmd, bool with_c) {
    cmd->add_option("--buckets", buckets,
                    "bucket partition: geometric:<gamma>:<count> or file:<path>");
    cmd->add_option("--code", code, "bucket code: unary or huffman:<path>");
    if (with_c) {
      auto* oc = cmd->add_option("--c", c, "certified mismatch factor (rational, >= 1)");
      auto* oq = cmd->add_option("--q", q, "mismatch as q = 1/c (rational in (0,1])");
      oc->excludes(oq);
    }
    cmd->add_option("--seed", seed, "master seed for token identification strings");
  }

  std::string c_value() const {
    if (!q.empty()) return Frac::parse(q).inverse().str();
    return c.empty() ? "1" : Frac::parse(c).str();
  }

  mtc_compress_options options(std::string& c_storage) const {
    mtc_compress_options o{};
    o.buckets = buckets.empty() ? nullptr : buckets.c_str();
    o.code = code.empty() ? nullptr : code.c_str();
    c_storage = c_value();
    o.c = c_storage.c_str();
    o.seed = seed;
    return o;
  }
};

int cmd_train(const std::string& input, const std::string& alphabet, uint32_t order, double delta,
              const std::string& out) {
  check(mtc_model_train_ngram(input.c_str(), alphabet.c_str(), order, delta, out.c_str()),
        "train failed");
  ModelHandle model;
  open_model("ngram:" + out, model);
  std::cout << "model=" << out << "\nalphabet_size=" << mtc_model_alphabet_size(model.ptr)
            << "\ncontent_hash=" << std::hex << mtc_model_content_hash(model.ptr) << std::dec
            << "\n";
  return 0;
}

int cmd_compress(const std::string& input, const std::string& output, const std::string& model_spec,
                 const ParamFlags& flags, const std::string& raw_bits, bool stats) {
  ModelHandle model;
  open_model(model_spec, model);
  std::string c_storage;
  mtc_compress_options options = flags.options(c_storage);
  if (!raw_bits.empty()) options.raw_bits_path = raw_bits.c_str();
  mtc_compress_report report{};
  check(mtc_compress_file(model.ptr, input.c_str(), output.c_str(), &options, &report),
        "compress failed");
  if (stats) {
    std::cout << "tokens=" << report.tokens << "\npayload_bits=" << report.payload_bits
              << "\ncontainer_bytes=" << report.container_bytes
              << "\nmean_bits_per_token=" << report.mean_bits_per_token
              << "\nbucket_entropy=" << report.bucket_entropy
              << "\nmean_bucket_bits=" << report.mean_bucket_bits << "\nratio=" << report.ratio
              << "\n";
  }
  return 0;
}

int cmd_decompress(const std::string& input, const std::string& output,
                   const std::string& model_spec, const std::string& perturb) {
  ModelHandle model;
  open_model(model_spec, model);
  mtc_decompress_options options{};
  if (!perturb.empty()) options.perturb = perturb.c_str();
  mtc_decompress_report report{};
  check(mtc_decompress_file(model.ptr, input.c_str(), output.c_str(), &options, &report),
        "decompress failed");
  std::cout << "tokens=" << report.tokens << "\nintegrity_flags=" << report.integrity_flags << "\n";
  if (!perturb.empty()) std::cout << "worst_ratio=" << report.worst_ratio << "\n";
  return report.integrity_flags ? kExitFlagged : 0;
}

int cmd_calibrate(const std::string& input, const std::string& model_spec,
                  const std::string& buckets, const std::string& out) {
  ModelHandle model;
  open_model(model_spec, model);
  double kappa = 0.0;
  check(mtc_calibrate(model.ptr, input.c_str(), buckets.empty() ? nullptr : buckets.c_str(),
                      out.c_str(), &kappa),
        "calibrate failed");
  std::cout << "code=" << out << "\nkappa=" << kappa << "\n";
  return 0;
}

int cmd_analyze(const std::string& model_spec, const std::string& window, const std::string& c,
                double kappa, uint32_t eta_u, uint32_t eta_trials, uint64_t seed,
                const std::string& json_path) {
  ModelHandle model;
  open_model(model_spec, model);
  uint64_t lo = 0, hi = 0;
  if (!window.empty()) {
    auto colon = window.find(':');
    if (colon == std::string::npos) die("--window is <lo>:<hi>", kExitUsage);
    lo = std::stoull(window.substr(0, colon));
    hi = std::stoull(window.substr(colon + 1));
  }
  mtc_power_law_fit fit{};
  check(mtc_fit_power_law(model.ptr, lo, hi, &fit), "power-law fit failed");
  nlohmann::json j{{"alpha", fit.alpha},
                   {"r2", fit.r2},
                   {"window", {fit.window_lo, fit.window_hi}}};
  std::cout << "alpha=" << fit.alpha << "\nr2=" << fit.r2 << "\nwindow=" << fit.window_lo << ":"
            << fit.window_hi << "\n";
  if (!c.empty()) {
    double h_t = 0.0, estimate = 0.0;
    check(mtc_estimate_length(fit.alpha, Frac::parse(c).str().c_str(), kappa, &h_t, &estimate),
          "length estimate failed");
    std::cout << "h_T=" << h_t << "\nestimated_bits_per_token=" << estimate << "\n";
    j["h_T"] = h_t;
    j["estimated_bits_per_token"] = estimate;
  }
  if (eta_u > 0) {
    double mean = 0.0, excess = 0.0;
    check(mtc_eta_monte_carlo(eta_u, eta_trials, seed, &mean, &excess), "eta estimate failed");
    std::cout << "eta_mean=" << mean << "\neta_excess=" << excess << "\n";
    j["eta_mean"] = mean;
    j["eta_excess"] = excess;
  }
  if (!json_path.empty()) {
    std::ofstream out(json_path);
    out << j.dump(2) << "\n";
    if (!out) die("cannot write " + json_path);
  }
  return 0;
}

int cmd_optimize(double alpha, const std::string& c, double c_star_flag, uint32_t count,
                 const std::string& out) {
  double c_star = c_star_flag;
  if (!c.empty()) c_star = std::pow(Frac::parse(c).value(), 1.0 / alpha);
  if (c_star <= 0.0) die("give --c or --c-star", kExitUsage);
  double gamma_star = 0.0, gamma = 0.0, objective = 0.0;
  check(mtc_optimize_gamma(alpha, c_star, &gamma_star, &gamma, &objective), "optimizer failed");
  std::cout << "c_star=" << c_star << "\ngamma_star=" << gamma_star << "\ngamma=" << gamma
            << "\nzeta=" << objective << "\n";
  if (!out.empty()) {
    check(mtc_write_partition(alpha, gamma_star, count, out.c_str()), "partition write failed");
    std::cout << "partition=" << out << "\n";
  }
  return 0;
}

int cmd_simulate(const std::string& corpus_dir, const std::string& model_spec,
                 const std::string& q_list, uint32_t trials, uint64_t seed,
                 const std::string& stress_mult, const ParamFlags& flags,
                 const std::string& json_path) {
  ModelHandle model;
  open_model(model_spec, model);

  std::vector<std::string> files;
  for (const auto& entry : std::filesystem::directory_iterator(corpus_dir))
    if (entry.is_regular_file()) files.push_back(entry.path().string());
  std::sort(files.begin(), files.end());
  if (files.empty()) die("no files in corpus directory " + corpus_dir);

  std::vector<std::string> qs;
  std::stringstream ss(q_list);
  for (std::string item; std::getline(ss, item, ',');) qs.push_back(item);
  if (qs.empty()) die("--q list is empty", kExitUsage);

  nlohmann::json rows = nlohmann::json::array();
  std::cout << "q\tc\tratio_mean\tratio_std\taccuracy\n";
  for (size_t qi = 0; qi < qs.size(); ++qi) {
    Frac q = Frac::parse(qs[qi]);
    Frac c = q.inverse();
    Frac c_sim = c;
    const char* mode = "certified";
    if (!stress_mult.empty()) {
      c_sim = c.times(Frac::parse(stress_mult));
      mode = "stress";
    }

    std::vector<double> ratios;
    uint64_t ok = 0, total = 0;
    for (size_t fi = 0; fi < files.size(); ++fi) {
      std::string data = read_file(files[fi]);
      for (uint32_t t = 0; t < trials; ++t, ++total) {
        std::string c_storage;
        mtc_compress_options copts = flags.options(c_storage);
        copts.c = nullptr;
        std::string c_str = c.str();
        copts.c = c_str.c_str();

        uint8_t* container = nullptr;
        size_t container_size = 0;
        mtc_compress_report creport{};
        int rc = mtc_compress_buffer(model.ptr, reinterpret_cast<const uint8_t*>(data.data()),
                                     data.size(), &copts, &container, &container_size, &creport);
        if (rc != MTC_OK) die(std::string("compress failed: ") + mtc_last_error());
        ratios.push_back(creport.ratio);

        uint64_t trial_seed = seed + 1000003ull * qi + 101ull * fi + t;
        std::string perturb = c_sim.str() + ":" + mode + ":" + std::to_string(trial_seed);
        mtc_decompress_options dopts{};
        dopts.perturb = perturb.c_str();
        uint8_t* out = nullptr;
        size_t out_size = 0;
        rc = mtc_decompress_buffer(model.ptr, container, container_size, &dopts, &out, &out_size,
                                   nullptr);
        if (rc == MTC_OK && out_size == data.size() &&
            std::equal(out, out + out_size, reinterpret_cast<const uint8_t*>(data.data())))
          ++ok;
        mtc_free(out);
        mtc_free(container);
      }
    }
    double mean = std::accumulate(ratios.begin(), ratios.end(), 0.0) / ratios.size();
    double var = 0.0;
    for (double r : ratios) var += (r - mean) * (r - mean);
    double std_dev = ratios.size() > 1 ? std::sqrt(var / (ratios.size() - 1)) : 0.0;
    double accuracy = static_cast<double>(ok) / static_cast<double>(total);
    std::cout << q.str() << "\t" << c.str() << "\t" << mean << "\t" << std_dev << "\t" << accuracy
              << "\n";
    rows.push_back({{"q", q.str()},
                    {"c", c.str()},
                    {"ratio_mean", mean},
                    {"ratio_std", std_dev},
                    {"accuracy", accuracy}});
  }
  if (!json_path.empty()) {
    std::ofstream out(json_path);
    out << rows.dump(2) << "\n";
    if (!out) die("cannot write " + json_path);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"mismatch-tolerant model-driven compression"};
  app.require_subcommand(1);

  // train
  auto* train = app.add_subcommand("train", "train an n-gram model on a corpus");
  std::string tr_input, tr_alphabet = "byte", tr_out;
  uint32_t tr_order = 3;
  double tr_delta = 1.0;
  train->add_option("--input", tr_input, "corpus file")->required();
  train->add_option("--alphabet", tr_alphabet, "byte | word:<dict path> | external:<size>");
  train->add_option("--order", tr_order, "context length in tokens");
  train->add_option("--delta", tr_delta, "Laplace smoothing constant");
  train->add_option("--out", tr_out, "model file to write")->required();

  // compress
  auto* compress = app.add_subcommand("compress", "compress a file into a container");
  std::string co_input, co_output, co_model, co_raw;
  bool co_stats = false;
  ParamFlags co_flags;
  compress->add_option("--input", co_input, "file to compress")->required();
  compress->add_option("--output", co_output, "container to write")->required();
  compress->add_option("--model", co_model, "ngram:<path> | replay:<path>")->required();
  co_flags.attach(compress, true);
  compress->add_option("--raw-bits", co_raw, "also dump the bare payload bytes here");
  compress->add_flag("--stats", co_stats, "print per-run statistics");

  // decompress
  auto* decompress = app.add_subcommand("decompress", "reconstruct a container");
  std::string de_input, de_output, de_model, de_perturb;
  decompress->add_option("--input", de_input, "container file")->required();
  decompress->add_option("--output", de_output, "reconstructed file to write")->required();
  decompress->add_option("--model", de_model, "ngram:<path> | replay:<path>")->required();
  decompress->add_option("--perturb", de_perturb,
                         "simulate decoder mismatch: <c_sim>:<certified|stress>:<seed>");

  // calibrate
  auto* calibrate = app.add_subcommand("calibrate", "fit a Huffman bucket code to a corpus");
  std::string ca_input, ca_model, ca_buckets, ca_out;
  calibrate->add_option("--input", ca_input, "calibration corpus")->required();
  calibrate->add_option("--model", ca_model, "ngram:<path> | replay:<path>")->required();
  calibrate->add_option("--buckets", ca_buckets, "bucket partition spec");
  calibrate->add_option("--out", ca_out, "code file to write")->required();

  // analyze
  auto* analyze = app.add_subcommand("analyze", "fit the power-law body and estimate code length");
  std::string an_model, an_window, an_c, an_json;
  double an_kappa = 0.0;
  uint32_t an_eta_u = 0, an_eta_trials = 100000;
  uint64_t an_seed = 0;
  analyze->add_option("--model", an_model, "ngram:<path> | replay:<path>")->required();
  analyze->add_option("--window", an_window, "fit ranks <lo>:<hi> (default: body region)");
  analyze->add_option("--c", an_c, "mismatch factor for the length estimate (rational)");
  analyze->add_option("--kappa", an_kappa, "bucket-code gap for the length estimate, bits");
  analyze->add_option("--eta", an_eta_u, "also run the shared-prefix Monte Carlo at this set size");
  analyze->add_option("--trials", an_eta_trials, "Monte Carlo trials");
  analyze->add_option("--seed", an_seed, "Monte Carlo seed");
  analyze->add_option("--json", an_json, "write the report as JSON here");

  // optimize-buckets
  auto* optimize = app.add_subcommand("optimize-buckets", "choose the bucket ratio for a fit");
  double op_alpha = 0.0, op_c_star = 0.0;
  std::string op_c, op_out;
  uint32_t op_count = 33;
  optimize->add_option("--alpha", op_alpha, "fitted power-law exponent")->required();
  optimize->add_option("--c", op_c, "mismatch factor (rational); c* is derived as c^(1/alpha)");
  optimize->add_option("--c-star", op_c_star, "rank-space mismatch factor directly");
  optimize->add_option("--count", op_count, "bucket count for the emitted partition");
  optimize->add_option("--out", op_out, "write the optimized partition file here");

  // simulate
  auto* simulate = app.add_subcommand("simulate", "sweep mismatch levels over a corpus");
  std::string si_corpus, si_model, si_stress, si_json;
  std::string si_q = "0.02,0.05,0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9,1";
  uint32_t si_trials = 1;
  ParamFlags si_flags;
  simulate->add_option("--corpus", si_corpus, "directory of test files")->required();
  simulate->add_option("--model", si_model, "ngram:<path> | replay:<path>")->required();
  simulate->add_option("--q", si_q, "comma-separated q = 1/c values");
  simulate->add_option("--trials", si_trials, "perturbation trials per file");
  simulate->add_option("--stress", si_stress,
                       "stress mode: perturb at c_sim = <mult> * c instead of certified c");
  // --seed from the shared flags doubles as the perturbation base seed.
  si_flags.attach(simulate, false);
  simulate->add_option("--json", si_json, "write the table as JSON here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : kExitUsage;
  }

  try {
    if (train->parsed()) return cmd_train(tr_input, tr_alphabet, tr_order, tr_delta, tr_out);
    if (compress->parsed())
      return cmd_compress(co_input, co_output, co_model, co_flags, co_raw, co_stats);
    if (decompress->parsed()) return cmd_decompress(de_input, de_output, de_model, de_perturb);
    if (calibrate->parsed()) return cmd_calibrate(ca_input, ca_model, ca_buckets, ca_out);
    if (analyze->parsed())
      return cmd_analyze(an_model, an_window, an_c, an_kappa, an_eta_u, an_eta_trials, an_seed,
                         an_json);
    if (optimize->parsed()) return cmd_optimize(op_alpha, op_c, op_c_star, op_count, op_out);
    if (simulate->parsed())
      return cmd_simulate(si_corpus, si_model, si_q, si_trials, si_flags.seed, si_stress, si_flags,
                          si_json);
  } catch (const std::exception& e) {
    die(e.what());
  }
  return kExitUsage;
}
