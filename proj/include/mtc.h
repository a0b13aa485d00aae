/* mtc — mismatch-tolerant compression.
 *
 * Lossless model-driven compression that stays correct when the encoder's
 * and decoder's next-token probabilities disagree by up to a certified
 * multiplicative factor c. Tokens are coded as a prefix-free bucket
 * codeword naming the probability bucket of the true token, followed by
 * just enough bits of the token's pseudorandom identification string to
 * separate it from every competitor near that bucket, terminated by one
 * flipped bit.
 *
 * All functions return 0 on success or a negative MTC_E_* code; the
 * thread-local message from mtc_last_error() describes the most recent
 * failure on the calling thread. Pointers returned through out-parameters
 * are owned by the caller and released with mtc_free().
 */

#ifndef MTC_H
#define MTC_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#define MTC_OK 0
#define MTC_E_INVALID_ARGUMENT -1
#define MTC_E_INVALID_TOKEN -2
#define MTC_E_INVALID_PROBABILITY -3
#define MTC_E_UNKNOWN_WORD -4
#define MTC_E_TRUNCATED -5       /* bit stream ended inside a token */
#define MTC_E_DECODE_INTEGRITY -6 /* empty candidate set: certificate violated */
#define MTC_E_CALIBRATION -7
#define MTC_E_CERTIFICATION -8   /* could not certify a perturbation at c_sim */
#define MTC_E_REPLAY_UNDERRUN -9
#define MTC_E_DOMAIN -10
#define MTC_E_OPTIMIZER -11
#define MTC_E_IO -12
#define MTC_E_BAD_FORMAT -13
#define MTC_E_MODEL_MISMATCH -14 /* container bound to a different model */
#define MTC_E_INTERNAL -15

const char* mtc_version(void);

/* Message for the most recent failing call on this thread. Never NULL. */
const char* mtc_last_error(void);

/* Releases buffers returned by *_buffer functions. */
void mtc_free(void* p);

/* ------------------------------------------------------------------ */
/* Predictive models                                                    */

typedef struct mtc_model mtc_model;

/* Trains a Laplace-smoothed n-gram model on a corpus file and writes it
 * to out_path. `alphabet` is "byte", "word:<dictionary path>", or
 * "external:<size>"; `order` is the context length in tokens. */
int mtc_model_train_ngram(const char* corpus_path, const char* alphabet, uint32_t order,
                          double delta, const char* out_path);

mtc_model* mtc_model_open_ngram(const char* path);

/* Opens a stored stream of per-position distributions (an inference log).
 * Replays ignore context; record i is the distribution at position i. */
mtc_model* mtc_model_open_replay(const char* path);

void mtc_model_close(mtc_model* model);

uint32_t mtc_model_alphabet_size(const mtc_model* model);
uint64_t mtc_model_content_hash(const mtc_model* model);

/* ------------------------------------------------------------------ */
/* Compression                                                          */

typedef struct {
  /* "geometric:<gamma>:<count>" with gamma a rational in (0,1), or
   * "file:<path>" for a stored partition. NULL = geometric:1/8:33. */
  const char* buckets;
  /* "unary" or "huffman:<path>" (a code file written by calibration).
   * NULL = unary. */
  const char* code;
  /* Certified mismatch factor c >= 1 as a rational ("2", "10/3", "1.25").
   * NULL = "1" (no mismatch tolerated). */
  const char* c;
  /* Master seed for the per-token identification strings. */
  uint64_t seed;
  /* When non-NULL, also dump the bare payload bits (no header) here. */
  const char* raw_bits_path;
} mtc_compress_options;

typedef struct {
  uint64_t tokens;
  uint64_t payload_bits;
  uint64_t container_bytes;
  double mean_bits_per_token;
  double bucket_entropy;    /* H over the bucket choice, bits */
  double mean_bucket_bits;  /* mean bucket-codeword length, bits */
  double ratio;             /* raw input bits / payload bits */
} mtc_compress_report;

typedef struct {
  /* "<c_sim>:<certified|stress>:<seed>" simulates decoder-side mismatch by
   * perturbing every distribution before it reaches the decoder. Certified
   * mode provably respects the bound c_sim; stress mode may exceed it.
   * NULL decodes with the model's own distributions. */
  const char* perturb;
} mtc_decompress_options;

typedef struct {
  uint64_t tokens;
  uint64_t integrity_flags; /* decode anomalies that did not abort */
  double worst_ratio;       /* measured mismatch when perturbing, else 0 */
} mtc_decompress_report;

/* options and report may be NULL (defaults / no report). */
int mtc_compress_file(const mtc_model* model, const char* input_path, const char* container_path,
                      const mtc_compress_options* options, mtc_compress_report* report);
int mtc_decompress_file(const mtc_model* model, const char* container_path,
                        const char* output_path, const mtc_decompress_options* options,
                        mtc_decompress_report* report);

int mtc_compress_buffer(const mtc_model* model, const uint8_t* data, size_t size,
                        const mtc_compress_options* options, uint8_t** out, size_t* out_size,
                        mtc_compress_report* report);
int mtc_decompress_buffer(const mtc_model* model, const uint8_t* container, size_t size,
                          const mtc_decompress_options* options, uint8_t** out, size_t* out_size,
                          mtc_decompress_report* report);

/* ------------------------------------------------------------------ */
/* Calibration and analysis                                             */

/* Runs the model over a corpus, counts bucket occupancy, fits a canonical
 * Huffman code over the buckets, and writes it as a code file for
 * mtc_compress_*. kappa_out (optional) receives the code's expected length
 * minus the bucket entropy on this corpus, in bits — always in [0, 1). */
int mtc_calibrate(const mtc_model* model, const char* corpus_path, const char* buckets,
                  const char* code_out_path, double* kappa_out);

typedef struct {
  double alpha; /* power-law exponent: p(rank t) proportional to t^-alpha */
  double r2;
  uint64_t window_lo;
  uint64_t window_hi;
} mtc_power_law_fit;

/* Fits log p against log rank. Rank window [lo, hi] is 1-based inclusive;
 * lo = hi = 0 selects the default body window [6, alphabet/10]. N-gram
 * models are fitted on their unconditioned (empty-context) distribution;
 * replays are fitted per record and averaged. */
int mtc_fit_power_law(const mtc_model* model, uint64_t window_lo, uint64_t window_hi,
                      mtc_power_law_fit* fit);

/* Minimizes the per-token excess-bits objective over the rank-space bucket
 * ratio. Outputs may be NULL when not needed. */
int mtc_optimize_gamma(double alpha, double c_star, double* gamma_star, double* gamma,
                       double* objective);

/* Writes a bucket partition file (usable as "file:<path>") with `count`
 * geometric buckets of probability ratio gamma_star^-alpha. */
int mtc_write_partition(double alpha, double gamma_star, uint32_t count, const char* out_path);

/* Closed-form per-token length estimate at mismatch factor c (rational
 * string). h_t_out (optional) receives the rank differential entropy used. */
int mtc_estimate_length(double alpha, const char* c, double kappa, double* h_t_out,
                        double* estimate_out);

/* Monte Carlo for the shared-prefix excess: draws u_size random strings per
 * trial and measures the deepest prefix shared with an independent target. */
int mtc_eta_monte_carlo(uint32_t u_size, uint32_t trials, uint64_t seed, double* mean_eta,
                        double* excess);

#ifdef __cplusplus
}
#endif

#endif /* MTC_H */
