#include "core/buckets.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <queue>

#include "core/errors.hpp"

namespace mtc {

namespace {

constexpr uint32_t kMaxBuckets = 64;  // keeps codeword lengths in one byte and Kraft sums exact

double step_down(double x, int n) {
  while (n--) x = std::nextafter(x, -std::numeric_limits<double>::infinity());
  return x;
}

double step_up(double x, int n) {
  while (n--) x = std::nextafter(x, std::numeric_limits<double>::infinity());
  return x;
}

void check_mismatch_factor(const Rational& c) {
  if (c.num < c.den) fail(ErrorCode::invalid_argument, "mismatch factor must be at least 1");
}

}  // namespace

BucketPartition::BucketPartition(std::vector<double> ascending, PartitionSpec spec)
    : ascending_(std::move(ascending)), spec_(std::move(spec)) {}

BucketPartition BucketPartition::geometric(const Rational& gamma, uint32_t count) {
  if (gamma.num >= gamma.den)
    fail(ErrorCode::invalid_argument, "geometric ratio must be in (0,1)");
  if (count < 1 || count > kMaxBuckets)
    fail(ErrorCode::invalid_argument, "bucket count must be in [1," + std::to_string(kMaxBuckets) + "]");
  double g = gamma.value();
  std::vector<double> powers(count - 1);  // gamma^1 .. gamma^(count-1)
  double v = 1.0;
  for (uint32_t j = 0; j + 1 < count; ++j) {
    v *= g;
    powers[j] = v;
  }
  std::vector<double> asc(count + 1);
  asc[0] = 0.0;
  for (uint32_t i = 1; i < count; ++i) asc[i] = powers[count - 1 - i];
  asc[count] = 1.0;
  for (uint32_t i = 0; i < count; ++i)
    if (!(asc[i] < asc[i + 1]))
      fail(ErrorCode::invalid_argument, "geometric boundaries collapse (ratio too small for count)");
  PartitionSpec spec;
  spec.kind = PartitionSpec::Kind::geometric;
  spec.gamma = gamma;
  spec.count = count;
  return BucketPartition(std::move(asc), std::move(spec));
}

BucketPartition BucketPartition::explicit_list(std::vector<double> upper_bounds) {
  if (upper_bounds.empty() || upper_bounds.size() > kMaxBuckets)
    fail(ErrorCode::invalid_argument, "explicit partition needs 1.." + std::to_string(kMaxBuckets) + " buckets");
  if (upper_bounds.back() != 1.0)
    fail(ErrorCode::invalid_argument, "last bucket boundary must be exactly 1");
  std::vector<double> asc(upper_bounds.size() + 1);
  asc[0] = 0.0;
  for (size_t i = 0; i < upper_bounds.size(); ++i) {
    double b = upper_bounds[i];
    if (!(b > 0.0) || !(b <= 1.0) || std::isnan(b))
      fail(ErrorCode::invalid_argument, "bucket boundaries must lie in (0,1]");
    asc[i + 1] = b;
  }
  for (size_t i = 0; i + 1 < asc.size(); ++i)
    if (!(asc[i] < asc[i + 1]))
      fail(ErrorCode::invalid_argument, "bucket boundaries must be strictly increasing");
  PartitionSpec spec;
  spec.kind = PartitionSpec::Kind::explicit_list;
  spec.boundaries = std::move(upper_bounds);
  return BucketPartition(std::move(asc), std::move(spec));
}

BucketPartition BucketPartition::from_spec(const PartitionSpec& spec) {
  if (spec.kind == PartitionSpec::Kind::geometric) return geometric(spec.gamma, spec.count);
  return explicit_list(spec.boundaries);
}

uint32_t BucketPartition::bucket_of(double p) const {
  if (std::isnan(p) || p < 0.0 || p > 1.0)
    fail(ErrorCode::invalid_probability, "probability outside [0,1]");
  // First boundary >= p, searching the ascending list; upper-closed buckets.
  auto it = std::lower_bound(ascending_.begin() + 1, ascending_.end(), p);
  uint32_t i = static_cast<uint32_t>(it - ascending_.begin());
  return bucket_count() - i;
}

double BucketPartition::lower(uint32_t k) const {
  if (k >= bucket_count()) fail(ErrorCode::invalid_argument, "bucket index out of range");
  return ascending_[bucket_count() - 1 - k];
}

double BucketPartition::upper(uint32_t k) const {
  if (k >= bucket_count()) fail(ErrorCode::invalid_argument, "bucket index out of range");
  return ascending_[bucket_count() - k];
}

Interval BucketPartition::encoder_expansion(uint32_t k, const Rational& c) const {
  check_mismatch_factor(c);
  double c2 = c.squared();
  // Two guard steps versus the decoder's one: the decoder interval must
  // stay inside this one even after both round outward.
  double lo = step_down(lower(k) / c2, 2);
  double hi = step_up(upper(k) * c2, 2);
  return {lo, hi, false};
}

Interval BucketPartition::decoder_expansion(uint32_t k, const Rational& c) const {
  check_mismatch_factor(c);
  double cv = c.value();
  double lo = step_down(lower(k) / cv, 1);
  double hi = step_up(upper(k) * cv, 1);
  return {lo, hi, true};
}

BucketCode::BucketCode(CodeKind kind, std::vector<uint8_t> lengths)
    : kind_(kind), lengths_(std::move(lengths)) {
  build_tables();
}

BucketCode BucketCode::unary(uint32_t bucket_count) {
  if (bucket_count < 1 || bucket_count > kMaxBuckets)
    fail(ErrorCode::invalid_argument, "bucket count out of range for unary code");
  std::vector<uint8_t> lengths(bucket_count);
  if (bucket_count == 1) {
    lengths[0] = 0;  // single bucket: the empty codeword
  } else {
    for (uint32_t k = 0; k + 1 < bucket_count; ++k) lengths[k] = static_cast<uint8_t>(k + 1);
    // Truncated final codeword (all ones, no terminating zero) makes the
    // code complete: every bit stream matches exactly one codeword.
    lengths[bucket_count - 1] = static_cast<uint8_t>(bucket_count - 1);
  }
  return BucketCode(CodeKind::unary, std::move(lengths));
}

BucketCode BucketCode::huffman(std::vector<uint64_t> counts) {
  uint32_t n = static_cast<uint32_t>(counts.size());
  if (n < 1 || n > kMaxBuckets)
    fail(ErrorCode::invalid_argument, "bucket count out of range for huffman code");
  if (std::all_of(counts.begin(), counts.end(), [](uint64_t c) { return c == 0; }))
    fail(ErrorCode::calibration, "cannot calibrate a code from all-zero counts");
  for (auto& c : counts)
    if (c == 0) c = 1;  // floor so every bucket stays encodable
  if (n == 1) return BucketCode(CodeKind::huffman, {0});

  // Standard Huffman with a deterministic tie rule: equal weights resolve
  // by node creation order (leaves first, in bucket order). Only the
  // lengths survive; codewords come from the canonical rebuild.
  struct Node {
    uint64_t weight;
    uint32_t seq;
    int left, right;  // -1 for leaves
  };
  std::vector<Node> nodes;
  nodes.reserve(2 * n);
  auto cmp = [&](uint32_t a, uint32_t b) {
    if (nodes[a].weight != nodes[b].weight) return nodes[a].weight > nodes[b].weight;
    return nodes[a].seq > nodes[b].seq;
  };
  std::priority_queue<uint32_t, std::vector<uint32_t>, decltype(cmp)> pq(cmp);
  for (uint32_t k = 0; k < n; ++k) {
    nodes.push_back({counts[k], k, -1, -1});
    pq.push(k);
  }
  while (pq.size() > 1) {
    uint32_t a = pq.top(); pq.pop();
    uint32_t b = pq.top(); pq.pop();
    nodes.push_back({nodes[a].weight + nodes[b].weight, static_cast<uint32_t>(nodes.size()),
                     static_cast<int>(a), static_cast<int>(b)});
    pq.push(static_cast<uint32_t>(nodes.size() - 1));
  }
  std::vector<uint8_t> lengths(n, 0);
  // Depth-first depth assignment from the root.
  std::vector<std::pair<uint32_t, uint8_t>> stack{{pq.top(), 0}};
  while (!stack.empty()) {
    auto [idx, depth] = stack.back();
    stack.pop_back();
    const Node& nd = nodes[idx];
    if (nd.left < 0) {
      lengths[nd.seq] = depth;
    } else {
      stack.push_back({static_cast<uint32_t>(nd.left), static_cast<uint8_t>(depth + 1)});
      stack.push_back({static_cast<uint32_t>(nd.right), static_cast<uint8_t>(depth + 1)});
    }
  }
  return BucketCode(CodeKind::huffman, std::move(lengths));
}

BucketCode BucketCode::from_lengths(CodeKind kind, const std::vector<uint8_t>& lengths) {
  return BucketCode(kind, lengths);
}

void BucketCode::build_tables() {
  uint32_t n = bucket_count();
  if (n < 1 || n > kMaxBuckets) fail(ErrorCode::bad_format, "bucket code size out of range");
  if (n == 1) {
    if (lengths_[0] != 0) fail(ErrorCode::bad_format, "single-bucket code must use the empty codeword");
    codewords_ = {0};
    symbols_ordered_ = {0};
    max_len_ = 0;
    return;
  }
  unsigned __int128 kraft = 0;
  for (uint8_t l : lengths_) {
    if (l < 1 || l > 63) fail(ErrorCode::bad_format, "codeword length out of range");
    kraft += static_cast<unsigned __int128>(1) << (64 - l);
  }
  if (kraft != static_cast<unsigned __int128>(1) << 64)
    fail(ErrorCode::bad_format, "codeword lengths do not form a complete prefix code");

  symbols_ordered_.resize(n);
  for (uint32_t k = 0; k < n; ++k) symbols_ordered_[k] = k;
  std::stable_sort(symbols_ordered_.begin(), symbols_ordered_.end(),
                   [&](uint32_t a, uint32_t b) { return lengths_[a] < lengths_[b]; });

  max_len_ = *std::max_element(lengths_.begin(), lengths_.end());
  codewords_.assign(n, 0);
  first_code_.assign(max_len_ + 1, 0);
  count_at_len_.assign(max_len_ + 1, 0);
  offset_at_len_.assign(max_len_ + 1, 0);

  uint64_t code = 0;
  uint32_t cur_len = lengths_[symbols_ordered_[0]];
  for (uint32_t i = 0; i < n; ++i) {
    uint32_t sym = symbols_ordered_[i];
    uint32_t l = lengths_[sym];
    code <<= (l - cur_len);
    cur_len = l;
    if (count_at_len_[l] == 0) {
      first_code_[l] = code;
      offset_at_len_[l] = i;
    }
    ++count_at_len_[l];
    codewords_[sym] = code;
    ++code;
  }
}

void BucketCode::emit(uint32_t k, BitWriter& out) const {
  uint32_t l = length(k);
  uint64_t cw = codewords_.at(k);
  for (uint32_t i = l; i-- > 0;) out.push((cw >> i) & 1);
}

std::pair<uint32_t, uint32_t> BucketCode::read(BitCursor& in) const {
  if (max_len_ == 0) return {0, 0};
  uint64_t code = 0;
  for (uint32_t l = 1; l <= max_len_; ++l) {
    code = (code << 1) | static_cast<uint64_t>(in.read());
    if (count_at_len_[l] && code >= first_code_[l] && code - first_code_[l] < count_at_len_[l]) {
      uint32_t sym = symbols_ordered_[offset_at_len_[l] + static_cast<uint32_t>(code - first_code_[l])];
      return {sym, l};
    }
  }
  fail(ErrorCode::bad_format, "bit stream does not match any codeword");
}

double BucketCode::expected_length(const std::vector<uint64_t>& counts) const {
  if (counts.size() != lengths_.size())
    fail(ErrorCode::invalid_argument, "count vector size does not match bucket count");
  uint64_t total = std::accumulate(counts.begin(), counts.end(), uint64_t{0});
  if (total == 0) fail(ErrorCode::calibration, "cannot average over all-zero counts");
  double acc = 0.0;
  for (size_t k = 0; k < counts.size(); ++k)
    acc += static_cast<double>(counts[k]) * static_cast<double>(lengths_[k]);
  return acc / static_cast<double>(total);
}

}  // namespace mtc
