#ifndef BIGJUMP_RNG_HPP
#define BIGJUMP_RNG_HPP

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace bigjump {

inline std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// Counter-based generator: the k-th output is a pure function of
// (seed, stream, k), so independent streams can be handed to workers
// and results merged in any order without changing the draw sequence.
class rng {
public:
  explicit rng(std::uint64_t seed, std::uint64_t stream = 0)
      : key_(mix64(seed + 0x9E3779B97F4A7C15ULL * (stream + 1)) ^ mix64(~stream)),
        ctr_(0) {}

  std::uint64_t next_u64() {
    return mix64(key_ + 0x9E3779B97F4A7C15ULL * ++ctr_);
  }

  // uniform in [0, 1), 53 random bits
  double next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // uniform in (0, 1], safe as log() argument
  double next_unit_pos() { return 1.0 - next_unit(); }

  double next_exponential() { return -std::log(next_unit_pos()); }

  // unbiased integer in [0, n)
  std::uint64_t next_below(std::uint64_t n) {
    if (n == 0) throw std::invalid_argument("next_below: n == 0");
    std::uint64_t lim = n * ((~0ULL) / n);
    std::uint64_t v;
    do {
      v = next_u64();
    } while (v >= lim);
    return v % n;
  }

  double next_normal() {
    // Marsaglia polar; rejection keeps all decisions inside this stream
    for (;;) {
      double u = 2.0 * next_unit() - 1.0;
      double v = 2.0 * next_unit() - 1.0;
      double s = u * u + v * v;
      if (s > 0.0 && s < 1.0) return u * std::sqrt(-2.0 * std::log(s) / s);
    }
  }

  std::uint64_t counter() const { return ctr_; }
  void set_counter(std::uint64_t c) { ctr_ = c; }

private:
  std::uint64_t key_;
  std::uint64_t ctr_;
};

// Walker/Vose alias table for O(1) sampling from a finite pmf.
class alias_table {
public:
  explicit alias_table(const std::vector<double>& weights) {
    std::size_t n = weights.size();
    if (n == 0) throw std::invalid_argument("alias_table: empty weights");
    double total = 0.0;
    for (double w : weights) {
      if (w < 0.0 || !std::isfinite(w)) throw std::invalid_argument("alias_table: bad weight");
      total += w;
    }
    if (total <= 0.0) throw std::invalid_argument("alias_table: zero total");
    prob_.assign(n, 0.0);
    alias_.assign(n, 0);
    std::vector<double> scaled(n);
    std::vector<std::uint32_t> small, large;
    for (std::size_t i = 0; i < n; ++i) {
      scaled[i] = weights[i] * static_cast<double>(n) / total;
      (scaled[i] < 1.0 ? small : large).push_back(static_cast<std::uint32_t>(i));
    }
    while (!small.empty() && !large.empty()) {
      std::uint32_t s = small.back(); small.pop_back();
      std::uint32_t l = large.back(); large.pop_back();
      prob_[s] = scaled[s];
      alias_[s] = l;
      scaled[l] = (scaled[l] + scaled[s]) - 1.0;
      (scaled[l] < 1.0 ? small : large).push_back(l);
    }
    for (std::uint32_t l : large) prob_[l] = 1.0;
    for (std::uint32_t s : small) prob_[s] = 1.0; // numerical leftovers
  }

  std::size_t sample(rng& g) const {
    std::size_t i = static_cast<std::size_t>(g.next_below(prob_.size()));
    return (g.next_unit() < prob_[i]) ? i : alias_[i];
  }

  std::size_t size() const { return prob_.size(); }

private:
  std::vector<double> prob_;
  std::vector<std::uint32_t> alias_;
};

// Running mean/variance with O(1) merge, so per-stream tallies combine
// into one report independent of completion order.
struct running_stats {
  std::uint64_t n = 0;
  double mean = 0.0;
  double m2 = 0.0;

  void add(double x) {
    ++n;
    double d = x - mean;
    mean += d / static_cast<double>(n);
    m2 += d * (x - mean);
  }

  void merge(const running_stats& o) {
    if (o.n == 0) return;
    if (n == 0) { *this = o; return; }
    double nd = static_cast<double>(n), od = static_cast<double>(o.n);
    double d = o.mean - mean;
    double tot = nd + od;
    mean += d * od / tot;
    m2 += o.m2 + d * d * nd * od / tot;
    n += o.n;
  }

  double variance() const { return n > 1 ? m2 / static_cast<double>(n - 1) : 0.0; }
  double std_error() const { return n > 1 ? std::sqrt(variance() / static_cast<double>(n)) : 0.0; }
};

} // namespace bigjump

#endif
