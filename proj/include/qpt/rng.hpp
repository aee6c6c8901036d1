#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace qpt {

// splitmix64; used to derive independent per-config child seeds from (run seed, index)
// so simulated configs are order-independent.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
  return splitmix64(seed ^ splitmix64(index + 1));
}

// Seeded count sampler. mt19937_64 is bit-stable across platforms; the Poisson
// sampler is written out here because the standard library's distribution is
// implementation-defined, which would break byte-identical golden outputs.
class CountSampler {
 public:
  explicit CountSampler(std::uint64_t seed) : engine_(seed) {}

  double uniform() {  // in (0,1)
    return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
  }

  double uniform_symmetric() { return uniform() - 0.5; }  // in (-1/2, 1/2)

  // Poisson sample: sequential inversion below mean 10, Hormann's PTRS
  // transformed rejection above. Exact distribution in both regimes.
  long long poisson(double mean) {
    if (mean <= 0.0) return 0;
    if (mean < 10.0) return poisson_inversion(mean);
    return poisson_ptrs(mean);
  }

 private:
  long long poisson_inversion(double mean) {
    double p = std::exp(-mean);
    double cdf = p;
    double u = uniform();
    long long k = 0;
    while (u > cdf && k < 200) {
      ++k;
      p *= mean / static_cast<double>(k);
      cdf += p;
    }
    return k;
  }

  long long poisson_ptrs(double mean) {
    const double slam = std::sqrt(mean);
    const double loglam = std::log(mean);
    const double b = 0.931 + 2.53 * slam;
    const double a = -0.059 + 0.02483 * b;
    const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
    const double v_r = 0.9277 - 3.6224 / (b - 2.0);
    for (;;) {
      double u = uniform_symmetric();
      double v = uniform();
      double us = 0.5 - std::abs(u);
      double kf = std::floor((2.0 * a / us + b) * u + mean + 0.43);
      if (us >= 0.07 && v <= v_r) return static_cast<long long>(kf);
      if (kf < 0.0 || (us < 0.013 && v > us)) continue;
      if (std::log(v * inv_alpha / (a / (us * us) + b)) <=
          kf * loglam - mean - std::lgamma(kf + 1.0))
        return static_cast<long long>(kf);
    }
  }

  std::mt19937_64 engine_;
};

}  // namespace qpt
