// Thin real<->complex DFT wrapper. Not thread-safe per instance; create one
// per thread when parallelizing.
#pragma once

#include <complex>
#include <memory>
#include <span>

namespace nsf {

class RealDft {
 public:
  explicit RealDft(int size);
  ~RealDft();

  RealDft(RealDft&&) noexcept;
  RealDft& operator=(RealDft&&) noexcept;
  RealDft(const RealDft&) = delete;
  RealDft& operator=(const RealDft&) = delete;

  int size() const;
  int bins() const;  // size/2 + 1

  // out[k] = sum_n in[n] e^{-j 2 pi k n / N}, k = 0..bins-1.
  void forward(std::span<const double> in, std::span<std::complex<double>> out);

  // Inverse of forward, scaled by 1/N so that inverse(forward(x)) == x.
  void inverse(std::span<const std::complex<double>> in, std::span<double> out);

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace nsf
