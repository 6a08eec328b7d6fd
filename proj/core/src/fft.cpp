#include "nsf/fft.hpp"

#include <fftw3.h>

#include <algorithm>
#include <mutex>

#include "nsf/errors.hpp"

namespace nsf {

namespace {
// The FFTW planner is not thread-safe; plan creation/destruction is global.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace

struct RealDft::Impl {
  int size = 0;
  double* real = nullptr;
  fftw_complex* spec = nullptr;
  fftw_plan fwd = nullptr;
  fftw_plan inv = nullptr;

  explicit Impl(int n) : size(n) {
    std::lock_guard<std::mutex> lock(planner_mutex());
    real = fftw_alloc_real(n);
    spec = fftw_alloc_complex(n / 2 + 1);
    fwd = fftw_plan_dft_r2c_1d(n, real, spec, FFTW_ESTIMATE);
    inv = fftw_plan_dft_c2r_1d(n, spec, real, FFTW_ESTIMATE);
  }

  ~Impl() {
    std::lock_guard<std::mutex> lock(planner_mutex());
    if (fwd) fftw_destroy_plan(fwd);
    if (inv) fftw_destroy_plan(inv);
    fftw_free(real);
    fftw_free(spec);
  }
};

RealDft::RealDft(int size) {
  if (size < 2) throw ConfigError("RealDft: size must be at least 2");
  impl_ = std::make_unique<Impl>(size);
}

RealDft::~RealDft() = default;
RealDft::RealDft(RealDft&&) noexcept = default;
RealDft& RealDft::operator=(RealDft&&) noexcept = default;

int RealDft::size() const { return impl_->size; }
int RealDft::bins() const { return impl_->size / 2 + 1; }

void RealDft::forward(std::span<const double> in,
                      std::span<std::complex<double>> out) {
  const int n = impl_->size;
  const int k = bins();
  if (static_cast<int>(in.size()) != n || static_cast<int>(out.size()) != k) {
    throw ConfigError("RealDft::forward: buffer size mismatch");
  }
  std::copy(in.begin(), in.end(), impl_->real);
  fftw_execute(impl_->fwd);
  for (int i = 0; i < k; ++i) {
    out[i] = {impl_->spec[i][0], impl_->spec[i][1]};
  }
}

void RealDft::inverse(std::span<const std::complex<double>> in,
                      std::span<double> out) {
  const int n = impl_->size;
  const int k = bins();
  if (static_cast<int>(in.size()) != k || static_cast<int>(out.size()) != n) {
    throw ConfigError("RealDft::inverse: buffer size mismatch");
  }
  for (int i = 0; i < k; ++i) {
    impl_->spec[i][0] = in[i].real();
    impl_->spec[i][1] = in[i].imag();
  }
  fftw_execute(impl_->inv);
  const double scale = 1.0 / n;
  for (int i = 0; i < n; ++i) out[i] = impl_->real[i] * scale;
}

}  // namespace nsf
