#include "gihelm/fft.hpp"

#include <fftw3.h>

#include <mutex>
#include <new>
#include <stdexcept>

namespace gihelm {

namespace {
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace

void FftBuffer::Deleter::operator()(std::complex<double>* p) const noexcept { fftw_free(p); }

FftBuffer::FftBuffer(std::size_t n) : n_(n) {
  auto* raw = static_cast<std::complex<double>*>(fftw_malloc(sizeof(fftw_complex) * (n == 0 ? 1 : n)));
  if (raw == nullptr) throw std::bad_alloc();
  data_.reset(raw);
}

FftPlan2D::FftPlan2D(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols) {
  FftBuffer scratch(rows * cols);
  auto* p = reinterpret_cast<fftw_complex*>(scratch.data());
  std::lock_guard lock(planner_mutex());
  forward_ = fftw_plan_dft_2d(static_cast<int>(rows), static_cast<int>(cols), p, p, FFTW_FORWARD,
                              FFTW_ESTIMATE);
  backward_ = fftw_plan_dft_2d(static_cast<int>(rows), static_cast<int>(cols), p, p, FFTW_BACKWARD,
                               FFTW_ESTIMATE);
  if (forward_ == nullptr || backward_ == nullptr) throw std::runtime_error("FFTW planning failed");
}

FftPlan2D::~FftPlan2D() {
  std::lock_guard lock(planner_mutex());
  if (forward_) fftw_destroy_plan(static_cast<fftw_plan>(forward_));
  if (backward_) fftw_destroy_plan(static_cast<fftw_plan>(backward_));
}

void FftPlan2D::forward(FftBuffer& buf) const {
  auto* p = reinterpret_cast<fftw_complex*>(buf.data());
  fftw_execute_dft(static_cast<fftw_plan>(forward_), p, p);
}

void FftPlan2D::backward(FftBuffer& buf) const {
  auto* p = reinterpret_cast<fftw_complex*>(buf.data());
  fftw_execute_dft(static_cast<fftw_plan>(backward_), p, p);
}

}  // namespace gihelm
