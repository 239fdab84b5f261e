#pragma once

#include <complex>
#include <cstddef>
#include <memory>
#include <span>

namespace gihelm {

/// Owning, FFTW-aligned complex buffer.
class FftBuffer {
 public:
  explicit FftBuffer(std::size_t n);
  FftBuffer(FftBuffer&&) noexcept = default;
  FftBuffer& operator=(FftBuffer&&) noexcept = default;

  std::complex<double>* data() noexcept { return data_.get(); }
  const std::complex<double>* data() const noexcept { return data_.get(); }
  std::size_t size() const noexcept { return n_; }
  std::span<std::complex<double>> span() noexcept { return {data_.get(), n_}; }

 private:
  struct Deleter {
    void operator()(std::complex<double>* p) const noexcept;
  };
  std::unique_ptr<std::complex<double>[], Deleter> data_;
  std::size_t n_;
};

/// Forward/backward 2D complex DFT plans of fixed shape (rows x cols,
/// row-major). Planning happens once under a global lock; execute() is
/// reentrant on caller-owned buffers. Transforms are unnormalized.
class FftPlan2D {
 public:
  FftPlan2D(std::size_t rows, std::size_t cols);
  ~FftPlan2D();
  FftPlan2D(const FftPlan2D&) = delete;
  FftPlan2D& operator=(const FftPlan2D&) = delete;

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return rows_ * cols_; }

  void forward(FftBuffer& buf) const;
  void backward(FftBuffer& buf) const;

 private:
  std::size_t rows_;
  std::size_t cols_;
  void* forward_ = nullptr;
  void* backward_ = nullptr;
};

}  // namespace gihelm
