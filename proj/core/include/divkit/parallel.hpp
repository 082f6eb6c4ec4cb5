#pragma once

#include <cstddef>
#include <functional>

namespace divkit {

/// Worker threads used by data-parallel kernels. 0 means "available parallelism".
void set_thread_count(std::size_t n);
std::size_t thread_count();

/// Neumaier (improved Kahan-Babuska) running sum.
class CompensatedSum {
 public:
  void add(double x) noexcept {
    const double t = sum_ + x;
    if (magnitude(sum_) >= magnitude(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  CompensatedSum& operator+=(double x) noexcept {
    add(x);
    return *this;
  }
  double value() const noexcept { return sum_ + comp_; }

 private:
  static constexpr double magnitude(double x) noexcept { return x < 0 ? -x : x; }

  double sum_ = 0.0;
  double comp_ = 0.0;
};

/// Rows are grouped into blocks of this many indices; the grouping never depends
/// on the thread count, which is what makes reductions bit-identical.
inline constexpr std::size_t kReductionBlock = 64;

/// Runs `body(begin, end)` over [0, n) split into fixed blocks of `block` indices,
/// possibly on several threads. Blocks must write to disjoint state.
void parallel_for_blocks(std::size_t n, std::size_t block,
                         const std::function<void(std::size_t, std::size_t)>& body);

/// Deterministic parallel sum of `term(i)` for i in [0, n): each fixed block is
/// summed with compensation, block partials are then combined in block order.
double deterministic_sum(std::size_t n, const std::function<double(std::size_t)>& term);

}  // namespace divkit
