#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace smp {

/// Groups the distinct positive values of a function into bins whose spread
/// (max - min) is at most epsilon and maps every value to its bin's mean.
///
/// Bins are formed by one sweep over the sorted values, opening a new bin
/// whenever a value exceeds the current bin's minimum by more than epsilon.
/// This gives the fewest bins possible for the spread criterion. Zero is
/// never binned: it maps to itself, so quantization cannot grow a support.
class Quantizer {
 public:
  Quantizer(std::vector<double> values, double epsilon);

  double operator()(double v) const;

  std::size_t bin_count() const noexcept { return bins_.size(); }

  // Distinct values of each bin, ascending.
  const std::vector<std::vector<double>>& bins() const noexcept { return bins_; }

 private:
  std::vector<double> sorted_;
  std::vector<std::size_t> bin_of_;
  std::vector<double> means_;
  std::vector<std::vector<double>> bins_;
};

// Quantizes every entry of `values` in place.
void quantize_in_place(std::span<double> values, double epsilon);

}  // namespace smp
