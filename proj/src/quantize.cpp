#include "smp/quantize.hpp"

#include <algorithm>
#include <numeric>

#include "smp/errors.hpp"

namespace smp {

Quantizer::Quantizer(std::vector<double> values, double epsilon) {
  if (!(epsilon >= 0.0)) throw ContractError("quantization epsilon must be nonnegative");
  std::erase_if(values, [](double v) { return !(v > 0.0); });
  std::sort(values.begin(), values.end());
  values.erase(std::unique(values.begin(), values.end()), values.end());
  sorted_ = std::move(values);
  bin_of_.resize(sorted_.size());
  for (std::size_t i = 0; i < sorted_.size(); ++i) {
    if (bins_.empty() || sorted_[i] - bins_.back().front() > epsilon) bins_.emplace_back();
    bins_.back().push_back(sorted_[i]);
    bin_of_[i] = bins_.size() - 1;
  }
  means_.reserve(bins_.size());
  for (const auto& bin : bins_) {
    // a singleton keeps its exact value
    means_.push_back(bin.size() == 1 ? bin.front()
                                     : std::accumulate(bin.begin(), bin.end(), 0.0) / static_cast<double>(bin.size()));
  }
}

double Quantizer::operator()(double v) const {
  if (!(v > 0.0)) return v;
  auto it = std::lower_bound(sorted_.begin(), sorted_.end(), v);
  if (it == sorted_.end() || *it != v) throw ContractError("value was not part of the quantized set");
  return means_[bin_of_[static_cast<std::size_t>(it - sorted_.begin())]];
}

void quantize_in_place(std::span<double> values, double epsilon) {
  if (epsilon == 0.0) return;
  Quantizer q(std::vector<double>(values.begin(), values.end()), epsilon);
  for (double& v : values) v = q(v);
}

}  // namespace smp
