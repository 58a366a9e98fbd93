#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "barseg/bar_tensor.hpp"

namespace barseg {

/// Boundary times in seconds, strictly increasing and nonnegative.
class BoundarySet {
 public:
  BoundarySet() = default;
  explicit BoundarySet(std::vector<double> times);

  const std::vector<double>& times() const noexcept { return times_; }
  std::size_t size() const noexcept { return times_.size(); }
  bool empty() const noexcept { return times_.empty(); }

 private:
  std::vector<double> times_;
};

struct HitRate {
  double tolerance = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f_measure = 0.0;
  std::size_t n_est = 0;
  std::size_t n_ref = 0;
  std::size_t n_matched = 0;
  std::vector<std::pair<std::size_t, std::size_t>> matches;  // (est index, ref index)
  std::string warning;  // set when either set is empty
};

/// Boundary hit rate under a maximum one-to-one matching of estimated and
/// reference times with |e - r| <= tolerance.
HitRate hit_rate(const BoundarySet& est, const BoundarySet& ref, double tolerance);

struct EvalReport {
  std::vector<HitRate> scores;  // one per tolerance, in the requested order

  const HitRate* at(double tolerance) const;
};

EvalReport evaluate(const BoundarySet& est, const BoundarySet& ref, const std::vector<double>& tolerances);

/// Moves every time to its nearest downbeat (ties go to the earlier one) and
/// collapses duplicates.
BoundarySet align_to_downbeats(const BoundarySet& annotations, const BarGrid& grid);

/// Reads "start<TAB>end<TAB>label", "start<TAB>end" or "time<TAB>label" lines
/// (whitespace also accepted as separator). Returns every start and end time, sorted, with times
/// closer than 1e-6 s merged. Labels are ignored.
BoundarySet load_annotations(const std::filesystem::path& path);
BoundarySet parse_annotations(std::istream& is, const std::string& source = "<stream>");

}  // namespace barseg
