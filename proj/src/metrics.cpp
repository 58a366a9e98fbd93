#include "barseg/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

#include "barseg/error.hpp"

namespace barseg {
namespace {

constexpr double kMergeEpsilon = 1e-6;

// Kuhn's augmenting-path maximum bipartite matching.
std::vector<std::pair<std::size_t, std::size_t>> max_matching(const std::vector<std::vector<std::size_t>>& adjacency,
                                                              std::size_t n_right) {
  std::vector<std::ptrdiff_t> match_right(n_right, -1);
  std::vector<char> visited;
  std::function<bool(std::size_t)> augment = [&](std::size_t left) {
    for (auto right : adjacency[left]) {
      if (visited[right]) continue;
      visited[right] = 1;
      if (match_right[right] < 0 || augment(static_cast<std::size_t>(match_right[right]))) {
        match_right[right] = static_cast<std::ptrdiff_t>(left);
        return true;
      }
    }
    return false;
  };
  for (std::size_t left = 0; left < adjacency.size(); ++left) {
    visited.assign(n_right, 0);
    augment(left);
  }
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t r = 0; r < n_right; ++r)
    if (match_right[r] >= 0) pairs.emplace_back(static_cast<std::size_t>(match_right[r]), r);
  std::sort(pairs.begin(), pairs.end());
  return pairs;
}

}  // namespace

BoundarySet::BoundarySet(std::vector<double> times) : times_(std::move(times)) {
  for (std::size_t i = 0; i < times_.size(); ++i) {
    if (!std::isfinite(times_[i]) || times_[i] < 0)
      throw InvalidArgument("boundaries: time " + std::to_string(i) + " is negative or not finite");
    if (i > 0 && times_[i] <= times_[i - 1])
      throw InvalidArgument("boundaries: times must be strictly increasing (index " + std::to_string(i) + ")");
  }
}

HitRate hit_rate(const BoundarySet& est, const BoundarySet& ref, double tolerance) {
  if (!(tolerance > 0)) throw InvalidArgument("hit_rate: tolerance must be positive");
  HitRate out;
  out.tolerance = tolerance;
  out.n_est = est.size();
  out.n_ref = ref.size();
  if (est.empty() || ref.empty()) {
    out.warning = est.empty() ? "estimated boundary set is empty" : "reference boundary set is empty";
    return out;
  }

  std::vector<std::vector<std::size_t>> adjacency(est.size());
  for (std::size_t i = 0; i < est.size(); ++i)
    for (std::size_t j = 0; j < ref.size(); ++j)
      if (std::abs(est.times()[i] - ref.times()[j]) <= tolerance) adjacency[i].push_back(j);

  out.matches = max_matching(adjacency, ref.size());
  out.n_matched = out.matches.size();
  out.precision = static_cast<double>(out.n_matched) / static_cast<double>(out.n_est);
  out.recall = static_cast<double>(out.n_matched) / static_cast<double>(out.n_ref);
  const double sum = out.precision + out.recall;
  out.f_measure = sum > 0 ? 2.0 * out.precision * out.recall / sum : 0.0;
  return out;
}

const HitRate* EvalReport::at(double tolerance) const {
  for (const auto& s : scores)
    if (s.tolerance == tolerance) return &s;
  return nullptr;
}

EvalReport evaluate(const BoundarySet& est, const BoundarySet& ref, const std::vector<double>& tolerances) {
  EvalReport report;
  for (double tol : tolerances) report.scores.push_back(hit_rate(est, ref, tol));
  return report;
}

BoundarySet align_to_downbeats(const BoundarySet& annotations, const BarGrid& grid) {
  const auto& db = grid.downbeats();
  std::vector<double> out;
  for (double t : annotations.times()) {
    const auto upper = std::lower_bound(db.begin(), db.end(), t);
    double nearest;
    if (upper == db.begin())
      nearest = *upper;
    else if (upper == db.end())
      nearest = db.back();
    else
      nearest = (*upper - t < t - *(upper - 1)) ? *upper : *(upper - 1);
    if (out.empty() || out.back() != nearest) out.push_back(nearest);
  }
  return BoundarySet(std::move(out));
}

BoundarySet parse_annotations(std::istream& is, const std::string& source) {
  std::vector<double> times;
  std::string line;
  int line_no = 0;
  auto fail = [&](const std::string& why) {
    throw FormatError(source + ":" + std::to_string(line_no) + ": " + why);
  };
  auto parse_time = [&](const std::string& field, double& value) {
    std::size_t used = 0;
    try {
      value = std::stod(field, &used);
    } catch (const std::exception&) {
      return false;
    }
    return used == field.size() && std::isfinite(value);
  };

  while (std::getline(is, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;

    std::vector<std::string> fields;
    if (line.find('\t') != std::string::npos) {
      std::stringstream ss(line);
      std::string f;
      while (std::getline(ss, f, '\t')) fields.push_back(f);
    } else {
      std::istringstream ss(line);
      std::string f;
      while (ss >> f) fields.push_back(f);
    }
    for (auto& f : fields) {
      const auto first = f.find_first_not_of(' ');
      const auto last = f.find_last_not_of(' ');
      f = first == std::string::npos ? std::string() : f.substr(first, last - first + 1);
    }

    double start = 0, end = 0;
    // "start end [label]" when the second field is numeric, "time [label]" otherwise.
    const bool has_end = fields.size() >= 2 && parse_time(fields[1], end);
    if (fields.size() >= 3 || has_end) {
      if (!parse_time(fields[0], start) || !has_end) fail("expected start and end times");
      if (end < start) fail("segment ends before it starts");
      times.push_back(start);
      times.push_back(end);
    } else {
      if (!parse_time(fields[0], start)) fail("expected a time");
      times.push_back(start);
    }
  }
  if (times.empty()) throw FormatError(source + ": no annotations");

  std::sort(times.begin(), times.end());
  std::vector<double> merged;
  for (double t : times)
    if (merged.empty() || t - merged.back() > kMergeEpsilon) merged.push_back(t);
  return BoundarySet(std::move(merged));
}

BoundarySet load_annotations(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw FormatError("cannot open " + path.string());
  return parse_annotations(is, path.string());
}

}  // namespace barseg
