#include <random>
#include <sstream>

#include "barseg/error.hpp"
#include "barseg/metrics.hpp"
#include "doctest.h"

using namespace barseg;

namespace {

BoundarySet parse(const std::string& text) {
  std::istringstream is(text);
  return parse_annotations(is);
}

BoundarySet random_set(std::mt19937& gen, int n) {
  std::uniform_real_distribution<double> step(0.2, 6.0);
  std::vector<double> t{0.0};
  for (int i = 1; i < n; ++i) t.push_back(t.back() + step(gen));
  return BoundarySet(t);
}

}  // namespace

TEST_CASE("identical sets score 1") {
  const BoundarySet s({0.0, 10.0, 20.0});
  for (double tol : {0.5, 3.0}) {
    const auto h = hit_rate(s, s, tol);
    CHECK(h.precision == 1.0);
    CHECK(h.recall == 1.0);
    CHECK(h.f_measure == 1.0);
  }
}

TEST_CASE("tolerance decides near misses") {
  const BoundarySet est({0.0, 10.0, 20.0});
  const BoundarySet ref({0.0, 10.4, 20.0});
  CHECK(hit_rate(est, ref, 0.5).f_measure == 1.0);
  const auto strict = hit_rate(est, ref, 0.3);
  CHECK(strict.n_matched == 2);
  CHECK(strict.precision == doctest::Approx(2.0 / 3.0));
  CHECK(strict.recall == doctest::Approx(2.0 / 3.0));
  CHECK(strict.f_measure == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("matching is one-to-one") {
  const auto h = hit_rate(BoundarySet({10.0, 10.2}), BoundarySet({10.1}), 0.5);
  CHECK(h.n_matched == 1);
  CHECK(h.precision == 0.5);
  CHECK(h.recall == 1.0);
  CHECK(h.f_measure == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("maximum matching beats greedy") {
  // greedy nearest pairing takes (1.0, 1.3) and leaves 0.6 unmatched
  const auto h = hit_rate(BoundarySet({1.0, 1.8}), BoundarySet({0.6, 1.3}), 0.5);
  CHECK(h.n_matched == 2);
  CHECK(h.matches.size() == 2);
}

TEST_CASE("empty sets give zeros with a warning") {
  const auto h = hit_rate(BoundarySet(), BoundarySet({1.0}), 0.5);
  CHECK(h.f_measure == 0.0);
  CHECK(h.precision == 0.0);
  CHECK_FALSE(h.warning.empty());
  CHECK_THROWS_AS(hit_rate(BoundarySet({1.0}), BoundarySet({1.0}), 0.0), InvalidArgument);
}

TEST_CASE("hit rate properties on random sets") {
  std::mt19937 gen(5);
  for (int trial = 0; trial < 200; ++trial) {
    const auto est = random_set(gen, 2 + static_cast<int>(gen() % 12));
    const auto ref = random_set(gen, 2 + static_cast<int>(gen() % 12));
    const auto a = hit_rate(est, ref, 0.5);
    const auto b = hit_rate(ref, est, 0.5);
    CHECK(a.precision == b.recall);
    CHECK(a.recall == b.precision);
    CHECK(hit_rate(est, ref, 3.0).f_measure >= a.f_measure);
    CHECK(a.n_matched <= std::min(est.size(), ref.size()));
    const double pr = a.precision + a.recall;
    CHECK(a.f_measure == doctest::Approx(pr > 0 ? 2 * a.precision * a.recall / pr : 0.0));
  }
}

TEST_CASE("evaluate keeps tolerance order") {
  const auto r = evaluate(BoundarySet({0.0, 5.0}), BoundarySet({0.0, 6.0}), {0.5, 3.0});
  REQUIRE(r.scores.size() == 2);
  CHECK(r.at(0.5)->f_measure == 0.5);
  CHECK(r.at(3.0)->f_measure == 1.0);
  CHECK(r.at(1.0) == nullptr);
}

TEST_CASE("alignment to downbeats") {
  const BarGrid grid({0.0, 2.0, 4.0});
  CHECK(align_to_downbeats(BoundarySet({1.9}), grid).times() == std::vector<double>{2.0});
  CHECK(align_to_downbeats(BoundarySet({0.0, 2.0, 4.0}), grid).times() == std::vector<double>{0.0, 2.0, 4.0});
  CHECK(align_to_downbeats(BoundarySet({1.0}), BarGrid({0.0, 2.0})).times() == std::vector<double>{0.0});
  CHECK(align_to_downbeats(BoundarySet({1.7, 2.2, 9.0}), grid).times() == std::vector<double>{2.0, 4.0});

  std::mt19937 gen(3);
  const auto set = random_set(gen, 20);
  const BarGrid fine({0.0, 1.5, 3.1, 4.0, 7.7, 9.0, 15.0});
  const auto aligned = align_to_downbeats(set, fine);
  for (double t : aligned.times())
    CHECK(std::find(fine.downbeats().begin(), fine.downbeats().end(), t) != fine.downbeats().end());
}

TEST_CASE("annotation parsing") {
  CHECK(parse("0.0\t10.0\tA\n10.0\t20.0\tB").times() == std::vector<double>{0.0, 10.0, 20.0});
  CHECK(parse("0.0\t10.0\tA\n10.0000004\t20.0\tB\n").times().size() == 3);
  CHECK(parse("0.0 intro\n12.5 verse\n").times() == std::vector<double>{0.0, 12.5});
  CHECK(parse("0.0\t4.5\n4.5\t9.0\n").times() == std::vector<double>{0.0, 4.5, 9.0});
  CHECK_THROWS_AS(parse(""), FormatError);
  try {
    parse("0.0\t1.0\tA\nbad line\n");
    FAIL("expected an error");
  } catch (const FormatError& e) {
    CHECK(std::string(e.what()).find(":2") != std::string::npos);
  }
  CHECK_THROWS_AS(load_annotations("/nonexistent/annotations.txt"), Error);
}

TEST_CASE("boundary sets validate") {
  CHECK_THROWS_AS(BoundarySet({1.0, 0.5}), InvalidArgument);
  CHECK_THROWS_AS(BoundarySet({-1.0}), InvalidArgument);
}
