#include <cmath>
#include <vector>

#include "doctest.h"
#include "oracle.hpp"
#include "phonecap/stats.hpp"

using namespace phonecap::stats;

TEST_SUITE("stats") {

TEST_CASE("pearson fixture") {
  const std::vector<double> x{1, 2, 3, 4, 5}, y{2, 4, 5, 4, 5};
  auto c = pearson(x, y);
  CHECK(std::abs(c.r - 6 / std::sqrt(60.0)) < 1e-12);
  CHECK(c.n == 5);
  CHECK(std::abs(c.p - oracle::t_test_p(c.r, 5)) < 1e-9);
}

TEST_CASE("perfect correlations") {
  const std::vector<double> x{1, 2, 3}, y{3, 2, 1};
  CHECK(pearson(x, x).r == 1.0);
  CHECK(pearson(x, y).r == -1.0);
  CHECK(pearson(x, x).p == 0.0);

  const std::vector<double> a{0.3, 1.7, -2.2, 9.1, 4.4, 0.01};
  std::vector<double> up, down;
  for (double v : a) {
    up.push_back(3.5 * v + 2);
    down.push_back(-0.25 * v + 7);
  }
  CHECK(std::abs(pearson(a, up).r - 1.0) < 1e-12);
  CHECK(std::abs(pearson(a, down).r + 1.0) < 1e-12);
}

TEST_CASE("symmetry") {
  const std::vector<double> x{1, 5, 2, 8, 3, 3}, y{2, 2, 9, 1, 4, 6};
  CHECK(pearson(x, y).r == doctest::Approx(pearson(y, x).r).epsilon(1e-15));
  CHECK(pearson(x, y).p == doctest::Approx(pearson(y, x).p).epsilon(1e-12));
}

TEST_CASE("p values against integration") {
  for (auto [r, n] : std::vector<std::pair<double, int>>{{0.7746, 5}, {-0.4, 5}, {0.35, 30}, {0.05, 900}, {-0.08, 900}}) {
    CHECK_MESSAGE(std::abs(correlation_p_value(r, static_cast<std::size_t>(n)) - oracle::t_test_p(r, n)) < 1e-9,
                  "r=" << r << " n=" << n);
  }
}

TEST_CASE("errors") {
  const std::vector<double> two{1, 2}, three{1, 2, 3}, flat{4, 4, 4};
  CHECK_THROWS(pearson(two, two));
  CHECK_THROWS(pearson(three, two));
  CHECK_THROWS_WITH(pearson(three, flat), "zero variance");
}

TEST_CASE("mean and population sd") {
  const std::vector<double> v{7, 7, 7, 6, 5};
  auto m = mean_sd(v);
  CHECK(m.mean == doctest::Approx(6.4));
  CHECK(m.sd == doctest::Approx(std::sqrt(0.64)));
  const std::vector<double> same{3, 3, 3};
  CHECK(mean_sd(same).sd == 0.0);
}

}
