#include <doctest.h>

#include <cmath>

#include "semnav/metrics.hpp"

using namespace semnav;

TEST_SUITE_BEGIN("metrics");

TEST_CASE("nll of uniform policies is ln 4") {
  const std::vector<Policy> pis(6, Policy{0.25, 0.25, 0.25, 0.25});
  const std::vector<Control> us(6, Control::Left);
  CHECK(nll(pis, us) == doctest::Approx(std::log(4.0)).epsilon(1e-12));
}

TEST_CASE("nll of certain policies is zero") {
  const std::vector<Policy> pis(3, Policy{0.0, 1.0, 0.0, 0.0});
  const std::vector<Control> us(3, Control::Down);
  CHECK(nll(pis, us) == doctest::Approx(0.0));
}

TEST_CASE("nll averages per step") {
  const std::vector<Policy> pis = {{0.5, 0.5, 0.0, 0.0}, {0.25, 0.25, 0.25, 0.25}};
  const std::vector<Control> us = {Control::Up, Control::Down};
  CHECK(nll(pis, us) == doctest::Approx((std::log(2.0) + std::log(4.0)) / 2.0).epsilon(1e-12));
}

TEST_CASE("nll of the 4dp example") {
  const std::vector<Policy> pis = {{0.6439, 0.2369, 0.0871, 0.0321}};
  const std::vector<Control> us = {Control::Down};
  CHECK(nll(pis, us) == doctest::Approx(1.4403).epsilon(1e-4));
}

TEST_CASE("nll rejects misaligned sequences") {
  CHECK_THROWS_AS(nll({{0.25, 0.25, 0.25, 0.25}}, {}), Error);
}

TEST_CASE("accuracy counts argmax matches with deterministic ties") {
  const std::vector<Policy> pis = {
      {0.7, 0.1, 0.1, 0.1},     // up
      {0.1, 0.7, 0.1, 0.1},     // down
      {0.25, 0.25, 0.25, 0.25}, // tie -> up by control order
      {0.1, 0.1, 0.1, 0.7},     // right
  };
  CHECK(accuracy(pis, {Control::Up, Control::Down, Control::Up, Control::Right}) == 1.0);
  CHECK(accuracy(pis, {Control::Up, Control::Down, Control::Down, Control::Right}) == 0.75);
  CHECK(accuracy(pis, {Control::Down, Control::Up, Control::Down, Control::Left}) == 0.0);
  CHECK(argmax_control(pis[2]) == Control::Up);
}

TEST_CASE("tsr uses the inclusive twice-expert bound") {
  std::vector<RolloutOutcome> outcomes;
  outcomes.push_back({true, 10, 10});   // well within
  outcomes.push_back({true, 20, 10});   // exactly 2T: success
  outcomes.push_back({true, 21, 10});   // one beyond: failure
  outcomes.push_back({false, 5, 10});   // never reached
  CHECK(tsr(outcomes) == doctest::Approx(0.5));
  CHECK(tsr({{true, 1, 1}}) == 1.0);
  std::vector<RolloutOutcome> many;
  for (int i = 0; i < 100; ++i) many.push_back({i < 93, 1, 1});
  CHECK(tsr(many) == doctest::Approx(0.93));
}

TEST_CASE("mhd of identical trajectories is zero") {
  const Trajectory t = {{0, 0}, {0, 1}, {1, 1}};
  CHECK(mhd_pair(t, t) == 0.0);
  CHECK(mhd({t, t}, {t, t}) == 0.0);
}

TEST_CASE("mhd of single points is their distance") {
  CHECK(mhd_pair({{0, 0}}, {{0, 3}}) == doctest::Approx(3.0));
  CHECK(mhd_pair({{0, 0}}, {{3, 4}}) == doctest::Approx(5.0));
}

TEST_CASE("mhd takes the larger directed mean") {
  const Trajectory a = {{0, 0}, {0, 1}};
  const Trajectory e = {{1, 0}, {1, 1}};
  CHECK(mhd_pair(a, e) == doctest::Approx(1.0));
}

TEST_CASE("mhd is symmetric and non-negative") {
  const Trajectory a = {{0, 0}, {0, 1}, {0, 2}, {1, 2}};
  const Trajectory e = {{3, 0}, {2, 1}, {2, 2}};
  CHECK(mhd_pair(a, e) == doctest::Approx(mhd_pair(e, a)));
  CHECK(mhd_pair(a, e) >= 0.0);
}

TEST_CASE("mhd rejects empty trajectories") {
  CHECK_THROWS_AS(mhd_pair({}, {{0, 0}}), Error);
  CHECK_THROWS_AS(mhd({{}}, {{{0, 0}}}), Error);
}

TEST_SUITE_END();
