#include <doctest.h>

#include "mtbo/domain.hpp"

using namespace mtbo;

namespace {

Action act(std::initializer_list<double> vals) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(vals.size()));
  int i = 0;
  for (double x : vals) v[i++] = x;
  return v;
}

Observation obs(int task, Action a, double y, int round) {
  Observation o;
  o.task = task;
  o.action = std::move(a);
  o.reward = y;
  o.round = round;
  return o;
}

ActionSpace unit_box(int dim) {
  return ActionSpace(Eigen::VectorXd::Zero(dim), Eigen::VectorXd::Ones(dim));
}

}  // namespace

TEST_CASE("incumbent: empty history is absent") {
  History h;
  CHECK_FALSE(incumbent(h, 0, 2).has_value());
}

TEST_CASE("incumbent: max of two observations") {
  History h;
  h.append(obs(0, act({0.2}), 1.0, 1));
  h.append(obs(0, act({0.5}), 3.0, 2));
  const auto inc = incumbent(h, 0, 1);
  REQUIRE(inc.has_value());
  CHECK(inc->first == act({0.5}));
  CHECK(inc->second == 3.0);
}

TEST_CASE("incumbent: reward ties break to the earliest observation") {
  History h;
  h.append(obs(0, act({0.2}), 2.0, 1));
  h.append(obs(0, act({0.9}), 2.0, 2));
  const auto inc = incumbent(h, 0, 1);
  REQUIRE(inc.has_value());
  CHECK(inc->first == act({0.2}));
  CHECK(inc->second == 2.0);
}

TEST_CASE("incumbent: invalid task index throws") {
  History h;
  CHECK_THROWS_AS(incumbent(h, 3, 2), std::out_of_range);
  CHECK_THROWS_AS(incumbent(h, -1, 2), std::out_of_range);
}

TEST_CASE("best observed reward never decreases under appends") {
  History h;
  Rng rng(42);
  double last = -1e300;
  for (int i = 0; i < 50; ++i) {
    h.append(obs(0, act({rng.uniform()}), rng.normal(), i + 1));
    const auto inc = h.incumbent(0);
    REQUIRE(inc.has_value());
    CHECK(inc->second >= last);
    last = inc->second;
  }
}

TEST_CASE("actions_for deduplicates, count_for does not") {
  History h;
  h.append(obs(1, act({0.5}), 1.0, 1));
  h.append(obs(1, act({0.5}), 2.0, 2));
  h.append(obs(1, act({0.7}), 0.5, 3));
  h.append(obs(0, act({0.1}), 0.0, 4));
  CHECK(h.actions_for(1).size() == 2);
  CHECK(h.count_for(1) == 3);
  CHECK(h.count_for(0) == 1);
  CHECK(h.count_for(2) == 0);
}

TEST_CASE("extract_policy: fully queried history is rng-independent") {
  const TaskSpace tasks = TaskSpace::uniform(8);
  const ActionSpace actions = unit_box(2);
  History h;
  for (int x = 0; x < 8; ++x)
    h.append(obs(x, act({0.1 * x, 0.5}), static_cast<double>(x), x + 1));
  Rng rng_a(1), rng_b(999);
  const PolicyMap pa = extract_policy(h, tasks, actions, rng_a);
  const PolicyMap pb = extract_policy(h, tasks, actions, rng_b);
  for (int x = 0; x < 8; ++x) {
    CHECK(pa.provenance[x] == PolicyMap::Provenance::incumbent);
    CHECK(pa.actions[x] == pb.actions[x]);
    CHECK(pa.actions[x] == h.incumbent(x)->first);
  }
}

TEST_CASE("extract_policy: unqueried tasks fall back to uniform in-bounds draws") {
  const TaskSpace tasks = TaskSpace::uniform(2);
  const ActionSpace actions = unit_box(2);
  History h;
  h.append(obs(0, act({0.3, 0.3}), 1.0, 1));
  Rng rng(7);
  const PolicyMap p = extract_policy(h, tasks, actions, rng);
  CHECK(p.provenance[0] == PolicyMap::Provenance::incumbent);
  CHECK(p.provenance[1] == PolicyMap::Provenance::random_fallback);
  CHECK(actions.contains(p.actions[1]));

  Rng rng2(7);
  const PolicyMap q = extract_policy(h, tasks, actions, rng2);
  CHECK(p.actions[1] == q.actions[1]);  // same seed, same fallback
}

TEST_CASE("extract_policy: grid fallback picks grid actions") {
  const TaskSpace tasks = TaskSpace::uniform(1);
  std::vector<Action> grid = {act({0.0, 0.0}), act({1.0, 1.0})};
  const ActionSpace actions(Eigen::VectorXd::Zero(2), Eigen::VectorXd::Ones(2), grid);
  History h;
  Rng rng(3);
  const PolicyMap p = extract_policy(h, tasks, actions, rng);
  CHECK((p.actions[0] == grid[0] || p.actions[0] == grid[1]));
}

TEST_CASE("TaskSpace and ActionSpace invariants are validated") {
  CHECK_THROWS_AS(TaskSpace({}, Eigen::VectorXd()), std::invalid_argument);
  CHECK_THROWS_AS(TaskSpace({"a", "a"}, Eigen::VectorXd::Ones(2)),
                  std::invalid_argument);
  Eigen::VectorXd w(2);
  w << -1.0, 1.0;
  CHECK_THROWS_AS(TaskSpace({"a", "b"}, w), std::invalid_argument);
  CHECK_THROWS_AS(TaskSpace({"a", "b"}, Eigen::VectorXd::Zero(2)),
                  std::invalid_argument);

  CHECK_THROWS_AS(ActionSpace(Eigen::VectorXd::Ones(1), Eigen::VectorXd::Zero(1)),
                  std::invalid_argument);
  std::vector<Action> bad_grid = {act({2.0})};
  CHECK_THROWS_AS(ActionSpace(Eigen::VectorXd::Zero(1), Eigen::VectorXd::Ones(1),
                              bad_grid),
                  std::invalid_argument);
  std::vector<Action> dup_grid = {act({0.5}), act({0.5})};
  CHECK_THROWS_AS(ActionSpace(Eigen::VectorXd::Zero(1), Eigen::VectorXd::Ones(1),
                              dup_grid),
                  std::invalid_argument);
}
