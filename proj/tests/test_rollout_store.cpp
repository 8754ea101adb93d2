#include <doctest.h>

#include <fstream>
#include <sstream>

#include "ioda/error.hpp"
#include "ioda/rollout_store.hpp"
#include "support/oracles.hpp"

using namespace ioda;
using ioda::testing::TempDir;

namespace {

const NavEnv kEnv(EnvConfig{EnvVariant::kFreezeYOutside});
const PolicySpec kSpec{PolicyKind::kVariantCFreeze};

RolloutSet small_set(int n, std::uint64_t seed = 1) {
  const SurrogatePolicy p(kSpec, kEnv);
  return collect(p, kSpec, kEnv, {n, seed, 0.1});
}

std::string serialize(const RolloutSet& set) {
  std::ostringstream out;
  write_rollouts(set, out);
  return out.str();
}

RolloutSet parse(const std::string& text) {
  std::istringstream in(text);
  return read_rollouts(in, kEnv);
}

}  // namespace

TEST_CASE("collect produces dense, valid, policy-optimal rollouts") {
  const RolloutSet set = small_set(1000, 42);
  CHECK(set.rollout_count() == 1000);
  CHECK_NOTHROW(validate(set, kEnv));
  const SurrogatePolicy p(kSpec, kEnv);
  for (std::size_t i = 0; i < set.records.size(); ++i) {
    const auto& r = set.records[i];
    REQUIRE(kEnv.in_workspace(r.state.agent));
    REQUIRE(r.action == p.act(r.state));
    REQUIRE(r.reward == kEnv.reward(r.state, r.action));
    const bool last = i + 1 == set.records.size() || set.records[i + 1].rollout_id != r.rollout_id;
    if (last) {
      REQUIRE(kEnv.at_goal(r.state));
    } else {
      REQUIRE(set.records[i + 1].state == kEnv.step(r.state, r.action));
    }
    if (r.t == 0) REQUIRE(norm2(r.state.goal - r.state.agent) >= 0.1);
  }
}

TEST_CASE("collect is deterministic in its seed") {
  CHECK(serialize(small_set(50, 9)) == serialize(small_set(50, 9)));
  CHECK(serialize(small_set(50, 9)) != serialize(small_set(50, 10)));
}

TEST_CASE("a rollout that starts at its goal has one zero-action record") {
  const SurrogatePolicy p(kSpec, kEnv);
  std::vector<StepRecord> out;
  record_rollout(p, kEnv, {{0.3, 0.3}, {0.3, 0.3}}, 0, out);
  REQUIRE(out.size() == 1);
  CHECK(out[0].action == Action{0.0, 0.0});
  CHECK(out[0].reward == 0.0);
}

TEST_CASE("record_rollout rejects starts outside the workspace") {
  const SurrogatePolicy p(kSpec, kEnv);
  std::vector<StepRecord> out;
  CHECK_THROWS_AS(record_rollout(p, kEnv, {{1.2, 0.3}, {0.3, 0.3}}, 0, out), Error);
}

TEST_CASE("collect rejects a non-positive rollout count") {
  const SurrogatePolicy p(kSpec, kEnv);
  CHECK_THROWS_AS(collect(p, kSpec, kEnv, {0, 1, 0.1}), Error);
}

TEST_CASE("save then load round-trips exactly") {
  TempDir dir("rollouts");
  const RolloutSet set = small_set(40, 3);
  save(set, dir.path() / "d.jsonl");
  const RolloutSet back = load(dir.path() / "d.jsonl", kEnv);
  CHECK(back == set);
  CHECK(serialize(back) == serialize(set));
}

TEST_CASE("round trip of an empty set") {
  RolloutSet empty;
  empty.meta = {kSpec, EnvVariant::kFreezeYOutside, 5, 1};
  const RolloutSet back = parse(serialize(empty));
  CHECK(back == empty);
  CHECK(back.rollout_count() == 0);
}

TEST_CASE("file layout: meta header then one record per line") {
  const std::string text = serialize(small_set(1, 2));
  std::istringstream in(text);
  std::string header;
  std::getline(in, header);
  CHECK(header.rfind(R"({"meta":{"policy":{"kind":"variant_c_freeze")", 0) == 0);
  std::string first;
  std::getline(in, first);
  CHECK(first.rfind(R"({"rollout_id":0,"t":0,"state":)", 0) == 0);
}

TEST_CASE("load rejects broken files with a line number") {
  const std::string good = serialize(small_set(2, 4));
  std::vector<std::string> lines;
  {
    std::istringstream in(good);
    for (std::string l; std::getline(in, l);) lines.push_back(l);
  }
  auto join = [](const std::vector<std::string>& ls) {
    std::string s;
    for (const auto& l : ls) s += l + "\n";
    return s;
  };

  SUBCASE("malformed json") {
    auto bad = lines;
    bad[3] = "{not json";
    try {
      parse(join(bad));
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.category() == ErrorCategory::kFormat);
      CHECK(std::string(e.what()).find("line 4") != std::string::npos);
    }
  }
  SUBCASE("non-contiguous t") {
    auto bad = lines;
    bad.erase(bad.begin() + 2);
    CHECK_THROWS_AS(parse(join(bad)), Error);
  }
  SUBCASE("missing header") {
    auto bad = lines;
    bad.erase(bad.begin());
    CHECK_THROWS_AS(parse(join(bad)), Error);
  }
  SUBCASE("truncated rollout") {
    auto bad = lines;
    bad.pop_back();
    CHECK_THROWS_AS(parse(join(bad)), Error);
  }
  SUBCASE("missing file") {
    CHECK_THROWS_AS(load("/nonexistent/dir/d.jsonl", kEnv), Error);
  }
}

TEST_CASE("all_states preserves (rollout_id, t) order") {
  const RolloutSet set = small_set(5, 6);
  const auto states = all_states(set);
  REQUIRE(states.size() == set.records.size());
  for (std::size_t i = 0; i < states.size(); ++i) CHECK(states[i] == set.records[i].state);
}
