// tests/fst_test.cc

// Copyright 2026  The latkit authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#include "latkit/fst.h"

#include <cmath>
#include <random>
#include <set>

#include "doctest.h"
#include "latkit/common.h"
#include "latkit/fst_io.h"
#include "test_util.h"

using namespace latkit;
using namespace latkit::fst;
using latkit::testutil::RandomFstSpec;
using latkit::testutil::chain_acceptor;
using latkit::testutil::enumerate_language;
using latkit::testutil::language_close;
using latkit::testutil::random_fst;

TEST_CASE("semiring axioms hold on random triples") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> d(-30.0, 5.0);
  for (const Semiring& ring : {log_ring(), tropical_ring()}) {
    for (int i = 0; i < 10000; ++i) {
      double a = d(rng), b = d(rng), c = d(rng);
      // plus: associative, commutative
      CHECK(ring.plus(ring.plus(a, b), c) == doctest::Approx(ring.plus(a, ring.plus(b, c))).epsilon(0).scale(1).epsilon(1e-10));
      CHECK(ring.plus(a, b) == doctest::Approx(ring.plus(b, a)).epsilon(1e-12));
      // times associative; distributes over plus
      CHECK(ring.times(ring.times(a, b), c) == doctest::Approx(ring.times(a, ring.times(b, c))).epsilon(1e-12));
      double lhs = ring.times(a, ring.plus(b, c));
      double rhs = ring.plus(ring.times(a, b), ring.times(a, c));
      CHECK(std::abs(lhs - rhs) < 1e-10);
      // zero annihilates; one is identity
      CHECK(ring.times(a, ring.zero()) == ring.zero());
      CHECK(ring.times(a, ring.one()) == a);
      CHECK(ring.plus(a, ring.zero()) == a);
    }
  }
}

TEST_CASE("log_add never underflows far-apart operands") {
  CHECK(log_add(-1e6, -1e6 - 5) == doctest::Approx(-1e6 + std::log1p(std::exp(-5.0))));
  CHECK(log_add(kLogZero, -3.0) == -3.0);
  CHECK(log_add(-3.0, kLogZero) == -3.0);
}

namespace {

WeightedFst two_symbol_tables_fst() {
  WeightedFst a;
  a.isyms.add("a");
  a.isyms.add("b");
  a.osyms.add("a");
  a.osyms.add("b");
  return a;
}

}  // namespace

TEST_CASE("compose: identity-weight relabeling of a single path") {
  // a: single path "ab" weight 0; b: a->x, b->y each weight 0.
  WeightedFst a = two_symbol_tables_fst();
  StateId s0 = a.add_state(), s1 = a.add_state(), s2 = a.add_state();
  a.set_start(s0);
  a.add_arc(s0, s1, 1, 1, 0.0);
  a.add_arc(s1, s2, 2, 2, 0.0);
  a.set_final(s2, 0.0);

  WeightedFst b;
  b.isyms = a.osyms;
  b.osyms.add("x");
  b.osyms.add("y");
  StateId t0 = b.add_state();
  b.set_start(t0);
  b.add_arc(t0, t0, 1, 1, 0.0);
  b.add_arc(t0, t0, 2, 2, 0.0);
  b.set_final(t0, 0.0);

  auto c = compose(a, b, tropical_ring());
  auto paths = enumerate_paths(c, 10);
  REQUIRE(paths.paths.size() == 1);
  CHECK(paths.paths[0].ilabels == std::vector<Label>{1, 2});
  CHECK(paths.paths[0].olabels == std::vector<Label>{1, 2});
  CHECK(paths.paths[0].weight == 0.0);
}

TEST_CASE("compose: empty intersection trims to the empty machine") {
  WeightedFst a = two_symbol_tables_fst();
  StateId s0 = a.add_state(), s1 = a.add_state();
  a.set_start(s0);
  a.add_arc(s0, s1, 1, 1, 0.0);  // accepts only "a"
  a.set_final(s1, 0.0);
  WeightedFst b = two_symbol_tables_fst();
  StateId t0 = b.add_state(), t1 = b.add_state();
  b.set_start(t0);
  b.add_arc(t0, t1, 2, 2, 0.0);  // accepts only "b"
  b.set_final(t1, 0.0);
  auto c = compose(a, b, log_ring());
  CHECK(c.num_states == 0);
  CHECK(c.empty());
}

TEST_CASE("compose: symbol table mismatch is a configuration error") {
  WeightedFst a = two_symbol_tables_fst();
  a.add_state();
  a.set_start(0);
  WeightedFst b;
  b.isyms.add("different");
  b.add_state();
  b.set_start(0);
  CHECK_THROWS_AS(compose(a, b, log_ring()), ConfigError);
}

TEST_CASE("compose matches pairwise product of enumerated languages") {
  std::mt19937_64 rng(11);
  const Semiring ring = log_ring();
  for (int trial = 0; trial < 40; ++trial) {
    RandomFstSpec spec;
    spec.num_states = 5;
    spec.num_arcs = 8;
    spec.alphabet = 3;
    auto a = random_fst(rng, spec);
    auto b = random_fst(rng, spec);
    auto composed = compose(a, b, ring);

    auto la = enumerate_language(a, ring);
    auto lb = enumerate_language(b, ring);
    testutil::Language expect;
    for (const auto& [ka, wa] : la) {
      for (const auto& [kb, wb] : lb) {
        if (ka.second != kb.first) continue;  // a's output must match b's input
        auto key = std::make_pair(ka.first, kb.second);
        auto [it, fresh] = expect.emplace(key, ring.times(wa, wb));
        if (!fresh) it->second = ring.plus(it->second, ring.times(wa, wb));
      }
    }
    auto got = enumerate_language(composed, ring);
    CHECK(language_close(expect, got, 1e-9));
  }
}

TEST_CASE("compose handles epsilon output/input arcs without double counting") {
  // a: maps "a" to epsilon then "b" to "b"; b: consumes eps-free input with
  // an epsilon arc of its own in front.
  WeightedFst a = two_symbol_tables_fst();
  StateId a0 = a.add_state(), a1 = a.add_state(), a2 = a.add_state();
  a.set_start(a0);
  a.add_arc(a0, a1, 1, kEpsilon, std::log(0.5));
  a.add_arc(a1, a2, 2, 2, std::log(0.5));
  a.set_final(a2, 0.0);

  WeightedFst b = two_symbol_tables_fst();
  StateId b0 = b.add_state(), b1 = b.add_state(), b2 = b.add_state();
  b.set_start(b0);
  b.add_arc(b0, b1, kEpsilon, kEpsilon, std::log(0.5));
  b.add_arc(b1, b2, 2, 2, std::log(0.5));
  b.set_final(b2, 0.0);

  auto c = compose(a, b, log_ring());
  auto lang = enumerate_language(c, log_ring());
  REQUIRE(lang.size() == 1);
  auto key = std::make_pair(std::vector<Label>{1, 2}, std::vector<Label>{2});
  REQUIRE(lang.count(key) == 1);
  CHECK(lang.at(key) == doctest::Approx(std::log(0.0625)).epsilon(1e-12));
}

TEST_CASE("remove_epsilon conserves path weight on a linear chain") {
  WeightedFst f = two_symbol_tables_fst();
  StateId s0 = f.add_state(), s1 = f.add_state(), s2 = f.add_state(), s3 = f.add_state();
  f.set_start(s0);
  const double w1 = -0.3, w2 = -1.1, w3 = -0.7;
  f.add_arc(s0, s1, 1, 1, w1);
  f.add_arc(s1, s2, kEpsilon, kEpsilon, w2);
  f.add_arc(s2, s3, 2, 2, w3);
  f.set_final(s3, 0.0);
  auto g = remove_epsilon(f, log_ring());
  for (const Arc& a : g.arcs) CHECK((a.ilabel != kEpsilon || a.olabel != kEpsilon));
  auto lang = enumerate_language(connect(g), log_ring());
  REQUIRE(lang.size() == 1);
  CHECK(lang.begin()->second == doctest::Approx(w1 + w2 + w3).epsilon(1e-12));
}

TEST_CASE("remove_epsilon on epsilon-free input is the identity") {
  std::mt19937_64 rng(3);
  RandomFstSpec spec;
  auto f = random_fst(rng, spec);
  auto g = remove_epsilon(f, log_ring());
  CHECK(g.num_states == f.num_states);
  CHECK(g.start == f.start);
  CHECK(g.finals == f.finals);
  REQUIRE(g.arcs.size() == f.arcs.size());
  for (std::size_t i = 0; i < f.arcs.size(); ++i) {
    CHECK(g.arcs[i].src == f.arcs[i].src);
    CHECK(g.arcs[i].dst == f.arcs[i].dst);
    CHECK(g.arcs[i].weight == f.arcs[i].weight);
  }
}

TEST_CASE("remove_epsilon preserves total weight on random machines") {
  std::mt19937_64 rng(13);
  const Semiring ring = log_ring();
  for (int trial = 0; trial < 30; ++trial) {
    RandomFstSpec spec;
    spec.num_states = 8;
    spec.num_arcs = 16;
    spec.eps_prob = 0.3;
    auto f = random_fst(rng, spec);
    double before = total_weight(f, ring);
    auto g = remove_epsilon(f, ring);
    double after = total_weight(g, ring);
    if (before == kLogZero) {
      CHECK(after == kLogZero);
    } else {
      CHECK(after == doctest::Approx(before).epsilon(1e-10));
    }
  }
}

TEST_CASE("remove_epsilon rejects epsilon cycles") {
  WeightedFst f;
  StateId s0 = f.add_state(), s1 = f.add_state();
  f.set_start(s0);
  f.add_arc(s0, s1, kEpsilon, kEpsilon, -0.5);
  f.add_arc(s1, s0, kEpsilon, kEpsilon, -0.5);
  f.set_final(s1, 0.0);
  CHECK_THROWS_AS(remove_epsilon(f, log_ring()), UnsupportedInputError);
}

TEST_CASE("connect drops dangling states and is a fixpoint on trim machines") {
  WeightedFst f = two_symbol_tables_fst();
  StateId s0 = f.add_state(), s1 = f.add_state(), dead = f.add_state();
  f.set_start(s0);
  f.add_arc(s0, s1, 1, 1, -1.0);
  f.add_arc(s0, dead, 2, 2, -1.0);  // dead end
  f.set_final(s1, 0.0);
  auto g = connect(f);
  CHECK(g.num_states == 2);
  CHECK(g.arcs.size() == 1);
  auto h = connect(g);
  CHECK(h.num_states == g.num_states);
  CHECK(h.arcs.size() == g.arcs.size());
}

TEST_CASE("connect preserves the path set on random machines") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 30; ++trial) {
    RandomFstSpec spec;
    spec.num_states = 8;
    spec.num_arcs = 14;
    auto f = random_fst(rng, spec);
    auto g = connect(f);
    CHECK(language_close(enumerate_language(f, log_ring()),
                         enumerate_language(g, log_ring()), 1e-12));
  }
}

TEST_CASE("total_weight basics") {
  WeightedFst f = two_symbol_tables_fst();
  StateId s0 = f.add_state(), s1 = f.add_state();
  f.set_start(s0);
  f.add_arc(s0, s1, 1, 1, -1.0);
  f.add_arc(s0, s1, 2, 2, -1.5);
  f.set_final(s1, 0.0);

  SUBCASE("single path sums arc weights") {
    WeightedFst g = two_symbol_tables_fst();
    StateId t0 = g.add_state(), t1 = g.add_state(), t2 = g.add_state();
    g.set_start(t0);
    g.add_arc(t0, t1, 1, 1, -1.0);
    g.add_arc(t1, t2, 2, 2, -1.5);
    g.set_final(t2, 0.0);
    CHECK(total_weight(g, log_ring()) == doctest::Approx(-2.5).epsilon(1e-12));
  }
  SUBCASE("parallel probabilities sum to one") {
    WeightedFst g = two_symbol_tables_fst();
    StateId t0 = g.add_state(), t1 = g.add_state();
    g.set_start(t0);
    g.add_arc(t0, t1, 1, 1, std::log(0.3));
    g.add_arc(t0, t1, 2, 2, std::log(0.7));
    g.set_final(t1, 0.0);
    CHECK(total_weight(g, log_ring()) == doctest::Approx(0.0).epsilon(1e-12));
  }
  SUBCASE("tropical total is the best path weight") {
    CHECK(total_weight(f, tropical_ring()) == doctest::Approx(-1.0));
  }
  SUBCASE("cyclic input is rejected") {
    f.add_arc(s1, s0, 1, 1, -0.1);
    CHECK_THROWS_AS(total_weight(f, log_ring()), UnsupportedInputError);
  }
}

TEST_CASE("total_weight matches enumeration on random acyclic machines") {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 50; ++trial) {
    RandomFstSpec spec;
    spec.num_states = 8;
    spec.num_arcs = 16;
    auto f = random_fst(rng, spec);
    auto paths = enumerate_paths(f, 1000);
    REQUIRE_FALSE(paths.truncated);
    double expect = kLogZero;
    double best = kLogZero;
    for (const auto& p : paths.paths) {
      expect = log_add(expect, p.weight);
      best = std::max(best, p.weight);
    }
    double total = total_weight(f, log_ring());
    if (paths.paths.empty()) {
      CHECK(total == kLogZero);
    } else {
      CHECK(total == doctest::Approx(expect).epsilon(1e-9));
      // log total >= best path weight, equal iff a single complete path
      CHECK(total >= best - 1e-12);
      if (paths.paths.size() == 1) CHECK(total == doctest::Approx(best).epsilon(1e-12));
      CHECK(total_weight(f, tropical_ring()) == doctest::Approx(best).epsilon(1e-9));
    }
  }
}

TEST_CASE("forward_backward posteriors") {
  SUBCASE("single path carries posterior one on every arc") {
    WeightedFst f = two_symbol_tables_fst();
    StateId s0 = f.add_state(), s1 = f.add_state(), s2 = f.add_state();
    f.set_start(s0);
    f.add_arc(s0, s1, 1, 1, -0.2);
    f.add_arc(s1, s2, 2, 2, -0.9);
    f.set_final(s2, -0.1);
    auto post = forward_backward(f);
    for (double p : post.arc_posterior) CHECK(p == doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("disjoint parallel paths split posterior mass by probability") {
    WeightedFst f = two_symbol_tables_fst();
    StateId s0 = f.add_state(), s1 = f.add_state(), s2 = f.add_state(), s3 = f.add_state();
    f.set_start(s0);
    f.add_arc(s0, s1, 1, 1, std::log(0.8));
    f.add_arc(s0, s2, 2, 2, std::log(0.2));
    f.add_arc(s1, s3, 1, 1, 0.0);
    f.add_arc(s2, s3, 2, 2, 0.0);
    f.set_final(s3, 0.0);
    auto post = forward_backward(f);
    CHECK(post.arc_posterior[0] == doctest::Approx(0.8).epsilon(1e-12));
    CHECK(post.arc_posterior[1] == doctest::Approx(0.2).epsilon(1e-12));
    CHECK(post.arc_posterior[2] == doctest::Approx(0.8).epsilon(1e-12));
    CHECK(post.arc_posterior[3] == doctest::Approx(0.2).epsilon(1e-12));
  }
  SUBCASE("no complete path is a degenerate graph") {
    WeightedFst f = two_symbol_tables_fst();
    StateId s0 = f.add_state(), s1 = f.add_state();
    f.set_start(s0);
    f.add_arc(s0, s1, 1, 1, -0.2);
    CHECK_THROWS_AS(forward_backward(f), DegenerateGraphError);
  }
}

TEST_CASE("forward_backward posterior equals enumerated through-arc mass") {
  std::mt19937_64 rng(29);
  for (int trial = 0; trial < 30; ++trial) {
    RandomFstSpec spec;
    spec.num_states = 7;
    spec.num_arcs = 14;
    auto f = connect(random_fst(rng, spec));
    if (f.empty()) continue;
    auto paths = enumerate_paths(f, 2000);
    REQUIRE_FALSE(paths.truncated);
    if (paths.paths.empty()) continue;
    double total = kLogZero;
    for (const auto& p : paths.paths) total = log_add(total, p.weight);
    std::vector<double> through(f.arcs.size(), kLogZero);
    for (const auto& p : paths.paths)
      for (std::int32_t ai : p.arc_ids)
        through[static_cast<std::size_t>(ai)] =
            log_add(through[static_cast<std::size_t>(ai)], p.weight);
    auto post = forward_backward(f);
    CHECK(post.total == doctest::Approx(total).epsilon(1e-9));
    for (std::size_t i = 0; i < f.arcs.size(); ++i) {
      double expect = through[i] == kLogZero ? 0.0 : std::exp(through[i] - total);
      CHECK(post.arc_posterior[i] == doctest::Approx(expect).epsilon(1e-9));
    }
  }
}

TEST_CASE("shortest_path picks the cheaper path and breaks ties by arc index") {
  WeightedFst f = two_symbol_tables_fst();
  StateId s0 = f.add_state(), s1 = f.add_state();
  f.set_start(s0);
  f.add_arc(s0, s1, 1, 1, -3.0);  // cost 3
  f.add_arc(s0, s1, 2, 2, -5.0);  // cost 5
  f.set_final(s1, 0.0);
  auto p = shortest_path(f);
  CHECK(p.arc_ids == std::vector<std::int32_t>{0});
  CHECK(p.weight == doctest::Approx(-3.0));

  SUBCASE("equal costs resolve to the lexicographically smaller arc sequence") {
    WeightedFst g = two_symbol_tables_fst();
    StateId t0 = g.add_state(), t1 = g.add_state(), t2 = g.add_state();
    g.set_start(t0);
    g.add_arc(t0, t1, 1, 1, -1.0);  // arc 0
    g.add_arc(t0, t2, 2, 2, -1.5);  // arc 1: path {1} cost 1.5
    g.add_arc(t1, t2, 1, 1, -0.5);  // arc 2: path {0,2} cost 1.5 too
    g.set_final(t2, -1.0);
    auto q = shortest_path(g);
    CHECK(q.arc_ids == std::vector<std::int32_t>{0, 2});
  }
  SUBCASE("no complete path throws") {
    WeightedFst g = two_symbol_tables_fst();
    g.add_state();
    g.set_start(0);
    CHECK_THROWS_AS(shortest_path(g), DegenerateGraphError);
  }
}

TEST_CASE("shortest_path matches enumeration on random machines") {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 50; ++trial) {
    RandomFstSpec spec;
    spec.num_states = 8;
    spec.num_arcs = 14;
    auto f = random_fst(rng, spec);
    auto paths = enumerate_paths(f, 2000);
    if (paths.paths.empty()) {
      CHECK_THROWS_AS(shortest_path(f), DegenerateGraphError);
      continue;
    }
    double best = kLogZero;
    for (const auto& p : paths.paths) best = std::max(best, p.weight);
    CHECK(shortest_path(f).weight == doctest::Approx(best).epsilon(1e-9));
  }
}

TEST_CASE("prune basics") {
  WeightedFst f = two_symbol_tables_fst();
  StateId s0 = f.add_state(), s1 = f.add_state();
  f.set_start(s0);
  f.add_arc(s0, s1, 1, 1, -1.0);
  f.add_arc(s0, s1, 2, 2, -5.0);
  f.set_final(s1, 0.0);
  SUBCASE("infinite beam keeps the path set") {
    auto g = prune(f, std::numeric_limits<double>::infinity());
    CHECK(language_close(enumerate_language(f, log_ring()),
                         enumerate_language(g, log_ring()), 1e-12));
  }
  SUBCASE("beam 2 keeps only the near-best path") {
    auto g = prune(f, 2.0);
    auto lang = enumerate_language(g, log_ring());
    REQUIRE(lang.size() == 1);
    CHECK(lang.begin()->first.first == std::vector<Label>{1});
  }
}

TEST_CASE("prune keeps exactly the arcs on some within-beam path") {
  std::mt19937_64 rng(37);
  const double beam = 3.0;
  for (int trial = 0; trial < 40; ++trial) {
    RandomFstSpec spec;
    spec.num_states = 8;
    spec.num_arcs = 14;
    auto f = random_fst(rng, spec);
    auto paths = enumerate_paths(f, 2000);
    if (paths.paths.empty()) {
      CHECK(prune(f, beam).empty());
      continue;
    }
    double best = kLogZero;
    for (const auto& p : paths.paths) best = std::max(best, p.weight);
    // The contract is about arcs: an arc survives iff some complete path
    // within the beam crosses it.
    std::set<std::int32_t> expect_arcs;
    std::multiset<double> expect_within;
    for (const auto& p : paths.paths) {
      if (p.weight < best - beam - 1e-12) continue;
      expect_within.insert(p.weight);
      for (std::int32_t ai : p.arc_ids) expect_arcs.insert(ai);
    }
    auto pruned = prune(f, beam);
    CHECK(pruned.arcs.size() == expect_arcs.size());
    // Every within-beam path survives pruning with its weight intact.
    auto got_paths = enumerate_paths(pruned, 4000);
    std::multiset<double> got_within;
    for (const auto& p : got_paths.paths)
      if (p.weight >= best - beam - 1e-12) got_within.insert(p.weight);
    REQUIRE(got_within.size() == expect_within.size());
    auto ie = expect_within.begin();
    for (auto ig = got_within.begin(); ig != got_within.end(); ++ig, ++ie)
      CHECK(*ig == doctest::Approx(*ie).epsilon(1e-9));
  }
}

TEST_CASE("enumerate_paths counts") {
  SUBCASE("empty machine yields no paths") {
    WeightedFst f;
    CHECK(enumerate_paths(f, 10).paths.empty());
  }
  SUBCASE("diamond has exactly two paths") {
    WeightedFst f = two_symbol_tables_fst();
    StateId s0 = f.add_state(), s1 = f.add_state(), s2 = f.add_state(), s3 = f.add_state();
    f.set_start(s0);
    f.add_arc(s0, s1, 1, 1, 0.0);
    f.add_arc(s0, s2, 2, 2, 0.0);
    f.add_arc(s1, s3, 1, 1, 0.0);
    f.add_arc(s2, s3, 2, 2, 0.0);
    f.set_final(s3, 0.0);
    CHECK(enumerate_paths(f, 10).paths.size() == 2);
  }
  SUBCASE("k binary choices yield 2^k paths") {
    for (int k = 1; k <= 10; ++k) {
      WeightedFst f = two_symbol_tables_fst();
      StateId prev = f.add_state();
      f.set_start(prev);
      for (int i = 0; i < k; ++i) {
        StateId next = f.add_state();
        f.add_arc(prev, next, 1, 1, 0.0);
        f.add_arc(prev, next, 2, 2, 0.0);
        prev = next;
      }
      f.set_final(prev, 0.0);
      auto ps = enumerate_paths(f, 1 << 12);
      CHECK(ps.paths.size() == (1u << k));
      CHECK_FALSE(ps.truncated);
    }
  }
  SUBCASE("limit sets the truncation flag") {
    WeightedFst f = two_symbol_tables_fst();
    StateId s0 = f.add_state(), s1 = f.add_state();
    f.set_start(s0);
    f.add_arc(s0, s1, 1, 1, 0.0);
    f.add_arc(s0, s1, 2, 2, 0.0);
    f.set_final(s1, 0.0);
    auto ps = enumerate_paths(f, 1);
    CHECK(ps.paths.size() == 1);
    CHECK(ps.truncated);
  }
}

TEST_CASE("merge_duplicate_arcs plus-aggregates parallel arcs") {
  WeightedFst f = two_symbol_tables_fst();
  StateId s0 = f.add_state(), s1 = f.add_state();
  f.set_start(s0);
  f.add_arc(s0, s1, 1, 1, std::log(0.25));
  f.add_arc(s0, s1, 1, 1, std::log(0.25));
  f.set_final(s1, 0.0);
  auto g = merge_duplicate_arcs(f, log_ring());
  REQUIRE(g.arcs.size() == 1);
  CHECK(g.arcs[0].weight == doctest::Approx(std::log(0.5)).epsilon(1e-12));
  CHECK(total_weight(g, log_ring()) == doctest::Approx(total_weight(f, log_ring())).epsilon(1e-12));
}

TEST_CASE("text fst round-trips byte-exactly") {
  std::mt19937_64 rng(41);
  for (int trial = 0; trial < 20; ++trial) {
    RandomFstSpec spec;
    spec.num_states = 6;
    spec.num_arcs = 12;
    auto f = connect(random_fst(rng, spec));
    if (f.empty()) continue;
    auto text = write_fst_text(f);
    auto g = read_fst_text(text, f.isyms, f.osyms);
    CHECK(write_fst_text(g) == text);
    // 9 significant digits quantize weights; compare accordingly.
    CHECK(language_close(enumerate_language(f, log_ring()),
                         enumerate_language(g, log_ring()), 1e-6));
  }
}

TEST_CASE("symbol table round-trip keeps ids") {
  SymbolTable t;
  t.add("sil");
  t.add("p01");
  auto text = write_symbols_text(t);
  auto u = read_symbols_text(text);
  CHECK(u == t);
  CHECK(write_symbols_text(u) == text);
  CHECK(u.find("p01") == 2);
  CHECK_THROWS_AS(read_symbols_text("foo\t0\n"), ParseError);
}
