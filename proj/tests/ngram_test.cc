// tests/ngram_test.cc

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

#include "latkit/ngram.h"

#include <cmath>
#include <map>
#include <random>
#include <set>

#include "doctest.h"
#include "latkit/common.h"
#include "latkit/fst.h"
#include "test_util.h"
#include "reference_kn.h"

using namespace latkit;
using namespace latkit::lm;

namespace {

Corpus make_corpus(std::initializer_list<const char*> lines) {
  Corpus c;
  for (const char* l : lines) c.sentences.push_back(split_ws(l));
  return c;
}

// Sum of modeled probabilities over the predicted event space (every vocab
// token except <eps>, plus </s>).
double context_mass(const NgramModel& m, const std::vector<TokenId>& ctx) {
  double sum = 0.0;
  for (TokenId id = 1; id < static_cast<TokenId>(m.vocab().size()); ++id)
    sum += std::exp(m.logprob(ctx, id));
  sum += std::exp(m.logprob(ctx, kEos));
  return sum;
}

}  // namespace

TEST_CASE("maximum-likelihood unigram ratios (add-k with k=0)") {
  auto corpus = make_corpus({"a a b"});
  TrainOptions opts;
  opts.order = 1;
  opts.smoothing = Smoothing::kAddK;
  opts.add_k = 0.0;
  auto m = train_ngram(corpus, opts);
  double pa = std::exp(m.logprob({}, m.token_id("a")));
  double pb = std::exp(m.logprob({}, m.token_id("b")));
  // Excluding markers: a and b split the non-marker mass 2:1.
  CHECK(pa / (pa + pb) == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  CHECK(pb / (pa + pb) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
  CHECK(pa == doctest::Approx(2.0 / 4.0).epsilon(1e-12));  // </s> takes 1 of 4 events
}

TEST_CASE("model normalization over random contexts") {
  auto corpus = make_corpus({
      "the cat sat on the mat",
      "the dog sat on the log",
      "a cat and a dog",
      "the mat and the log",
      "a dog sat",
  });
  std::mt19937_64 rng(5);
  for (auto smoothing : {Smoothing::kKneserNey, Smoothing::kAddK}) {
    for (int order : {1, 2, 3}) {
      TrainOptions opts;
      opts.order = order;
      opts.smoothing = smoothing;
      auto m = train_ngram(corpus, opts);
      std::uniform_int_distribution<int> pick(1, static_cast<int>(m.vocab().size()) - 1);
      for (int trial = 0; trial < 100; ++trial) {
        std::vector<TokenId> ctx;
        int len = trial % order;
        if (trial % 7 == 0) ctx.push_back(kBos);
        for (int i = 0; i < len; ++i) ctx.push_back(pick(rng));
        CHECK(context_mass(m, ctx) == doctest::Approx(1.0).epsilon(1e-6));
      }
    }
  }
}

TEST_CASE("interpolated KN matches the reference oracle on a 5-sentence corpus") {
  // Kept in lockstep with the acceptance suite's criterion; the oracle in
  // reference_kn.h computes every probability straight from the formulas.
  auto corpus = make_corpus({
      "alpha bravo charlie",
      "alpha bravo delta echo",
      "bravo charlie delta delta",
      "delta alpha bravo",
      "charlie alpha bravo charlie",
  });
  TrainOptions opts;
  opts.order = 2;
  auto m = train_ngram(corpus, opts);
  auto ref = testutil::reference_kn_bigram(corpus.sentences);

  REQUIRE_FALSE(ref.used_fallback);
  for (const auto& [gram, p] : ref.unigram_prob) {
    TokenId id = m.token_id(gram);
    double got = std::exp(m.logprob({}, id));
    CHECK(got == doctest::Approx(p).epsilon(1e-9));
  }
  for (const auto& [key, p] : ref.bigram_prob) {
    std::vector<TokenId> ctx{m.token_id(key.first)};
    TokenId w = key.second == "</s>" ? kEos : m.token_id(key.second);
    double got = std::exp(m.logprob(ctx, w));
    CHECK(got == doctest::Approx(p).epsilon(1e-9));
  }
  for (const auto& [ctx_tok, bow] : ref.backoff) {
    const auto& uni = m.table(1);
    Gram g{m.token_id(ctx_tok)};
    auto it = uni.find(g);
    REQUIRE(it != uni.end());
    REQUIRE(it->second.has_bow);
    CHECK(std::exp(it->second.bow) == doctest::Approx(bow).epsilon(1e-9));
  }
}

TEST_CASE("perplexity basics") {
  SUBCASE("uniform model over V events gives perplexity V") {
    // Hand-built: 7 words plus </s>, each probability 1/8.
    fst::SymbolTable vocab;
    vocab.add(kUnkSymbol);
    for (int i = 0; i < 6; ++i) vocab.add("w" + std::to_string(i));
    NgramModel::Table uni;
    for (TokenId id = 1; id <= 7; ++id) uni[Gram{id}].logp = std::log(1.0 / 8.0);
    uni[Gram{kEos}].logp = std::log(1.0 / 8.0);
    uni[Gram{kBos}].logp = -99 * std::log(10.0);
    NgramModel m(1, vocab, {uni});
    CHECK(perplexity(m, {"w0", "w3", "w5"}) == doctest::Approx(8.0).epsilon(1e-12));
    CHECK(perplexity(m, {"w1"}) == doctest::Approx(8.0).epsilon(1e-12));
  }
  SUBCASE("MLE unigram perplexity of the training sentence by hand") {
    auto corpus = make_corpus({"a a b"});
    TrainOptions opts;
    opts.order = 1;
    opts.smoothing = Smoothing::kAddK;
    opts.add_k = 0.0;
    auto m = train_ngram(corpus, opts);
    // p(a)=2/4, p(b)=1/4, p(</s>)=1/4; N = 4.
    double expect = std::exp(-(std::log(0.5) + std::log(0.5) + std::log(0.25) +
                               std::log(0.25)) / 4.0);
    CHECK(perplexity(m, {"a", "a", "b"}) == doctest::Approx(expect).epsilon(1e-12));
  }
  SUBCASE("deterministic model has perplexity 1") {
    fst::SymbolTable vocab;
    vocab.add(kUnkSymbol);
    TokenId a = vocab.add("a");
    NgramModel::Table uni;
    uni[Gram{a}].logp = 0.0;       // p(a) = 1 everywhere
    uni[Gram{kEos}].logp = 0.0;    // and the sentence always ends
    uni[Gram{kBos}].logp = -99 * std::log(10.0);
    // Not normalized as a distribution; exercises the formula only.
    NgramModel m(1, vocab, {uni});
    CHECK(perplexity(m, {"a", "a", "a"}) == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("training a sentence into the corpus never raises its perplexity") {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 20; ++trial) {
    std::uniform_int_distribution<int> vocab_size(3, 6), sent_len(2, 7), corpus_size(4, 12);
    int v = vocab_size(rng);
    auto word = [&](int i) { return "w" + std::to_string(i); };
    std::uniform_int_distribution<int> pick(0, v - 1);
    Corpus corpus;
    int n = corpus_size(rng);
    for (int i = 0; i < n; ++i) {
      std::vector<std::string> s;
      int len = sent_len(rng);
      for (int j = 0; j < len; ++j) s.push_back(word(pick(rng)));
      corpus.sentences.push_back(s);
    }
    std::vector<std::string> probe;
    int len = sent_len(rng);
    for (int j = 0; j < len; ++j) probe.push_back(word(pick(rng)));

    TrainOptions opts;
    opts.order = 2;
    auto before = train_ngram(corpus, opts);
    Corpus grown = corpus;
    grown.sentences.push_back(probe);
    auto after = train_ngram(grown, opts);
    CHECK(perplexity(after, probe) <= perplexity(before, probe) + 1e-9);
  }
}

TEST_CASE("compile_grammar topology and scores") {
  SUBCASE("unigram model compiles to a single looping state") {
    auto corpus = make_corpus({"a b", "b a"});
    TrainOptions opts;
    opts.order = 1;
    auto m = train_ngram(corpus, opts);
    auto g = compile_grammar(m);
    CHECK(g.num_states == 1);
    CHECK(g.is_final(0));
    // one arc per predicted vocabulary word (a, b, <unk>), all self-loops
    CHECK(g.arcs.size() == m.vocab().size() - 1);
    for (const auto& a : g.arcs) {
      CHECK(a.src == 0);
      CHECK(a.dst == 0);
    }
  }
  SUBCASE("explicit-ngram sentences score identically through the acceptor") {
    auto corpus = make_corpus({
        "a b c",
        "a b a",
        "c a b",
        "b c a",
        "a c b",
        "c b a",
        "b a c",
        "a b c",
    });
    TrainOptions opts;
    opts.order = 2;
    auto m = train_ngram(corpus, opts);
    auto g = compile_grammar(m);
    // Exhaustive over sentences of length <= 5 on vocabulary {a, b, c} whose
    // scoring bigrams (with markers) are all explicit.
    std::vector<std::string> vocab{"a", "b", "c"};
    std::vector<std::vector<std::string>> worklist{{}};
    int checked = 0;
    for (int len = 1; len <= 5; ++len) {
      std::vector<std::vector<std::string>> next;
      for (const auto& prefix : worklist)
        for (const auto& w : vocab) {
          auto s = prefix;
          s.push_back(w);
          next.push_back(s);
        }
      worklist = next;
      for (const auto& s : worklist) {
        bool explicit_all = true;
        const auto& bi = m.table(2);
        std::vector<TokenId> ids{kBos};
        for (const auto& w : s) ids.push_back(m.token_id(w));
        ids.push_back(kEos);
        for (std::size_t i = 0; i + 1 < ids.size(); ++i)
          if (!bi.count(Gram{ids[i], ids[i + 1]})) explicit_all = false;
        if (!explicit_all) continue;
        ++checked;
        std::vector<fst::Label> labels;
        for (const auto& w : s) labels.push_back(g.isyms.find(w));
        auto chain = testutil::chain_acceptor(labels, g.isyms);
        auto composed = fst::compose(chain, g, fst::tropical_ring());
        REQUIRE_FALSE(composed.empty());
        auto best = fst::shortest_path(composed);
        CHECK(best.weight == doctest::Approx(m.sentence_logprob(s)).epsilon(1e-9));
      }
    }
    CHECK(checked > 10);
  }
  SUBCASE("backoff sentence scores match on a constructed 3-word model") {
    auto corpus = make_corpus({"x y", "y z", "z x", "x y", "y z"});
    TrainOptions opts;
    opts.order = 2;
    auto m = train_ngram(corpus, opts);
    auto g = compile_grammar(m);
    // "x z" needs the backoff path for the bigram (x, z).
    std::vector<std::string> s{"x", "z"};
    std::vector<fst::Label> labels{g.isyms.find("x"), g.isyms.find("z")};
    auto composed = fst::compose(testutil::chain_acceptor(labels, g.isyms), g,
                                 fst::tropical_ring());
    auto best = fst::shortest_path(composed);
    CHECK(best.weight == doctest::Approx(m.sentence_logprob(s)).epsilon(1e-9));
  }
}

TEST_CASE("arpa round-trip is stable and preserves scores") {
  auto corpus = make_corpus({
      "the cat sat on the mat",
      "the dog sat on the log",
      "a cat and a dog",
  });
  TrainOptions opts;
  opts.order = 3;
  auto m = train_ngram(corpus, opts);
  auto text = write_arpa(m);
  auto m2 = read_arpa(text);
  CHECK(write_arpa(m2) == text);
  for (const auto& s : corpus.sentences)
    CHECK(m2.sentence_logprob(s) == doctest::Approx(m.sentence_logprob(s)).epsilon(1e-7));
  CHECK(perplexity(m2, {"the", "zebra"}) > 1.0);  // unknown maps to <unk>
}

TEST_CASE("empty corpus is a configuration error") {
  CHECK_THROWS_AS(train_ngram(Corpus{}, TrainOptions{}), ConfigError);
}
