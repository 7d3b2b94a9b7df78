// latkit/ngram.h
// Back-off n-gram language model estimation (interpolated Kneser-Ney with a
// single discount per order, add-k fallback), perplexity, ARPA text io, and
// compilation to a weighted grammar acceptor.

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

#ifndef LATKIT_NGRAM_H_
#define LATKIT_NGRAM_H_

#include <map>
#include <span>
#include <string>
#include <vector>

#include "latkit/fst.h"

namespace latkit {
namespace lm {

using TokenId = std::int32_t;

// Sentence markers are implicit: they never enter the symbol table or the
// compiled acceptor's alphabet.
inline constexpr TokenId kBos = -1;
inline constexpr TokenId kEos = -2;

inline const char* kUnkSymbol = "<unk>";
inline const char* kBosSymbol = "<s>";
inline const char* kEosSymbol = "</s>";

struct Corpus {
  std::vector<std::vector<std::string>> sentences;
};

// One sentence per line, whitespace-tokenized.  Empty lines are rejected
// only if the whole corpus ends up empty.
Corpus read_corpus_text(const std::string& text);
Corpus read_corpus_file(const std::string& path);

enum class Smoothing { kKneserNey, kAddK };

struct TrainOptions {
  int order = 3;
  Smoothing smoothing = Smoothing::kKneserNey;
  double add_k = 0.5;
  // Optional external vocabulary (must contain <unk>); tokens outside it map
  // to <unk>.  When null the vocabulary is built from the corpus in
  // first-appearance order with <unk> at id 1.
  const fst::SymbolTable* vocab = nullptr;
};

using Gram = std::vector<TokenId>;

class NgramModel {
 public:
  struct Entry {
    double logp = 0.0;     // natural log probability
    double bow = 0.0;      // natural log backoff weight
    bool has_bow = false;
  };
  using Table = std::map<Gram, Entry>;

  NgramModel() = default;
  NgramModel(int order, fst::SymbolTable vocab, std::vector<Table> tables);

  int order() const { return order_; }
  const fst::SymbolTable& vocab() const { return vocab_; }
  TokenId unk_id() const { return unk_id_; }
  const Table& table(int k) const;  // k in 1..order

  // Natural-log probability of `token` given the most-recent-last history.
  // History longer than order-1 is truncated; unseen grams back off.
  double logprob(std::span<const TokenId> context, TokenId token) const;

  // Maps a surface token to its id (<unk> when absent).  Markers by name.
  TokenId token_id(const std::string& token) const;

  // Log probability of a whole sentence including the end-of-sentence event.
  double sentence_logprob(const std::vector<std::string>& tokens) const;

 private:
  int order_ = 0;
  fst::SymbolTable vocab_;
  TokenId unk_id_ = fst::kNoState;
  std::vector<Table> tables_;
};

// Interpolated Kneser-Ney with fixed discount D = n1/(n1 + 2 n2) per order
// (counts-of-counts over the counts used at that order); an order with
// n1 == 0 or n2 == 0 falls back to add-k smoothing.
NgramModel train_ngram(const Corpus& corpus, const TrainOptions& opts);

// exp(-(1/N) sum ln p), N = token count + 1 (end-of-sentence included).
double perplexity(const NgramModel& model, const std::vector<std::string>& sentence);

// Standard back-off topology: one state per observed context, word arcs with
// weight ln p, epsilon back-off arcs with weight ln(backoff); acceptor over
// the model's vocabulary with implicit sentence markers (start state encodes
// the begin context, final weights the end probability).
fst::WeightedFst compile_grammar(const NgramModel& model);

std::string write_arpa(const NgramModel& model);
void write_arpa_file(const NgramModel& model, const std::string& path);
NgramModel read_arpa(const std::string& text);
NgramModel read_arpa_file(const std::string& path);

}  // namespace lm
}  // namespace latkit

#endif  // LATKIT_NGRAM_H_
