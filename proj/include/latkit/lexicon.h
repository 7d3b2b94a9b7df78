// latkit/lexicon.h
// Pronunciation lexicon with pronunciation probabilities and word-boundary
// optional-silence probabilities; compiles the lexicon transducer and the
// composed decoding graph.

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

#ifndef LATKIT_LEXICON_H_
#define LATKIT_LEXICON_H_

#include <map>
#include <string>
#include <vector>

#include "latkit/alignment.h"
#include "latkit/fst.h"

namespace latkit {
namespace lex {

inline const char* kSilenceSymbol = "sil";

struct Pronunciation {
  std::vector<fst::Label> phones;
  double prob = 1.0;
};

struct Lexicon {
  fst::SymbolTable words;   // <eps>, <unk>, then words in file order
  fst::SymbolTable phones;  // <eps>, sil, then phones in file order
  fst::Label silence = 1;
  double silence_prob = 0.1;  // word-boundary optional-silence probability
  std::map<fst::Label, std::vector<Pronunciation>> entries;
  // Per-word probability of silence following the word; falls back to
  // silence_prob when a word has no estimate.
  std::map<fst::Label, double> word_silence_prob;

  double silence_after(fst::Label word) const {
    auto it = word_silence_prob.find(word);
    return it == word_silence_prob.end() ? silence_prob : it->second;
  }
  // Number of emitting labels (sil + phones); acoustic models emit one score
  // per pdf, pdf = phone label - 1.
  int num_pdfs() const { return static_cast<int>(phones.size()) - 1; }
  // Highest-probability pronunciation (first on ties).
  const Pronunciation& best_pron(fst::Label word) const;
};

// Text format: `word prob phone1 phone2 ...` with the probability column
// optional (all-or-none per word).  Missing probabilities default to uniform;
// present ones renormalize to sum 1 with a warning when they do not already.
Lexicon load_lexicon(const std::string& text, double silence_prob = 0.1,
                     const fst::SymbolTable* phone_table = nullptr);
Lexicon load_lexicon_file(const std::string& path, double silence_prob = 0.1,
                          const fst::SymbolTable* phone_table = nullptr);
std::string write_lexicon(const Lexicon& lexicon);

// Smoothed relative-frequency re-estimation from phone-aligned utterances:
// pron prob = (count + 1) / (total + #prons); per-word silence probability =
// (silence-after count + 1) / (word count + 2).  Unaligned words keep their
// prior values.
Lexicon estimate_pron_probs(const Lexicon& lexicon,
                            const std::vector<UtteranceAlignment>& alignments);

// Phone-to-word transducer: per-pronunciation chains costed -ln(pron prob),
// optional silence at the utterance start and after every word costed
// -ln(p_sil) / -ln(1 - p_sil).  Homophones get auxiliary input symbols
// (appended to a copy of the phone table) that composition later strips.
fst::WeightedFst compile_L(const Lexicon& lexicon);

struct DecodingGraph {
  fst::WeightedFst graph;
  std::map<std::string, std::string> metadata;  // state_count, arc_count, ...
};

// compose(L, G) -> strip auxiliary symbols -> remove epsilons -> connect ->
// merge duplicate arcs; the result is epsilon-free on the input side.
DecodingGraph build_decoding_graph(const fst::WeightedFst& l, const fst::WeightedFst& g);

std::string write_graph_metadata(const DecodingGraph& graph);

}  // namespace lex
}  // namespace latkit

#endif  // LATKIT_LEXICON_H_
