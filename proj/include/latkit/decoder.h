// latkit/decoder.h
// Frame-synchronous Viterbi beam search over a decoding graph, producing
// word lattices with time alignment and separable acoustic/graph scores;
// 1-best extraction, posterior confidence, n-gram rescoring, RTF measurement.

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

#ifndef LATKIT_DECODER_H_
#define LATKIT_DECODER_H_

#include <string>
#include <vector>

#include "latkit/common.h"
#include "latkit/fst.h"
#include "latkit/lexicon.h"
#include "latkit/ngram.h"
#include "latkit/tdnn.h"

namespace latkit {
namespace decoder {

// An utterance produced no complete hypothesis (beam too tight or graph
// mismatch); callers skip the utterance and count the failure.
class DecodeFailureError : public Error {
 public:
  using Error::Error;
};

struct LatticeArc {
  fst::StateId src = fst::kNoState;
  fst::StateId dst = fst::kNoState;
  fst::Label word = fst::kEpsilon;  // epsilon for silence / lead-in regions
  double acoustic_cost = 0.0;
  double lm_cost = 0.0;  // graph-side cost (lexicon + LM)
  int start_frame = 0;
  int end_frame = 0;
};

// Acyclic, time-monotone word hypothesis graph; every complete path spans
// frame 0..num_frames.  State 0 is the start.
struct Lattice {
  std::string utt_id;
  int num_frames = 0;
  double sec_per_frame = 0.03;
  fst::StateId num_states = 0;
  std::vector<LatticeArc> arcs;
  std::vector<double> final_costs;  // +inf when not final
  fst::SymbolTable words;

  bool is_final(fst::StateId s) const {
    return final_costs[static_cast<std::size_t>(s)] !=
           std::numeric_limits<double>::infinity();
  }
  // Weighted acceptor over words with arc weight -(acoustic + lm cost).
  fst::WeightedFst to_fst() const;
};

struct DecodeOptions {
  double beam = 16.0;
  double lattice_beam = 8.0;
  double acoustic_scale = 1.0;  // 0.1 conventional for word-lattice decoding
  double audio_seconds = 0.0;   // 0 = derive from frames * sec_per_frame
  double sec_per_frame = 0.03;
  enum class ConfidenceRule { kMinPosterior, kMeanPosterior };
  ConfidenceRule confidence_rule = ConfidenceRule::kMinPosterior;
};

struct DecodeResult {
  Lattice lattice;
  std::vector<fst::Label> transcript;
  double best_cost = 0.0;
  double confidence = 0.0;
  double audio_seconds = 0.0;
  double wall_seconds = 0.0;
  double rtf = 0.0;
};

// Pure-beam Viterbi search (no histogram pruning) with token recombination at
// (graph state, frame); the emitted lattice keeps all hypotheses within
// lattice_beam of the best and cuts arcs at word emissions and silence
// onsets so arc spans tile the timeline.
DecodeResult decode(const am::AcousticModel& model, const lex::DecodingGraph& graph,
                    const Matrix& features, const std::string& utt_id,
                    const DecodeOptions& opts);

struct BestPath {
  std::vector<fst::Label> words;
  double cost = 0.0;  // combined acoustic + lm, final included
};
BestPath best_path(const Lattice& lattice);

// Min (or mean) posterior of the best path's word arcs under the combined
// log-ring forward-backward; a wordless best path scores 0.
double confidence(const Lattice& lattice,
                  DecodeOptions::ConfidenceRule rule = DecodeOptions::ConfidenceRule::kMinPosterior);

// Replaces every arc's lm cost with the strong LM's cost in lattice-path
// context (deterministic longest-match backoff; epsilon arcs cost nothing,
// finals get the end-of-sentence cost).  Acoustic costs are preserved.
Lattice rescore(const Lattice& lattice, const lm::NgramModel& strong_lm, double scale);

struct UtteranceTiming {
  std::string utt_id;
  double audio_seconds = 0.0;
  double wall_seconds = 0.0;
};

struct RtfReport {
  std::vector<UtteranceTiming> utterances;  // in input order
  double total_audio_seconds = 0.0;
  double total_wall_seconds = 0.0;
  double aggregate_rtf = 0.0;  // total wall / total audio
};
RtfReport measure_rtf(const std::vector<UtteranceTiming>& timings);

// Archive of lattices: `LATTICE <utt> <frames> <sec_per_frame>` header, arc
// lines `src dst word word ac,lm,start,end`, final lines `state cost`, blank
// separator.  State 0 is the start.
std::string write_lattice(const Lattice& lattice);
std::string write_lattice_archive(const std::vector<Lattice>& lattices);
std::vector<Lattice> read_lattice_archive(const std::string& text,
                                          const fst::SymbolTable& words);

}  // namespace decoder
}  // namespace latkit

#endif  // LATKIT_DECODER_H_
