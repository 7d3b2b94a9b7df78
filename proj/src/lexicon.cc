// latkit/lexicon.cc

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

#include "latkit/lexicon.h"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <sstream>

#include "latkit/common.h"
#include "latkit/fst_io.h"
#include "latkit/ngram.h"

namespace latkit {
namespace lex {

namespace {

bool looks_like_prob(const std::string& tok) {
  if (tok.find('.') == std::string::npos && tok.find('e') == std::string::npos &&
      tok.find('E') == std::string::npos)
    return false;
  try {
    std::size_t pos = 0;
    (void)std::stod(tok, &pos);
    return pos == tok.size();
  } catch (const std::exception&) {
    return false;
  }
}

}  // namespace

const Pronunciation& Lexicon::best_pron(fst::Label word) const {
  auto it = entries.find(word);
  if (it == entries.end() || it->second.empty())
    throw ContractError("lexicon has no pronunciation for word id " + std::to_string(word));
  const Pronunciation* best = &it->second.front();
  for (const auto& p : it->second)
    if (p.prob > best->prob) best = &p;
  return *best;
}

Lexicon load_lexicon(const std::string& text, double silence_prob,
                     const fst::SymbolTable* phone_table) {
  if (silence_prob < 0.0 || silence_prob >= 1.0)
    throw ConfigError("silence probability must be in [0, 1)");
  Lexicon lex;
  lex.silence_prob = silence_prob;
  lex.words.add(lm::kUnkSymbol);
  if (phone_table != nullptr) {
    lex.phones = *phone_table;
    lex.silence = lex.phones.find(kSilenceSymbol);
    if (lex.silence == fst::kNoState)
      throw ConfigError("phone table must contain '" + std::string(kSilenceSymbol) + "'");
  } else {
    lex.silence = lex.phones.add(kSilenceSymbol);
  }

  struct RawEntry {
    fst::Label word;
    bool has_prob;
    double prob;
    std::vector<fst::Label> phones;
  };
  std::vector<RawEntry> raws;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto toks = split_ws(line);
    if (toks.empty()) continue;
    if (toks.size() < 2)
      throw ParseError("lexicon line " + std::to_string(lineno) + ": word needs phones");
    RawEntry raw;
    raw.word = lex.words.add(toks[0]);
    std::size_t phone_start = 1;
    raw.has_prob = looks_like_prob(toks[1]);
    raw.prob = 1.0;
    if (raw.has_prob) {
      raw.prob = std::stod(toks[1]);
      if (raw.prob <= 0.0 || raw.prob > 1.0)
        throw ParseError("lexicon line " + std::to_string(lineno) +
                         ": pronunciation probability must be in (0, 1]");
      phone_start = 2;
    }
    if (toks.size() <= phone_start)
      throw ParseError("lexicon line " + std::to_string(lineno) + ": missing phones");
    for (std::size_t i = phone_start; i < toks.size(); ++i) {
      if (toks[i] == kSilenceSymbol)
        throw ParseError("lexicon line " + std::to_string(lineno) +
                         ": phone name 'sil' is reserved");
      if (phone_table != nullptr) {
        fst::Label p = lex.phones.find(toks[i]);
        if (p == fst::kNoState)
          throw ParseError("lexicon line " + std::to_string(lineno) + ": unknown phone '" +
                           toks[i] + "'");
        raw.phones.push_back(p);
      } else {
        raw.phones.push_back(lex.phones.add(toks[i]));
      }
    }
    raws.push_back(std::move(raw));
  }
  if (raws.empty()) throw ParseError("lexicon: no entries");

  for (const auto& raw : raws) {
    auto& prons = lex.entries[raw.word];
    for (const auto& p : prons)
      if (p.phones == raw.phones)
        throw ParseError("duplicate pronunciation for word '" + lex.words.name(raw.word) + "'");
    prons.push_back(Pronunciation{raw.phones, raw.prob});
  }
  // Per-word probability policy: all-or-none explicit columns.
  std::map<fst::Label, std::vector<bool>> explicit_flags;
  for (const auto& raw : raws) explicit_flags[raw.word].push_back(raw.has_prob);
  for (auto& [word, prons] : lex.entries) {
    const auto& flags = explicit_flags[word];
    bool any = std::any_of(flags.begin(), flags.end(), [](bool b) { return b; });
    bool all = std::all_of(flags.begin(), flags.end(), [](bool b) { return b; });
    if (any && !all)
      throw ParseError("word '" + lex.words.name(word) +
                       "': give probabilities for all pronunciations or none");
    if (!any) {
      for (auto& p : prons) p.prob = 1.0 / static_cast<double>(prons.size());
      continue;
    }
    double sum = 0.0;
    for (const auto& p : prons) sum += p.prob;
    if (std::abs(sum - 1.0) > 1e-6)
      std::cerr << "latkit: warning: pronunciations of '" << lex.words.name(word)
                << "' sum to " << sum << "; renormalizing\n";
    for (auto& p : prons) p.prob /= sum;
  }
  return lex;
}

Lexicon load_lexicon_file(const std::string& path, double silence_prob,
                          const fst::SymbolTable* phone_table) {
  return load_lexicon(read_file(path), silence_prob, phone_table);
}

std::string write_lexicon(const Lexicon& lexicon) {
  std::ostringstream out;
  for (const auto& [word, prons] : lexicon.entries) {
    for (const auto& p : prons) {
      std::string prob = format_g9(p.prob);
      if (prob.find('.') == std::string::npos && prob.find('e') == std::string::npos)
        prob += ".0";
      out << lexicon.words.name(word) << ' ' << prob;
      for (fst::Label ph : p.phones) out << ' ' << lexicon.phones.name(ph);
      out << '\n';
    }
  }
  return out.str();
}

Lexicon estimate_pron_probs(const Lexicon& lexicon,
                            const std::vector<UtteranceAlignment>& alignments) {
  Lexicon out = lexicon;
  std::map<fst::Label, std::map<std::size_t, long>> pron_counts;
  std::map<fst::Label, long> word_counts, sil_after;
  long utts = 0, lead_sil = 0;
  for (const auto& utt : alignments) {
    ++utts;
    if (utt.silence_before) ++lead_sil;
    for (const auto& w : utt.words) {
      pron_counts[w.word][w.pron_index]++;
      word_counts[w.word]++;
      if (w.silence_after) sil_after[w.word]++;
    }
  }
  for (auto& [word, prons] : out.entries) {
    auto wc = word_counts.find(word);
    if (wc == word_counts.end()) continue;  // never aligned: keep priors
    const auto& counts = pron_counts[word];
    double total = static_cast<double>(wc->second);
    double denom = total + static_cast<double>(prons.size());
    for (std::size_t i = 0; i < prons.size(); ++i) {
      auto it = counts.find(i);
      double c = it == counts.end() ? 0.0 : static_cast<double>(it->second);
      prons[i].prob = (c + 1.0) / denom;
    }
    double sa = static_cast<double>(sil_after.count(word) ? sil_after.at(word) : 0);
    out.word_silence_prob[word] = (sa + 1.0) / (total + 2.0);
  }
  if (utts > 0)
    out.silence_prob = (static_cast<double>(lead_sil) + 1.0) / (static_cast<double>(utts) + 2.0);
  return out;
}

fst::WeightedFst compile_L(const Lexicon& lexicon) {
  using fst::StateId;
  fst::WeightedFst l;
  l.isyms = lexicon.phones;
  l.osyms = lexicon.words;

  // Auxiliary symbols disambiguate identical phone sequences; each member of
  // a homophone group gets its own.
  std::map<std::vector<fst::Label>, int> seen_prons;
  std::map<std::pair<fst::Label, std::size_t>, int> aux_of;  // (word, pron idx) -> aux #
  int max_aux = 0;
  for (const auto& [word, prons] : lexicon.entries)
    for (std::size_t i = 0; i < prons.size(); ++i) {
      int k = ++seen_prons[prons[i].phones];
      if (k > 1) aux_of[{word, i}] = k;
      max_aux = std::max(max_aux, k);
    }
  // Members numbered 2..k get #2..#k; the first keeps the bare sequence.
  std::vector<fst::Label> aux_label(static_cast<std::size_t>(max_aux) + 1, fst::kNoState);
  for (int k = 2; k <= max_aux; ++k)
    aux_label[static_cast<std::size_t>(k)] = l.isyms.add("#" + std::to_string(k));

  StateId pre = l.add_state();   // utterance start
  StateId hub = l.add_state();   // word boundary
  l.set_start(pre);
  double psil0 = lexicon.silence_prob;
  if (psil0 > 0.0) l.add_arc(pre, hub, lexicon.silence, fst::kEpsilon, std::log(psil0));
  l.add_arc(pre, hub, fst::kEpsilon, fst::kEpsilon, std::log(1.0 - psil0));
  l.set_final(hub, 0.0);

  for (const auto& [word, prons] : lexicon.entries) {
    for (std::size_t i = 0; i < prons.size(); ++i) {
      const auto& pron = prons[i];
      StateId cur = hub;
      for (std::size_t j = 0; j < pron.phones.size(); ++j) {
        StateId next = l.add_state();
        l.add_arc(cur, next, pron.phones[j], j == 0 ? word : fst::kEpsilon,
                  j == 0 ? std::log(pron.prob) : 0.0);
        cur = next;
      }
      auto aux_it = aux_of.find({word, i});
      if (aux_it != aux_of.end()) {
        StateId next = l.add_state();
        l.add_arc(cur, next, aux_label[static_cast<std::size_t>(aux_it->second)],
                  fst::kEpsilon, 0.0);
        cur = next;
      }
      double psil = lexicon.silence_after(word);
      if (psil > 0.0) l.add_arc(cur, hub, lexicon.silence, fst::kEpsilon, std::log(psil));
      l.add_arc(cur, hub, fst::kEpsilon, fst::kEpsilon, std::log(1.0 - psil));
    }
  }
  return l;
}

DecodingGraph build_decoding_graph(const fst::WeightedFst& l, const fst::WeightedFst& g) {
  const auto ring = fst::log_ring();
  std::string l_hash = hash_hex(fst::write_fst_text(l));
  std::string g_hash = hash_hex(fst::write_fst_text(g));

  auto composed = fst::compose(l, g, ring);
  if (composed.empty())
    throw DegenerateGraphError("build_decoding_graph: empty composition");
  // Strip auxiliary homophone symbols (named #k in the input table).
  for (auto& arc : composed.arcs) {
    if (arc.ilabel == fst::kEpsilon) continue;
    const std::string& name = composed.isyms.name(arc.ilabel);
    if (!name.empty() && name[0] == '#') arc.ilabel = fst::kEpsilon;
  }
  auto no_eps = fst::remove_epsilon(composed, ring);
  auto trimmed = fst::connect(no_eps);
  auto merged = fst::merge_duplicate_arcs(trimmed, ring);
  if (merged.empty())
    throw DegenerateGraphError("build_decoding_graph: graph is empty after trimming");
  for (const auto& arc : merged.arcs)
    if (arc.ilabel == fst::kEpsilon)
      throw ContractError("decoding graph has an epsilon input arc after compilation");

  DecodingGraph out;
  out.graph = std::move(merged);
  std::string bytes = fst::write_fst_text(out.graph);
  out.metadata["state_count"] = std::to_string(out.graph.num_states);
  out.metadata["arc_count"] = std::to_string(out.graph.arcs.size());
  out.metadata["bytes"] = std::to_string(bytes.size());
  out.metadata["lexicon_hash"] = l_hash;
  out.metadata["lm_hash"] = g_hash;
  return out;
}

std::string write_graph_metadata(const DecodingGraph& graph) {
  std::ostringstream out;
  for (const auto& [k, v] : graph.metadata) out << k << '=' << v << '\n';
  return out.str();
}

}  // namespace lex
}  // namespace latkit
