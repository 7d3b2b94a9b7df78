// latkit/decoder.cc

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

#include "latkit/decoder.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <deque>
#include <limits>
#include <map>
#include <sstream>

#include "latkit/common.h"

namespace latkit {
namespace decoder {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Decoding graphs carry at most one input label per state entry, so a token
// can repeat the phone it arrived with.  Expanding states by entry label
// makes that self-loop well defined for any graph.
struct SearchGraph {
  struct ExpArc {
    int dst = 0;
    fst::Label ilabel = fst::kEpsilon;
    fst::Label olabel = fst::kEpsilon;
    double cost = 0.0;  // graph cost
  };
  struct ExpState {
    fst::StateId orig = fst::kNoState;
    fst::Label entry = fst::kEpsilon;  // label consumed on entry; eps at start
    double final_cost = kInf;
    std::vector<ExpArc> arcs;  // excludes the implicit self-loop
  };
  std::vector<ExpState> states;
  int start = 0;
  fst::Label max_ilabel = 0;
};

SearchGraph expand_graph(const fst::WeightedFst& g) {
  if (g.empty()) throw DegenerateGraphError("decode: empty decoding graph");
  for (const auto& a : g.arcs)
    if (a.ilabel == fst::kEpsilon)
      throw ContractError("decode: decoding graph must be input-epsilon-free");
  auto by_state = g.arcs_by_state();
  SearchGraph sg;
  std::map<std::pair<fst::StateId, fst::Label>, int> ids;
  std::deque<std::pair<fst::StateId, fst::Label>> queue;
  auto intern = [&](fst::StateId s, fst::Label entry) {
    auto key = std::make_pair(s, entry);
    auto it = ids.find(key);
    if (it != ids.end()) return it->second;
    int id = static_cast<int>(sg.states.size());
    SearchGraph::ExpState st;
    st.orig = s;
    st.entry = entry;
    st.final_cost = g.is_final(s) ? -g.final_weight(s) : kInf;
    sg.states.push_back(st);
    ids.emplace(key, id);
    queue.emplace_back(key);
    return id;
  };
  sg.start = intern(g.start, fst::kEpsilon);
  while (!queue.empty()) {
    auto [s, entry] = queue.front();
    queue.pop_front();
    int id = ids.at({s, entry});
    for (std::int32_t ai : by_state[static_cast<std::size_t>(s)]) {
      const fst::Arc& a = g.arcs[static_cast<std::size_t>(ai)];
      SearchGraph::ExpArc ea;
      ea.ilabel = a.ilabel;
      ea.olabel = a.olabel;
      ea.cost = -a.weight;
      ea.dst = intern(a.dst, a.ilabel);
      sg.states[static_cast<std::size_t>(id)].arcs.push_back(ea);
      sg.max_ilabel = std::max(sg.max_ilabel, a.ilabel);
    }
  }
  return sg;
}

struct Token {
  int exp_state = 0;
  int frame = 0;
  double cost = 0.0;  // best cost from the start
};

struct Link {
  int src_tok = -1;
  int dst_tok = -1;
  fst::Label ilabel = fst::kEpsilon;
  fst::Label olabel = fst::kEpsilon;
  double ac = 0.0;
  double gc = 0.0;
  bool self_loop = false;
};

}  // namespace

fst::WeightedFst Lattice::to_fst() const {
  fst::WeightedFst f;
  f.isyms = words;
  f.osyms = words;
  for (fst::StateId s = 0; s < num_states; ++s) f.add_state();
  if (num_states > 0) f.set_start(0);
  for (const auto& a : arcs)
    f.add_arc(a.src, a.dst, a.word, a.word, -(a.acoustic_cost + a.lm_cost));
  for (fst::StateId s = 0; s < num_states; ++s)
    if (is_final(s)) f.set_final(s, -final_costs[static_cast<std::size_t>(s)]);
  return f;
}

DecodeResult decode(const am::AcousticModel& model, const lex::DecodingGraph& graph,
                    const Matrix& features, const std::string& utt_id,
                    const DecodeOptions& opts) {
  if (!(opts.beam >= opts.lattice_beam && opts.lattice_beam > 0))
    throw ConfigError("decode: need beam >= lattice_beam > 0");
  auto t0 = std::chrono::steady_clock::now();

  auto outputs = am::forward(model, features, am::Mode::kEval, 0);
  const int num_frames = outputs.num_frames();
  SearchGraph sg = expand_graph(graph.graph);
  if (sg.max_ilabel - 1 >= outputs.scores.rows())
    throw ContractError("decode: graph phone label exceeds model output dim");
  const fst::Label silence = graph.graph.isyms.find(lex::kSilenceSymbol);

  auto ac_cost = [&](fst::Label label, int t) {
    return -opts.acoustic_scale * outputs.scores(label - 1, t);
  };

  std::vector<Token> toks;
  std::vector<Link> links;
  std::vector<std::map<int, int>> frontier(static_cast<std::size_t>(num_frames) + 1);
  toks.push_back(Token{sg.start, 0, 0.0});
  frontier[0][sg.start] = 0;

  for (int t = 0; t < num_frames; ++t) {
    // Gather candidate transitions, then apply the pure beam against the
    // frame-best before creating tokens.
    struct Cand {
      double best = kInf;
    };
    std::map<int, Cand> cands;
    std::vector<Link> cand_links;
    for (const auto& [es, ti] : frontier[static_cast<std::size_t>(t)]) {
      const Token& tok = toks[static_cast<std::size_t>(ti)];
      const auto& st = sg.states[static_cast<std::size_t>(es)];
      if (st.entry != fst::kEpsilon) {
        double ac = ac_cost(st.entry, t);
        cand_links.push_back(Link{ti, es, st.entry, fst::kEpsilon, ac, 0.0, true});
        auto& c = cands[es];
        c.best = std::min(c.best, tok.cost + ac);
      }
      for (const auto& ea : st.arcs) {
        double ac = ac_cost(ea.ilabel, t);
        cand_links.push_back(Link{ti, ea.dst, ea.ilabel, ea.olabel, ac, ea.cost, false});
        auto& c = cands[ea.dst];
        c.best = std::min(c.best, tok.cost + ac + ea.cost);
      }
    }
    double frame_best = kInf;
    for (const auto& [es, c] : cands) frame_best = std::min(frame_best, c.best);
    if (frame_best == kInf)
      throw DecodeFailureError("decode: no surviving token at frame " + std::to_string(t) +
                               " of utterance " + utt_id);
    auto& next = frontier[static_cast<std::size_t>(t) + 1];
    for (const auto& [es, c] : cands) {
      if (c.best > frame_best + opts.beam) continue;
      int ti = static_cast<int>(toks.size());
      toks.push_back(Token{es, t + 1, c.best});
      next[es] = ti;
    }
    for (Link& l : cand_links) {
      auto it = next.find(l.dst_tok);  // dst_tok currently holds the exp state
      if (it == next.end()) continue;
      l.dst_tok = it->second;
      links.push_back(l);
    }
  }

  // Final costs and the global best.
  double best_total = kInf;
  for (const auto& [es, ti] : frontier[static_cast<std::size_t>(num_frames)]) {
    double fc = sg.states[static_cast<std::size_t>(es)].final_cost;
    if (fc == kInf) continue;
    best_total = std::min(best_total, toks[static_cast<std::size_t>(ti)].cost + fc);
  }
  if (best_total == kInf)
    throw DecodeFailureError("decode: no token reached a final state in " + utt_id);

  // Backward best-to-final costs over tokens; prune links to lattice_beam.
  std::vector<std::vector<int>> out_links(toks.size());
  for (std::size_t li = 0; li < links.size(); ++li)
    out_links[static_cast<std::size_t>(links[li].src_tok)].push_back(static_cast<int>(li));
  std::vector<double> bw(toks.size(), kInf);
  for (const auto& [es, ti] : frontier[static_cast<std::size_t>(num_frames)])
    bw[static_cast<std::size_t>(ti)] = sg.states[static_cast<std::size_t>(es)].final_cost;
  for (int t = num_frames - 1; t >= 0; --t) {
    for (const auto& [es, ti] : frontier[static_cast<std::size_t>(t)]) {
      (void)es;
      double best = kInf;
      for (int li : out_links[static_cast<std::size_t>(ti)]) {
        const Link& l = links[static_cast<std::size_t>(li)];
        best = std::min(best, l.ac + l.gc + bw[static_cast<std::size_t>(l.dst_tok)]);
      }
      bw[static_cast<std::size_t>(ti)] = best;
    }
  }
  std::vector<char> kept(links.size(), 0);
  std::vector<std::vector<int>> kept_out(toks.size());
  for (std::size_t li = 0; li < links.size(); ++li) {
    const Link& l = links[li];
    double through = toks[static_cast<std::size_t>(l.src_tok)].cost + l.ac + l.gc +
                     bw[static_cast<std::size_t>(l.dst_tok)];
    if (through <= best_total + opts.lattice_beam + 1e-9) {
      kept[li] = 1;
      kept_out[static_cast<std::size_t>(l.src_tok)].push_back(static_cast<int>(li));
    }
  }

  // Word-boundary collapse.  A link starts a new lattice arc when it emits a
  // word, enters silence, or leaves the start token.
  auto is_boundary = [&](const Link& l) {
    if (l.olabel != fst::kEpsilon) return true;
    if (silence != fst::kNoState && l.ilabel == silence && !l.self_loop) return true;
    return l.src_tok == 0;
  };

  std::vector<char> is_cut(toks.size(), 0);
  is_cut[0] = 1;
  for (std::size_t li = 0; li < links.size(); ++li)
    if (kept[li] && is_boundary(links[li])) is_cut[static_cast<std::size_t>(links[li].src_tok)] = 1;
  std::vector<char> is_final_tok(toks.size(), 0);
  for (const auto& [es, ti] : frontier[static_cast<std::size_t>(num_frames)])
    if (sg.states[static_cast<std::size_t>(es)].final_cost != kInf &&
        bw[static_cast<std::size_t>(ti)] != kInf)
      is_final_tok[static_cast<std::size_t>(ti)] = 1;

  Lattice lat;
  lat.utt_id = utt_id;
  lat.num_frames = num_frames;
  lat.sec_per_frame = opts.sec_per_frame;
  lat.words = graph.graph.osyms;
  std::vector<fst::StateId> lat_id(toks.size(), fst::kNoState);
  auto lattice_state = [&](int ti) {
    if (lat_id[static_cast<std::size_t>(ti)] == fst::kNoState) {
      lat_id[static_cast<std::size_t>(ti)] = lat.num_states++;
      lat.final_costs.push_back(kInf);
      if (is_final_tok[static_cast<std::size_t>(ti)])
        lat.final_costs.back() =
            sg.states[static_cast<std::size_t>(toks[static_cast<std::size_t>(ti)].exp_state)]
                .final_cost;
    }
    return lat_id[static_cast<std::size_t>(ti)];
  };
  lattice_state(0);

  // Tokens in (frame, exp_state) order keep everything deterministic.
  std::vector<int> ordered_toks;
  for (int t = 0; t <= num_frames; ++t)
    for (const auto& [es, ti] : frontier[static_cast<std::size_t>(t)]) {
      (void)es;
      ordered_toks.push_back(ti);
    }

  for (int ti : ordered_toks) {
    if (!is_cut[static_cast<std::size_t>(ti)]) continue;
    for (int li : kept_out[static_cast<std::size_t>(ti)]) {
      const Link& e = links[static_cast<std::size_t>(li)];
      if (!is_boundary(e)) continue;
      // Tropical DP through non-boundary links; branch points that are cut
      // or final tokens become arc endpoints but the expansion continues
      // through them.
      std::map<int, std::pair<double, double>> best;  // token -> (ac, gc)
      std::map<int, double> combined;
      std::deque<int> work;
      best[e.dst_tok] = {e.ac, e.gc};
      combined[e.dst_tok] = e.ac + e.gc;
      work.push_back(e.dst_tok);
      std::map<int, std::pair<double, double>> endpoints;
      while (!work.empty()) {
        int v = work.front();
        work.pop_front();
        auto [vac, vgc] = best[v];
        if (is_cut[static_cast<std::size_t>(v)] || is_final_tok[static_cast<std::size_t>(v)]) {
          auto it = endpoints.find(v);
          if (it == endpoints.end() || vac + vgc < it->second.first + it->second.second)
            endpoints[v] = {vac, vgc};
        }
        for (int li2 : kept_out[static_cast<std::size_t>(v)]) {
          const Link& l2 = links[static_cast<std::size_t>(li2)];
          if (is_boundary(l2)) continue;
          double nac = vac + l2.ac, ngc = vgc + l2.gc;
          auto it = combined.find(l2.dst_tok);
          if (it == combined.end() || nac + ngc < it->second) {
            combined[l2.dst_tok] = nac + ngc;
            best[l2.dst_tok] = {nac, ngc};
            work.push_back(l2.dst_tok);
          }
        }
      }
      fst::StateId src = lattice_state(ti);
      for (const auto& [v, cost_pair] : endpoints) {
        LatticeArc arc;
        arc.src = src;
        arc.dst = lattice_state(v);
        arc.word = e.olabel;
        arc.acoustic_cost = cost_pair.first;
        arc.lm_cost = cost_pair.second;
        arc.start_frame = toks[static_cast<std::size_t>(ti)].frame;
        arc.end_frame = toks[static_cast<std::size_t>(v)].frame;
        lat.arcs.push_back(arc);
      }
    }
  }

  DecodeResult result;
  result.lattice = std::move(lat);
  auto best = best_path(result.lattice);
  result.transcript = best.words;
  result.best_cost = best.cost;
  result.confidence = confidence(result.lattice, opts.confidence_rule);
  result.audio_seconds = opts.audio_seconds > 0
                             ? opts.audio_seconds
                             : static_cast<double>(features.cols()) * 0.01;
  auto t1 = std::chrono::steady_clock::now();
  result.wall_seconds = std::chrono::duration<double>(t1 - t0).count();
  result.rtf = result.wall_seconds / result.audio_seconds;
  return result;
}

BestPath best_path(const Lattice& lattice) {
  if (lattice.num_states == 0 || lattice.arcs.empty())
    throw DegenerateGraphError("best_path: empty lattice");
  auto path = fst::shortest_path(lattice.to_fst());
  BestPath out;
  out.words = path.olabels;
  out.cost = -path.weight;
  return out;
}

double confidence(const Lattice& lattice, DecodeOptions::ConfidenceRule rule) {
  if (lattice.num_states == 0 || lattice.arcs.empty())
    throw DegenerateGraphError("confidence: empty lattice");
  auto f = lattice.to_fst();
  auto posteriors = fst::forward_backward(f);
  auto best = fst::shortest_path(f);
  double min_post = 1.0, sum = 0.0;
  int words = 0;
  for (std::int32_t ai : best.arc_ids) {
    if (lattice.arcs[static_cast<std::size_t>(ai)].word == fst::kEpsilon) continue;
    double p = posteriors.arc_posterior[static_cast<std::size_t>(ai)];
    min_post = std::min(min_post, p);
    sum += p;
    ++words;
  }
  if (words == 0) return 0.0;
  return rule == DecodeOptions::ConfidenceRule::kMinPosterior
             ? min_post
             : sum / static_cast<double>(words);
}

Lattice rescore(const Lattice& lattice, const lm::NgramModel& strong_lm, double scale) {
  if (lattice.num_states == 0) throw DegenerateGraphError("rescore: empty lattice");
  std::vector<std::vector<std::size_t>> by_src(static_cast<std::size_t>(lattice.num_states));
  for (std::size_t i = 0; i < lattice.arcs.size(); ++i)
    by_src[static_cast<std::size_t>(lattice.arcs[i].src)].push_back(i);

  using Key = std::pair<fst::StateId, lm::Gram>;
  std::map<Key, fst::StateId> ids;
  std::deque<Key> queue;
  Lattice out;
  out.utt_id = lattice.utt_id;
  out.num_frames = lattice.num_frames;
  out.sec_per_frame = lattice.sec_per_frame;
  out.words = lattice.words;
  auto intern = [&](fst::StateId s, const lm::Gram& ctx) {
    Key k{s, ctx};
    auto it = ids.find(k);
    if (it != ids.end()) return it->second;
    fst::StateId id = out.num_states++;
    out.final_costs.push_back(kInf);
    ids.emplace(k, id);
    queue.push_back(k);
    return id;
  };
  lm::Gram start_ctx{lm::kBos};
  intern(0, start_ctx);
  while (!queue.empty()) {
    auto [s, ctx] = queue.front();
    queue.pop_front();
    fst::StateId id = ids.at({s, ctx});
    if (lattice.is_final(s)) {
      double lp = strong_lm.logprob(ctx, lm::kEos);
      if (lp != -kInf) out.final_costs[static_cast<std::size_t>(id)] = scale * -lp;
    }
    for (std::size_t ai : by_src[static_cast<std::size_t>(s)]) {
      const LatticeArc& a = lattice.arcs[ai];
      LatticeArc na = a;
      lm::Gram next_ctx = ctx;
      if (a.word != fst::kEpsilon) {
        double lp = strong_lm.logprob(ctx, a.word);
        if (lp == -kInf) continue;  // the strong LM forbids this word here
        na.lm_cost = scale * -lp;
        next_ctx.push_back(a.word);
        std::size_t keep = static_cast<std::size_t>(strong_lm.order() - 1);
        if (next_ctx.size() > keep)
          next_ctx.erase(next_ctx.begin(),
                         next_ctx.end() - static_cast<std::ptrdiff_t>(keep));
      } else {
        na.lm_cost = 0.0;
      }
      na.src = id;
      na.dst = intern(a.dst, next_ctx);
      out.arcs.push_back(na);
    }
  }
  // Re-trim: keep states that reach a final.
  std::vector<char> coacc(static_cast<std::size_t>(out.num_states), 0);
  std::vector<std::vector<fst::StateId>> rev(static_cast<std::size_t>(out.num_states));
  for (const auto& a : out.arcs) rev[static_cast<std::size_t>(a.dst)].push_back(a.src);
  std::deque<fst::StateId> work;
  for (fst::StateId s = 0; s < out.num_states; ++s)
    if (out.is_final(s)) {
      coacc[static_cast<std::size_t>(s)] = 1;
      work.push_back(s);
    }
  while (!work.empty()) {
    fst::StateId s = work.front();
    work.pop_front();
    for (fst::StateId p : rev[static_cast<std::size_t>(s)])
      if (!coacc[static_cast<std::size_t>(p)]) {
        coacc[static_cast<std::size_t>(p)] = 1;
        work.push_back(p);
      }
  }
  if (!coacc[0]) throw DecodeFailureError("rescore: lattice is empty after rescoring");
  std::vector<fst::StateId> renum(static_cast<std::size_t>(out.num_states), fst::kNoState);
  Lattice trimmed;
  trimmed.utt_id = out.utt_id;
  trimmed.num_frames = out.num_frames;
  trimmed.sec_per_frame = out.sec_per_frame;
  trimmed.words = out.words;
  for (fst::StateId s = 0; s < out.num_states; ++s)
    if (coacc[static_cast<std::size_t>(s)]) {
      renum[static_cast<std::size_t>(s)] = trimmed.num_states++;
      trimmed.final_costs.push_back(out.final_costs[static_cast<std::size_t>(s)]);
    }
  for (const auto& a : out.arcs) {
    if (renum[static_cast<std::size_t>(a.src)] == fst::kNoState ||
        renum[static_cast<std::size_t>(a.dst)] == fst::kNoState)
      continue;
    LatticeArc na = a;
    na.src = renum[static_cast<std::size_t>(a.src)];
    na.dst = renum[static_cast<std::size_t>(a.dst)];
    trimmed.arcs.push_back(na);
  }
  return trimmed;
}

RtfReport measure_rtf(const std::vector<UtteranceTiming>& timings) {
  if (timings.empty()) throw ConfigError("measure_rtf: need at least one utterance");
  RtfReport report;
  report.utterances = timings;
  for (const auto& t : timings) {
    if (t.audio_seconds <= 0) throw ConfigError("measure_rtf: audio seconds must be positive");
    report.total_audio_seconds += t.audio_seconds;
    report.total_wall_seconds += t.wall_seconds;
  }
  report.aggregate_rtf = report.total_wall_seconds / report.total_audio_seconds;
  return report;
}

std::string write_lattice(const Lattice& lattice) {
  std::ostringstream out;
  out << "LATTICE " << lattice.utt_id << ' ' << lattice.num_frames << ' '
      << format_g9(lattice.sec_per_frame) << '\n';
  for (const auto& a : lattice.arcs)
    out << a.src << ' ' << a.dst << ' ' << a.word << ' ' << a.word << ' '
        << format_g9(a.acoustic_cost) << ',' << format_g9(a.lm_cost) << ','
        << a.start_frame << ',' << a.end_frame << '\n';
  for (fst::StateId s = 0; s < lattice.num_states; ++s)
    if (lattice.is_final(s))
      out << s << ' ' << format_g9(lattice.final_costs[static_cast<std::size_t>(s)]) << '\n';
  return out.str();
}

std::string write_lattice_archive(const std::vector<Lattice>& lattices) {
  std::ostringstream out;
  for (const auto& l : lattices) out << write_lattice(l) << '\n';
  return out.str();
}

std::vector<Lattice> read_lattice_archive(const std::string& text,
                                          const fst::SymbolTable& words) {
  std::vector<Lattice> out;
  std::istringstream in(text);
  std::string line;
  Lattice* cur = nullptr;
  long max_state = -1;
  std::vector<std::pair<long, double>> finals;
  auto flush = [&]() {
    if (!cur) return;
    cur->num_states = static_cast<fst::StateId>(max_state + 1);
    cur->final_costs.assign(static_cast<std::size_t>(cur->num_states), kInf);
    for (const auto& [s, c] : finals) cur->final_costs[static_cast<std::size_t>(s)] = c;
    cur = nullptr;
    finals.clear();
    max_state = -1;
  };
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto toks = split_ws(line);
    if (toks.empty()) {
      flush();
      continue;
    }
    if (toks[0] == "LATTICE") {
      flush();
      if (toks.size() != 4) throw ParseError("lattice header needs 4 fields");
      out.emplace_back();
      cur = &out.back();
      cur->utt_id = toks[1];
      cur->num_frames = std::stoi(toks[2]);
      cur->sec_per_frame = std::stod(toks[3]);
      cur->words = words;
      continue;
    }
    if (!cur) throw ParseError("lattice line " + std::to_string(lineno) + " before header");
    if (toks.size() == 5) {
      LatticeArc a;
      a.src = static_cast<fst::StateId>(std::stol(toks[0]));
      a.dst = static_cast<fst::StateId>(std::stol(toks[1]));
      a.word = static_cast<fst::Label>(std::stol(toks[2]));
      if (std::stol(toks[3]) != a.word)
        throw ParseError("lattice arcs are acceptor-style; labels must match");
      auto parts = split_ws([&] {
        std::string t = toks[4];
        std::replace(t.begin(), t.end(), ',', ' ');
        return t;
      }());
      if (parts.size() != 4) throw ParseError("lattice arc needs ac,lm,start,end");
      a.acoustic_cost = std::stod(parts[0]);
      a.lm_cost = std::stod(parts[1]);
      a.start_frame = std::stoi(parts[2]);
      a.end_frame = std::stoi(parts[3]);
      max_state = std::max({max_state, static_cast<long>(a.src), static_cast<long>(a.dst)});
      cur->arcs.push_back(a);
    } else if (toks.size() == 2) {
      long s = std::stol(toks[0]);
      max_state = std::max(max_state, s);
      finals.emplace_back(s, std::stod(toks[1]));
    } else {
      throw ParseError("lattice line " + std::to_string(lineno) + ": bad field count");
    }
  }
  flush();
  return out;
}

}  // namespace decoder
}  // namespace latkit
