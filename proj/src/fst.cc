// latkit/fst.cc

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

#include <algorithm>
#include <deque>
#include <map>
#include <tuple>

#include "latkit/common.h"

namespace latkit {
namespace fst {

Label SymbolTable::add(const std::string& sym) {
  auto it = ids_.find(sym);
  if (it != ids_.end()) return it->second;
  Label id = static_cast<Label>(syms_.size());
  syms_.push_back(sym);
  ids_.emplace(sym, id);
  names_ = syms_.size();
  return id;
}

Label SymbolTable::find(const std::string& sym) const {
  auto it = ids_.find(sym);
  return it == ids_.end() ? kNoState : it->second;
}

const std::string& SymbolTable::name(Label id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= syms_.size())
    throw ContractError("symbol id out of range: " + std::to_string(id));
  return syms_[static_cast<std::size_t>(id)];
}

std::vector<std::vector<std::int32_t>> WeightedFst::arcs_by_state() const {
  std::vector<std::vector<std::int32_t>> idx(static_cast<std::size_t>(num_states));
  for (std::size_t i = 0; i < arcs.size(); ++i)
    idx[static_cast<std::size_t>(arcs[i].src)].push_back(static_cast<std::int32_t>(i));
  return idx;
}

bool is_acceptor(const WeightedFst& f) {
  for (const Arc& a : f.arcs)
    if (a.ilabel != a.olabel) return false;
  return true;
}

namespace {

// Kahn's algorithm.  Returns all states in a topological order when the arc
// relation is acyclic, otherwise sets *ok = false.
std::vector<StateId> kahn_order(const WeightedFst& f, bool* ok) {
  std::vector<int> indeg(static_cast<std::size_t>(f.num_states), 0);
  for (const Arc& a : f.arcs) indeg[static_cast<std::size_t>(a.dst)]++;
  auto by_state = f.arcs_by_state();
  std::deque<StateId> queue;
  for (StateId s = 0; s < f.num_states; ++s)
    if (indeg[static_cast<std::size_t>(s)] == 0) queue.push_back(s);
  std::vector<StateId> order;
  order.reserve(static_cast<std::size_t>(f.num_states));
  while (!queue.empty()) {
    StateId s = queue.front();
    queue.pop_front();
    order.push_back(s);
    for (std::int32_t ai : by_state[static_cast<std::size_t>(s)]) {
      StateId t = f.arcs[static_cast<std::size_t>(ai)].dst;
      if (--indeg[static_cast<std::size_t>(t)] == 0) queue.push_back(t);
    }
  }
  *ok = order.size() == static_cast<std::size_t>(f.num_states);
  return order;
}

std::vector<std::int32_t> pred_chain_path(const std::vector<std::int32_t>& pred_arc,
                                          const WeightedFst& f, StateId end) {
  std::vector<std::int32_t> out;
  StateId s = end;
  std::size_t guard = f.arcs.size() + 1;
  while (pred_arc[static_cast<std::size_t>(s)] >= 0) {
    if (out.size() > guard) throw ContractError("predecessor chain contains a cycle");
    std::int32_t ai = pred_arc[static_cast<std::size_t>(s)];
    out.push_back(ai);
    s = f.arcs[static_cast<std::size_t>(ai)].src;
  }
  std::reverse(out.begin(), out.end());
  return out;
}

Path make_path(const WeightedFst& f, const std::vector<std::int32_t>& arc_ids) {
  Path p;
  p.arc_ids = arc_ids;
  p.weight = 0.0;
  for (std::int32_t ai : arc_ids) {
    const Arc& a = f.arcs[static_cast<std::size_t>(ai)];
    p.weight += a.weight;
    if (a.ilabel != kEpsilon) p.ilabels.push_back(a.ilabel);
    if (a.olabel != kEpsilon) p.olabels.push_back(a.olabel);
  }
  StateId end = arc_ids.empty() ? f.start : f.arcs[static_cast<std::size_t>(arc_ids.back())].dst;
  p.weight += f.final_weight(end);
  return p;
}

}  // namespace

std::vector<StateId> topological_order(const WeightedFst& f) {
  bool ok = false;
  auto order = kahn_order(f, &ok);
  if (!ok) throw UnsupportedInputError("machine is cyclic; a topological order is required");
  return order;
}

bool is_acyclic(const WeightedFst& f) {
  bool ok = false;
  kahn_order(f, &ok);
  return ok;
}

WeightedFst compose(const WeightedFst& a, const WeightedFst& b, const Semiring& ring) {
  if (!(a.osyms == b.isyms))
    throw ConfigError("compose: left output symbol table differs from right input table");

  WeightedFst out;
  out.isyms = a.isyms;
  out.osyms = b.osyms;
  if (a.empty() || b.empty()) return out;

  auto a_idx = a.arcs_by_state();
  auto b_idx = b.arcs_by_state();

  // Filter state 0: a-side epsilon moves allowed; 1: committed to b-side
  // epsilon moves until the next match.
  using Key = std::tuple<StateId, StateId, int>;
  std::map<Key, StateId> ids;
  std::deque<Key> queue;
  auto state_of = [&](StateId sa, StateId sb, int filt) {
    Key k{sa, sb, filt};
    auto it = ids.find(k);
    if (it != ids.end()) return it->second;
    StateId id = out.add_state();
    ids.emplace(k, id);
    queue.push_back(k);
    return id;
  };

  out.set_start(state_of(a.start, b.start, 0));
  while (!queue.empty()) {
    auto [sa, sb, filt] = queue.front();
    queue.pop_front();
    StateId id = ids[{sa, sb, filt}];

    double fin = ring.times(a.final_weight(sa), b.final_weight(sb));
    if (fin != ring.zero()) out.set_final(id, fin);

    for (std::int32_t ai : a_idx[static_cast<std::size_t>(sa)]) {
      const Arc& arc_a = a.arcs[static_cast<std::size_t>(ai)];
      if (arc_a.olabel == kEpsilon) {
        if (filt == 0)
          out.add_arc(id, state_of(arc_a.dst, sb, 0), arc_a.ilabel, kEpsilon, arc_a.weight);
        continue;
      }
      for (std::int32_t bi : b_idx[static_cast<std::size_t>(sb)]) {
        const Arc& arc_b = b.arcs[static_cast<std::size_t>(bi)];
        if (arc_b.ilabel != arc_a.olabel) continue;
        out.add_arc(id, state_of(arc_a.dst, arc_b.dst, 0), arc_a.ilabel, arc_b.olabel,
                    ring.times(arc_a.weight, arc_b.weight));
      }
    }
    for (std::int32_t bi : b_idx[static_cast<std::size_t>(sb)]) {
      const Arc& arc_b = b.arcs[static_cast<std::size_t>(bi)];
      if (arc_b.ilabel == kEpsilon)
        out.add_arc(id, state_of(sa, arc_b.dst, 1), kEpsilon, arc_b.olabel, arc_b.weight);
    }
  }
  return connect(out);
}

WeightedFst remove_epsilon(const WeightedFst& f, const Semiring& ring) {
  if (f.empty()) return f;

  auto is_eps_arc = [](const Arc& a) {
    return a.ilabel == kEpsilon && a.olabel == kEpsilon;
  };

  // Topological order restricted to the epsilon subgraph.
  const std::size_t n = static_cast<std::size_t>(f.num_states);
  std::vector<std::vector<std::int32_t>> eps_out(n);
  std::vector<int> indeg(n, 0);
  for (std::size_t i = 0; i < f.arcs.size(); ++i) {
    if (!is_eps_arc(f.arcs[i])) continue;
    eps_out[static_cast<std::size_t>(f.arcs[i].src)].push_back(static_cast<std::int32_t>(i));
    indeg[static_cast<std::size_t>(f.arcs[i].dst)]++;
  }
  std::deque<StateId> queue;
  for (StateId s = 0; s < f.num_states; ++s)
    if (indeg[static_cast<std::size_t>(s)] == 0) queue.push_back(s);
  std::vector<StateId> order;
  while (!queue.empty()) {
    StateId s = queue.front();
    queue.pop_front();
    order.push_back(s);
    for (std::int32_t ai : eps_out[static_cast<std::size_t>(s)])
      if (--indeg[static_cast<std::size_t>(f.arcs[static_cast<std::size_t>(ai)].dst)] == 0)
        queue.push_back(f.arcs[static_cast<std::size_t>(ai)].dst);
  }
  if (order.size() != n)
    throw UnsupportedInputError("remove_epsilon: epsilon cycle detected");

  // closure[s]: states reachable from s over epsilon arcs, with the
  // plus-aggregated weight of all epsilon paths.  Reverse topological order
  // makes each closure a one-step extension of its successors'.
  std::vector<std::map<StateId, double>> closure(n);
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    StateId s = *it;
    for (std::int32_t ai : eps_out[static_cast<std::size_t>(s)]) {
      const Arc& e = f.arcs[static_cast<std::size_t>(ai)];
      auto& into = closure[static_cast<std::size_t>(s)];
      auto add = [&](StateId t, double w) {
        auto [pos, fresh] = into.emplace(t, w);
        if (!fresh) pos->second = ring.plus(pos->second, w);
      };
      add(e.dst, e.weight);
      for (const auto& [t, w] : closure[static_cast<std::size_t>(e.dst)])
        add(t, ring.times(e.weight, w));
    }
  }

  WeightedFst out;
  out.isyms = f.isyms;
  out.osyms = f.osyms;
  out.num_states = f.num_states;
  out.start = f.start;
  out.finals = f.finals;
  auto by_state = f.arcs_by_state();
  // Original non-epsilon arcs keep their relative order so an epsilon-free
  // machine round-trips unchanged.
  for (const Arc& a : f.arcs)
    if (!is_eps_arc(a)) out.arcs.push_back(a);
  for (StateId s = 0; s < f.num_states; ++s) {
    double fin = f.final_weight(s);
    for (const auto& [t, w] : closure[static_cast<std::size_t>(s)]) {
      for (std::int32_t ai : by_state[static_cast<std::size_t>(t)]) {
        const Arc& a = f.arcs[static_cast<std::size_t>(ai)];
        if (is_eps_arc(a)) continue;
        out.add_arc(s, a.dst, a.ilabel, a.olabel, ring.times(w, a.weight));
      }
      fin = ring.plus(fin, ring.times(w, f.final_weight(t)));
    }
    out.finals[static_cast<std::size_t>(s)] = fin;
  }
  return out;
}

WeightedFst connect(const WeightedFst& f) {
  WeightedFst empty;
  empty.isyms = f.isyms;
  empty.osyms = f.osyms;
  if (f.empty()) return empty;

  const std::size_t n = static_cast<std::size_t>(f.num_states);
  auto by_state = f.arcs_by_state();
  std::vector<std::vector<StateId>> rev(n);
  for (const Arc& a : f.arcs) rev[static_cast<std::size_t>(a.dst)].push_back(a.src);

  std::vector<char> fwd(n, 0), bwd(n, 0);
  std::deque<StateId> queue{f.start};
  fwd[static_cast<std::size_t>(f.start)] = 1;
  while (!queue.empty()) {
    StateId s = queue.front();
    queue.pop_front();
    for (std::int32_t ai : by_state[static_cast<std::size_t>(s)]) {
      StateId t = f.arcs[static_cast<std::size_t>(ai)].dst;
      if (!fwd[static_cast<std::size_t>(t)]) {
        fwd[static_cast<std::size_t>(t)] = 1;
        queue.push_back(t);
      }
    }
  }
  for (StateId s = 0; s < f.num_states; ++s)
    if (f.is_final(s) && !bwd[static_cast<std::size_t>(s)]) {
      bwd[static_cast<std::size_t>(s)] = 1;
      queue.push_back(s);
    }
  while (!queue.empty()) {
    StateId s = queue.front();
    queue.pop_front();
    for (StateId p : rev[static_cast<std::size_t>(s)])
      if (!bwd[static_cast<std::size_t>(p)]) {
        bwd[static_cast<std::size_t>(p)] = 1;
        queue.push_back(p);
      }
  }

  std::vector<StateId> renum(n, kNoState);
  WeightedFst out;
  out.isyms = f.isyms;
  out.osyms = f.osyms;
  for (StateId s = 0; s < f.num_states; ++s)
    if (fwd[static_cast<std::size_t>(s)] && bwd[static_cast<std::size_t>(s)]) {
      renum[static_cast<std::size_t>(s)] = out.add_state();
      out.set_final(renum[static_cast<std::size_t>(s)], f.final_weight(s));
    }
  if (renum[static_cast<std::size_t>(f.start)] == kNoState) return empty;
  out.set_start(renum[static_cast<std::size_t>(f.start)]);
  for (const Arc& a : f.arcs) {
    StateId s = renum[static_cast<std::size_t>(a.src)];
    StateId t = renum[static_cast<std::size_t>(a.dst)];
    if (s != kNoState && t != kNoState) out.add_arc(s, t, a.ilabel, a.olabel, a.weight);
  }
  return out;
}

WeightedFst merge_duplicate_arcs(const WeightedFst& f, const Semiring& ring) {
  WeightedFst out = f;
  out.arcs.clear();
  std::map<std::tuple<StateId, StateId, Label, Label>, std::size_t> seen;
  for (const Arc& a : f.arcs) {
    auto key = std::make_tuple(a.src, a.dst, a.ilabel, a.olabel);
    auto it = seen.find(key);
    if (it == seen.end()) {
      seen.emplace(key, out.arcs.size());
      out.arcs.push_back(a);
    } else {
      out.arcs[it->second].weight = ring.plus(out.arcs[it->second].weight, a.weight);
    }
  }
  return out;
}

double total_weight(const WeightedFst& f, const Semiring& ring) {
  if (f.empty()) return ring.zero();
  auto order = topological_order(f);
  auto by_state = f.arcs_by_state();
  std::vector<double> alpha(static_cast<std::size_t>(f.num_states), ring.zero());
  alpha[static_cast<std::size_t>(f.start)] = ring.one();
  double total = ring.zero();
  for (StateId s : order) {
    double w = alpha[static_cast<std::size_t>(s)];
    if (w == ring.zero()) continue;
    for (std::int32_t ai : by_state[static_cast<std::size_t>(s)]) {
      const Arc& a = f.arcs[static_cast<std::size_t>(ai)];
      alpha[static_cast<std::size_t>(a.dst)] =
          ring.plus(alpha[static_cast<std::size_t>(a.dst)], ring.times(w, a.weight));
    }
    if (f.is_final(s)) total = ring.plus(total, ring.times(w, f.final_weight(s)));
  }
  return total;
}

Posteriors forward_backward(const WeightedFst& f) {
  const Semiring ring = log_ring();
  if (f.empty()) throw DegenerateGraphError("forward_backward: empty machine");
  auto order = topological_order(f);
  auto by_state = f.arcs_by_state();
  const std::size_t n = static_cast<std::size_t>(f.num_states);

  std::vector<double> alpha(n, ring.zero()), beta(n, ring.zero());
  alpha[static_cast<std::size_t>(f.start)] = ring.one();
  for (StateId s : order) {
    double w = alpha[static_cast<std::size_t>(s)];
    if (w == ring.zero()) continue;
    for (std::int32_t ai : by_state[static_cast<std::size_t>(s)]) {
      const Arc& a = f.arcs[static_cast<std::size_t>(ai)];
      alpha[static_cast<std::size_t>(a.dst)] =
          ring.plus(alpha[static_cast<std::size_t>(a.dst)], ring.times(w, a.weight));
    }
  }
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    StateId s = *it;
    double acc = f.final_weight(s);
    for (std::int32_t ai : by_state[static_cast<std::size_t>(s)]) {
      const Arc& a = f.arcs[static_cast<std::size_t>(ai)];
      acc = ring.plus(acc, ring.times(a.weight, beta[static_cast<std::size_t>(a.dst)]));
    }
    beta[static_cast<std::size_t>(s)] = acc;
  }

  Posteriors post;
  post.total = beta[static_cast<std::size_t>(f.start)];
  if (post.total == ring.zero())
    throw DegenerateGraphError("forward_backward: no complete path (total weight is zero)");
  post.arc_posterior.resize(f.arcs.size());
  for (std::size_t i = 0; i < f.arcs.size(); ++i) {
    const Arc& a = f.arcs[i];
    post.arc_posterior[i] = std::exp(alpha[static_cast<std::size_t>(a.src)] + a.weight +
                                     beta[static_cast<std::size_t>(a.dst)] - post.total);
  }
  post.state_occupancy.resize(n);
  for (std::size_t s = 0; s < n; ++s)
    post.state_occupancy[s] = std::exp(alpha[s] + beta[s] - post.total);
  return post;
}

Path shortest_path(const WeightedFst& f) {
  if (f.empty()) throw DegenerateGraphError("shortest_path: empty machine");
  const std::size_t n = static_cast<std::size_t>(f.num_states);
  std::vector<double> best(n, kLogZero);
  std::vector<std::int32_t> pred(n, -1);
  best[static_cast<std::size_t>(f.start)] = 0.0;

  auto lex_less = [&](const std::vector<std::int32_t>& a,
                      const std::vector<std::int32_t>& b) {
    return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
  };

  if (is_acyclic(f)) {
    auto order = topological_order(f);
    auto by_state = f.arcs_by_state();
    for (StateId s : order) {
      double w = best[static_cast<std::size_t>(s)];
      if (w == kLogZero) continue;
      for (std::int32_t ai : by_state[static_cast<std::size_t>(s)]) {
        const Arc& a = f.arcs[static_cast<std::size_t>(ai)];
        double cand = w + a.weight;
        double& cur = best[static_cast<std::size_t>(a.dst)];
        if (cand > cur) {
          cur = cand;
          pred[static_cast<std::size_t>(a.dst)] = ai;
        } else if (cand == cur && pred[static_cast<std::size_t>(a.dst)] >= 0) {
          // Equal weight: keep the lexicographically smaller arc sequence.
          auto challenger = pred_chain_path(pred, f, s);
          challenger.push_back(ai);
          if (lex_less(challenger, pred_chain_path(pred, f, a.dst)))
            pred[static_cast<std::size_t>(a.dst)] = ai;
        }
      }
    }
  } else {
    // Bellman-Ford; requires no gain cycle.  Only strict improvements update,
    // which keeps the predecessor relation acyclic.
    for (StateId round = 0; round + 1 < f.num_states; ++round) {
      bool changed = false;
      for (std::size_t i = 0; i < f.arcs.size(); ++i) {
        const Arc& a = f.arcs[i];
        double w = best[static_cast<std::size_t>(a.src)];
        if (w == kLogZero) continue;
        if (w + a.weight > best[static_cast<std::size_t>(a.dst)]) {
          best[static_cast<std::size_t>(a.dst)] = w + a.weight;
          pred[static_cast<std::size_t>(a.dst)] = static_cast<std::int32_t>(i);
          changed = true;
        }
      }
      if (!changed) break;
    }
    for (const Arc& a : f.arcs) {
      double w = best[static_cast<std::size_t>(a.src)];
      if (w != kLogZero && w + a.weight > best[static_cast<std::size_t>(a.dst)] + 1e-12)
        throw UnsupportedInputError("shortest_path: gain cycle detected");
    }
  }

  StateId best_end = kNoState;
  double best_total = kLogZero;
  std::vector<std::int32_t> best_path;
  for (StateId s = 0; s < f.num_states; ++s) {
    if (!f.is_final(s) || best[static_cast<std::size_t>(s)] == kLogZero) continue;
    double total = best[static_cast<std::size_t>(s)] + f.final_weight(s);
    if (total > best_total) {
      best_total = total;
      best_end = s;
      best_path = pred_chain_path(pred, f, s);
    } else if (total == best_total && best_end != kNoState) {
      auto cand = pred_chain_path(pred, f, s);
      if (lex_less(cand, best_path)) {
        best_end = s;
        best_path = std::move(cand);
      }
    }
  }
  if (best_end == kNoState)
    throw DegenerateGraphError("shortest_path: no complete path");
  return make_path(f, best_path);
}

WeightedFst prune(const WeightedFst& f, double beam) {
  if (beam < 0) throw ContractError("prune: beam must be non-negative");
  WeightedFst empty;
  empty.isyms = f.isyms;
  empty.osyms = f.osyms;
  if (f.empty()) return empty;
  auto order = topological_order(f);
  auto by_state = f.arcs_by_state();
  const std::size_t n = static_cast<std::size_t>(f.num_states);

  std::vector<double> fw(n, kLogZero), bw(n, kLogZero);
  fw[static_cast<std::size_t>(f.start)] = 0.0;
  for (StateId s : order) {
    double w = fw[static_cast<std::size_t>(s)];
    if (w == kLogZero) continue;
    for (std::int32_t ai : by_state[static_cast<std::size_t>(s)]) {
      const Arc& a = f.arcs[static_cast<std::size_t>(ai)];
      fw[static_cast<std::size_t>(a.dst)] =
          std::max(fw[static_cast<std::size_t>(a.dst)], w + a.weight);
    }
  }
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    StateId s = *it;
    double acc = f.final_weight(s);
    for (std::int32_t ai : by_state[static_cast<std::size_t>(s)]) {
      const Arc& a = f.arcs[static_cast<std::size_t>(ai)];
      acc = std::max(acc, a.weight + bw[static_cast<std::size_t>(a.dst)]);
    }
    bw[static_cast<std::size_t>(s)] = acc;
  }
  double best_total = bw[static_cast<std::size_t>(f.start)];
  if (best_total == kLogZero) return empty;

  WeightedFst kept = f;
  kept.arcs.clear();
  for (const Arc& a : f.arcs) {
    double through = fw[static_cast<std::size_t>(a.src)] + a.weight +
                     bw[static_cast<std::size_t>(a.dst)];
    if (through >= best_total - beam) kept.arcs.push_back(a);
  }
  return connect(kept);
}

PathSet enumerate_paths(const WeightedFst& f, std::size_t limit, std::size_t max_length) {
  PathSet out;
  if (f.empty()) return out;
  if (max_length == 0 && !is_acyclic(f))
    throw UnsupportedInputError("enumerate_paths: cyclic machine needs a max_length bound");
  auto by_state = f.arcs_by_state();

  struct Frame {
    StateId state;
    std::size_t cursor;  // index into by_state[state]
  };
  std::vector<Frame> stack{{f.start, 0}};
  std::vector<std::int32_t> arc_stack;

  auto record = [&](StateId s) {
    if (!f.is_final(s)) return true;
    if (out.paths.size() >= limit) {
      out.truncated = true;
      return false;
    }
    out.paths.push_back(make_path(f, arc_stack));
    return true;
  };

  if (!record(f.start)) return out;
  while (!stack.empty()) {
    Frame& top = stack.back();
    const auto& outgoing = by_state[static_cast<std::size_t>(top.state)];
    if (top.cursor >= outgoing.size() ||
        (max_length != 0 && arc_stack.size() >= max_length)) {
      stack.pop_back();
      if (!arc_stack.empty()) arc_stack.pop_back();
      continue;
    }
    std::int32_t ai = outgoing[top.cursor++];
    StateId next = f.arcs[static_cast<std::size_t>(ai)].dst;
    arc_stack.push_back(ai);
    if (!record(next)) return out;
    stack.push_back(Frame{next, 0});
  }
  return out;
}

}  // namespace fst
}  // namespace latkit
