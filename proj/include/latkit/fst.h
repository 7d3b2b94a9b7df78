// latkit/fst.h
// Semiring-generic weighted FSA/FST algebra.

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

#ifndef LATKIT_FST_H_
#define LATKIT_FST_H_

#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <unordered_map>
#include <vector>

namespace latkit {
namespace fst {

using StateId = std::int32_t;
using Label = std::int32_t;

inline constexpr Label kEpsilon = 0;
inline constexpr StateId kNoState = -1;

// Weights live in the log domain (log-probabilities; higher is better).
// Serialized form stores costs = -weight; conversion happens at io time.
inline constexpr double kLogZero = -std::numeric_limits<double>::infinity();

// log(exp(a) + exp(b)) via the max + log1p(exp(min - max)) identity, so the
// sum never underflows even for very negative operands.
inline double log_add(double a, double b) {
  if (a == kLogZero) return b;
  if (b == kLogZero) return a;
  const double hi = a > b ? a : b;
  const double lo = a > b ? b : a;
  return hi + std::log1p(std::exp(lo - hi));
}

enum class RingKind { kLog, kTropical };

// Value-type semiring over log-domain weights.
//   log:      plus = log-add, times = addition
//   tropical: plus = max,     times = addition
// zero = -inf annihilates times; one = 0.0 is the times identity.
struct Semiring {
  RingKind kind = RingKind::kLog;

  double plus(double a, double b) const {
    return kind == RingKind::kLog ? log_add(a, b) : (a > b ? a : b);
  }
  double times(double a, double b) const { return a + b; }
  double zero() const { return kLogZero; }
  double one() const { return 0.0; }
};

inline Semiring log_ring() { return Semiring{RingKind::kLog}; }
inline Semiring tropical_ring() { return Semiring{RingKind::kTropical}; }

// Bidirectional symbol <-> id map; id 0 is always the reserved epsilon.
class SymbolTable {
 public:
  SymbolTable() { add("<eps>"); }

  Label add(const std::string& sym);
  // Returns kNoState (-1) when absent.
  Label find(const std::string& sym) const;
  const std::string& name(Label id) const;
  std::size_t size() const { return names_; }

  bool operator==(const SymbolTable& other) const { return syms_ == other.syms_; }

  const std::vector<std::string>& symbols() const { return syms_; }

 private:
  std::vector<std::string> syms_;
  std::unordered_map<std::string, Label> ids_;
  std::size_t names_ = 0;
};

struct Arc {
  StateId src = kNoState;
  StateId dst = kNoState;
  Label ilabel = kEpsilon;
  Label olabel = kEpsilon;
  double weight = 0.0;
};

// Mutable value type; the algebra below treats instances as immutable and
// returns fresh machines.  Arc order is part of the machine's identity
// (shortest_path tie-breaking and path enumeration depend on it).
struct WeightedFst {
  StateId num_states = 0;
  StateId start = kNoState;
  std::vector<Arc> arcs;
  std::vector<double> finals;  // per state; kLogZero = non-final
  SymbolTable isyms, osyms;

  StateId add_state() {
    finals.push_back(kLogZero);
    return num_states++;
  }
  void add_arc(StateId src, StateId dst, Label ilabel, Label olabel, double weight) {
    arcs.push_back(Arc{src, dst, ilabel, olabel, weight});
  }
  void set_start(StateId s) { start = s; }
  void set_final(StateId s, double weight) { finals[static_cast<std::size_t>(s)] = weight; }
  double final_weight(StateId s) const { return finals[static_cast<std::size_t>(s)]; }
  bool is_final(StateId s) const { return final_weight(s) != kLogZero; }
  bool empty() const { return num_states == 0 || start == kNoState; }

  // Arc ids grouped by source state, in arc-id order.
  std::vector<std::vector<std::int32_t>> arcs_by_state() const;
};

bool is_acceptor(const WeightedFst& f);

struct Path {
  std::vector<std::int32_t> arc_ids;
  double weight = 0.0;           // times-accumulated, final weight included
  std::vector<Label> ilabels;    // epsilons stripped
  std::vector<Label> olabels;
};

struct PathSet {
  std::vector<Path> paths;
  bool truncated = false;
};

struct Posteriors {
  std::vector<double> arc_posterior;     // indexed by arc id
  std::vector<double> state_occupancy;   // indexed by state id
  double total = kLogZero;               // log total weight
};

// Composition.  Requires a.osyms == b.isyms.  Epsilons are handled with a
// two-state sequencing filter (a-side epsilon moves must precede b-side
// epsilon moves between matches) so each composed pairing is represented by
// exactly one path and log-domain weights stay correct.  Result is trimmed.
WeightedFst compose(const WeightedFst& a, const WeightedFst& b, const Semiring& ring);

// Removes arcs that are epsilon on both sides by folding the (acyclic)
// epsilon closure into successor arcs and final weights.  Throws
// UnsupportedInputError on an epsilon cycle.
WeightedFst remove_epsilon(const WeightedFst& f, const Semiring& ring);

// Keeps only states that are both accessible and coaccessible, renumbering
// survivors in increasing old-id order.
WeightedFst connect(const WeightedFst& f);

// Merges arcs sharing (src, dst, ilabel, olabel) into one arc with the
// plus-aggregated weight; first occurrence keeps its position.
WeightedFst merge_duplicate_arcs(const WeightedFst& f, const Semiring& ring);

// Topological order over all states; throws UnsupportedInputError if cyclic.
std::vector<StateId> topological_order(const WeightedFst& f);
bool is_acyclic(const WeightedFst& f);

// Sum (ring.plus) over complete paths of times-accumulated weights.
// Requires an acyclic machine.  Returns ring.zero() for an empty language.
double total_weight(const WeightedFst& f, const Semiring& ring);

// Log-ring forward-backward.  posterior(arc) = exp(alpha(src) + w + beta(dst)
// - total).  Throws DegenerateGraphError when no complete path exists.
Posteriors forward_backward(const WeightedFst& f);

// Best complete path in the tropical orientation (max log-weight = min cost).
// Ties resolve to the lexicographically smallest arc-id sequence on acyclic
// machines.  Cyclic machines fall back to Bellman-Ford and must have no
// gain cycle.  Throws DegenerateGraphError when no complete path exists.
Path shortest_path(const WeightedFst& f);

// Keeps exactly the arcs lying on some complete path within `beam` of the
// best path cost; acyclic only.  beam may be +inf.
WeightedFst prune(const WeightedFst& f, double beam);

// All complete paths in lexicographic arc-id order, up to `limit`; sets
// `truncated` past the limit.  Cyclic machines require max_length > 0.
PathSet enumerate_paths(const WeightedFst& f, std::size_t limit,
                        std::size_t max_length = 0);

}  // namespace fst
}  // namespace latkit

#endif  // LATKIT_FST_H_
