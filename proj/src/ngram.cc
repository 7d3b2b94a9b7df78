// latkit/ngram.cc

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

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "latkit/common.h"

namespace latkit {
namespace lm {

namespace {

constexpr double kLn10 = 2.302585092994046;
// ARPA convention for the unpredictable <s> event.
constexpr double kBosLog10Prob = -99.0;

bool starts_with_bos(const Gram& g) { return !g.empty() && g.front() == kBos; }

}  // namespace

Corpus read_corpus_text(const std::string& text) {
  Corpus corpus;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    auto toks = split_ws(line);
    if (!toks.empty()) corpus.sentences.push_back(std::move(toks));
  }
  return corpus;
}

Corpus read_corpus_file(const std::string& path) {
  return read_corpus_text(read_file(path));
}

NgramModel::NgramModel(int order, fst::SymbolTable vocab, std::vector<Table> tables)
    : order_(order), vocab_(std::move(vocab)), tables_(std::move(tables)) {
  unk_id_ = vocab_.find(kUnkSymbol);
  if (unk_id_ == fst::kNoState)
    throw ConfigError("ngram model vocabulary must contain " + std::string(kUnkSymbol));
}

const NgramModel::Table& NgramModel::table(int k) const {
  if (k < 1 || k > order_) throw ContractError("ngram table order out of range");
  return tables_[static_cast<std::size_t>(k - 1)];
}

TokenId NgramModel::token_id(const std::string& token) const {
  if (token == kBosSymbol) return kBos;
  if (token == kEosSymbol) return kEos;
  TokenId id = vocab_.find(token);
  return id == fst::kNoState ? unk_id_ : id;
}

double NgramModel::logprob(std::span<const TokenId> context, TokenId token) const {
  std::size_t keep = std::min<std::size_t>(context.size(),
                                           static_cast<std::size_t>(order_ - 1));
  Gram ctx(context.end() - static_cast<std::ptrdiff_t>(keep), context.end());
  double acc = 0.0;
  for (;;) {
    Gram g = ctx;
    g.push_back(token);
    const Table& t = tables_[ctx.size()];
    auto it = t.find(g);
    if (it != t.end()) return acc + it->second.logp;
    if (ctx.empty())
      throw ContractError("ngram model is missing a unigram entry; model is malformed");
    // charge the backoff weight of the context, then shorten it
    const Table& ct = tables_[ctx.size() - 1];
    auto cit = ct.find(ctx);
    if (cit != ct.end() && cit->second.has_bow) acc += cit->second.bow;
    ctx.erase(ctx.begin());
  }
}

double NgramModel::sentence_logprob(const std::vector<std::string>& tokens) const {
  std::vector<TokenId> ctx{kBos};
  double total = 0.0;
  for (const auto& tok : tokens) {
    TokenId id = token_id(tok);
    total += logprob(ctx, id);
    ctx.push_back(id);
  }
  total += logprob(ctx, kEos);
  return total;
}

double perplexity(const NgramModel& model, const std::vector<std::string>& sentence) {
  if (sentence.empty()) throw ContractError("perplexity: sentence must be non-empty");
  double lp = model.sentence_logprob(sentence);
  double n = static_cast<double>(sentence.size()) + 1.0;
  return std::exp(-lp / n);
}

NgramModel train_ngram(const Corpus& corpus, const TrainOptions& opts) {
  if (corpus.sentences.empty()) throw ConfigError("train_ngram: empty corpus");
  if (opts.order < 1 || opts.order > 4)
    throw ConfigError("train_ngram: order must be in 1..4");
  const int order = opts.order;

  fst::SymbolTable vocab;
  if (opts.vocab != nullptr) {
    vocab = *opts.vocab;
    if (vocab.find(kUnkSymbol) == fst::kNoState)
      throw ConfigError("external vocabulary must contain " + std::string(kUnkSymbol));
  } else {
    vocab.add(kUnkSymbol);
    for (const auto& sentence : corpus.sentences)
      for (const auto& tok : sentence) vocab.add(tok);
  }
  const TokenId unk = vocab.find(kUnkSymbol);

  // Raw counts per order over singly <s>-padded, </s>-terminated sentences.
  using CountTable = std::map<Gram, std::int64_t>;
  std::vector<CountTable> raw(static_cast<std::size_t>(order));
  for (const auto& sentence : corpus.sentences) {
    std::vector<TokenId> seq{kBos};
    for (const auto& tok : sentence) {
      TokenId id = vocab.find(tok);
      seq.push_back(id == fst::kNoState ? unk : id);
    }
    seq.push_back(kEos);
    for (std::size_t i = 1; i < seq.size(); ++i) {
      for (int k = 1; k <= order; ++k) {
        if (i + 1 < static_cast<std::size_t>(k)) break;
        Gram g(seq.begin() + static_cast<std::ptrdiff_t>(i + 1 - static_cast<std::size_t>(k)),
               seq.begin() + static_cast<std::ptrdiff_t>(i + 1));
        raw[static_cast<std::size_t>(k - 1)][g]++;
      }
    }
  }

  // Effective counts: raw at the highest order; continuation counts below,
  // except <s>-initial grams which can never appear as continuations.
  std::vector<CountTable> eff(static_cast<std::size_t>(order));
  eff[static_cast<std::size_t>(order - 1)] = raw[static_cast<std::size_t>(order - 1)];
  for (int k = order - 1; k >= 1; --k) {
    CountTable cont;
    for (const auto& [g, c] : raw[static_cast<std::size_t>(k)]) {
      (void)c;
      Gram suffix(g.begin() + 1, g.end());
      cont[suffix]++;
    }
    CountTable& out = eff[static_cast<std::size_t>(k - 1)];
    for (const auto& [g, c] : raw[static_cast<std::size_t>(k - 1)]) {
      if (starts_with_bos(g)) {
        out[g] = c;
      } else {
        auto it = cont.find(g);
        out[g] = it == cont.end() ? 0 : it->second;
      }
    }
  }

  // Predicted event space: every vocabulary token plus </s>; <s> and <eps>
  // are never predicted.
  std::vector<TokenId> predicted;
  for (TokenId id = 1; id < static_cast<TokenId>(vocab.size()); ++id) predicted.push_back(id);
  predicted.push_back(kEos);
  const double vp = static_cast<double>(predicted.size());

  // Per-order smoothing selection.
  std::vector<double> discount(static_cast<std::size_t>(order), 0.0);
  std::vector<bool> use_addk(static_cast<std::size_t>(order), false);
  for (int k = 1; k <= order; ++k) {
    std::int64_t n1 = 0, n2 = 0;
    for (const auto& [g, c] : eff[static_cast<std::size_t>(k - 1)]) {
      if (k == 1 && starts_with_bos(g)) continue;
      if (c == 1) ++n1;
      if (c == 2) ++n2;
    }
    if (opts.smoothing == Smoothing::kAddK || n1 == 0 || n2 == 0) {
      use_addk[static_cast<std::size_t>(k - 1)] = true;
    } else {
      discount[static_cast<std::size_t>(k - 1)] =
          static_cast<double>(n1) / (static_cast<double>(n1) + 2.0 * static_cast<double>(n2));
    }
  }

  std::vector<NgramModel::Table> tables(static_cast<std::size_t>(order));

  // Unigrams: complete coverage of the predicted space plus the <s> entry.
  {
    const CountTable& counts = eff[0];
    double tot = 0.0;
    std::int64_t distinct = 0;
    for (const auto& [g, c] : counts) {
      if (starts_with_bos(g)) continue;
      tot += static_cast<double>(c);
      if (c > 0) ++distinct;
    }
    if (tot <= 0) throw ConfigError("train_ngram: corpus has no countable events");
    NgramModel::Table& t = tables[0];
    const bool addk = use_addk[0];
    const double d = discount[0];
    for (TokenId w : predicted) {
      Gram g{w};
      auto it = counts.find(g);
      double c = it == counts.end() ? 0.0 : static_cast<double>(it->second);
      double p = addk ? (c + opts.add_k) / (tot + opts.add_k * vp)
                      : (std::max(c - d, 0.0) + d * static_cast<double>(distinct) / vp) / tot;
      // add-k with k = 0 is plain maximum likelihood; unseen tokens then
      // carry log probability -inf.
      t[g].logp = std::log(p);
    }
    t[Gram{kBos}].logp = kBosLog10Prob * kLn10;
  }

  // Higher orders, bottom-up so interpolation can score with lower tables.
  auto score_lower = [&tables](const Gram& ctx, TokenId w) {
    Gram c = ctx;
    double acc = 0.0;
    for (;;) {
      Gram g = c;
      g.push_back(w);
      auto it = tables[c.size()].find(g);
      if (it != tables[c.size()].end()) return acc + it->second.logp;
      auto cit = tables[c.size() - 1].find(c);
      if (cit != tables[c.size() - 1].end() && cit->second.has_bow) acc += cit->second.bow;
      if (c.empty()) throw ContractError("train_ngram: missing unigram during scoring");
      c.erase(c.begin());
    }
  };

  for (int k = 2; k <= order; ++k) {
    const CountTable& counts = eff[static_cast<std::size_t>(k - 1)];
    const bool addk = use_addk[static_cast<std::size_t>(k - 1)];
    const double d = discount[static_cast<std::size_t>(k - 1)];

    // Group grams by context (contiguous in the sorted map).
    auto it = counts.begin();
    while (it != counts.end()) {
      Gram ctx(it->first.begin(), it->first.end() - 1);
      auto end = it;
      double tot = 0.0;
      std::int64_t distinct = 0;
      while (end != counts.end() &&
             std::equal(ctx.begin(), ctx.end(), end->first.begin(),
                        end->first.end() - 1)) {
        tot += static_cast<double>(end->second);
        if (end->second > 0) ++distinct;
        ++end;
      }
      Gram lower_ctx(ctx.begin() + 1, ctx.end());
      if (tot > 0) {
        double gamma = addk ? 0.0 : d * static_cast<double>(distinct) / tot;
        double seen_mass = 0.0, seen_lower = 0.0;
        for (auto g = it; g != end; ++g) {
          TokenId w = g->first.back();
          double c = static_cast<double>(g->second);
          double p_low = std::exp(score_lower(lower_ctx, w));
          double p = addk ? (c + opts.add_k) / (tot + opts.add_k * vp)
                          : std::max(c - d, 0.0) / tot + gamma * p_low;
          tables[static_cast<std::size_t>(k - 1)][g->first].logp = std::log(p);
          seen_mass += p;
          seen_lower += p_low;
        }
        // Backoff weight lives on the context's entry one table down.
        double bow;
        if (addk) {
          double denom = 1.0 - seen_lower;
          bow = (denom <= 1e-12 || seen_mass >= 1.0) ? 1.0 : (1.0 - seen_mass) / denom;
        } else {
          bow = gamma > 0 ? gamma : 1.0;
        }
        auto ctx_entry = tables[static_cast<std::size_t>(k - 2)].find(ctx);
        if (ctx_entry == tables[static_cast<std::size_t>(k - 2)].end())
          throw ContractError("train_ngram: context without a stored lower-order entry");
        ctx_entry->second.bow = std::log(bow);
        ctx_entry->second.has_bow = true;
      }
      it = end;
    }
  }

  return NgramModel(order, std::move(vocab), std::move(tables));
}

fst::WeightedFst compile_grammar(const NgramModel& model) {
  using fst::StateId;
  using fst::WeightedFst;
  const int order = model.order();

  WeightedFst g;
  for (std::size_t i = 1; i < model.vocab().size(); ++i)
    g.isyms.add(model.vocab().symbols()[i]);
  g.osyms = g.isyms;

  // Context states: prefixes of stored grams (length 1..order-1 entries that
  // carry continuations) plus the empty context.
  std::map<Gram, StateId> states;
  auto ensure_state = [&](const Gram& ctx) {
    auto it = states.find(ctx);
    if (it != states.end()) return it->second;
    StateId s = g.add_state();
    states.emplace(ctx, s);
    return s;
  };
  ensure_state(Gram{});
  for (int k = 2; k <= order; ++k)
    for (const auto& [gram, entry] : model.table(k)) {
      (void)entry;
      ensure_state(Gram(gram.begin(), gram.end() - 1));
    }

  auto destination = [&](const Gram& gram) {
    // Longest suffix of the gram that is a context state.
    std::size_t max_len =
        std::min<std::size_t>(gram.size(), static_cast<std::size_t>(order - 1));
    for (std::size_t len = max_len;; --len) {
      Gram suffix(gram.end() - static_cast<std::ptrdiff_t>(len), gram.end());
      auto it = states.find(suffix);
      if (it != states.end()) return it->second;
      if (len == 0) throw ContractError("compile_grammar: empty context missing");
    }
  };

  for (int k = 1; k <= order; ++k) {
    for (const auto& [gram, entry] : model.table(k)) {
      Gram ctx(gram.begin(), gram.end() - 1);
      auto state_it = states.find(ctx);
      if (state_it == states.end()) continue;  // context never extended
      StateId src = state_it->second;
      TokenId w = gram.back();
      if (w == kEos) {
        g.set_final(src, entry.logp);
      } else if (w != kBos) {
        g.add_arc(src, destination(gram), w, w, entry.logp);
      }
    }
  }
  // Epsilon backoff arcs from every non-empty context to its longest proper
  // suffix context.
  for (const auto& [ctx, src] : states) {
    if (ctx.empty()) continue;
    Gram shorter(ctx.begin() + 1, ctx.end());
    StateId dst = destination(shorter.empty() ? Gram{} : shorter);
    const auto& t = model.table(static_cast<int>(ctx.size()));
    auto it = t.find(ctx);
    double bow = (it != t.end() && it->second.has_bow) ? it->second.bow : 0.0;
    g.add_arc(src, dst, fst::kEpsilon, fst::kEpsilon, bow);
  }

  Gram start_ctx{kBos};
  auto start_it = states.find(start_ctx);
  g.set_start(start_it != states.end() ? start_it->second : states.at(Gram{}));
  return connect(g);
}

std::string write_arpa(const NgramModel& model) {
  std::ostringstream out;
  auto token_name = [&](TokenId id) -> std::string {
    if (id == kBos) return kBosSymbol;
    if (id == kEos) return kEosSymbol;
    return model.vocab().name(id);
  };
  out << "\\data\\\n";
  for (int k = 1; k <= model.order(); ++k)
    out << "ngram " << k << "=" << model.table(k).size() << "\n";
  for (int k = 1; k <= model.order(); ++k) {
    out << "\n\\" << k << "-grams:\n";
    for (const auto& [gram, entry] : model.table(k)) {
      out << format_g9(entry.logp / kLn10) << '\t';
      for (std::size_t i = 0; i < gram.size(); ++i) {
        if (i) out << ' ';
        out << token_name(gram[i]);
      }
      if (entry.has_bow) out << '\t' << format_g9(entry.bow / kLn10);
      out << '\n';
    }
  }
  out << "\n\\end\\\n";
  return out.str();
}

void write_arpa_file(const NgramModel& model, const std::string& path) {
  write_file(path, write_arpa(model));
}

NgramModel read_arpa(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  // \data\ header
  std::vector<std::size_t> counts;
  bool in_data = false;
  while (std::getline(in, line)) {
    std::string t = trim(line);
    if (t == "\\data\\") {
      in_data = true;
      continue;
    }
    if (in_data) {
      if (t.empty()) break;
      auto eq = t.find('=');
      if (t.rfind("ngram", 0) != 0 || eq == std::string::npos)
        throw ParseError("arpa: bad \\data\\ line: " + t);
      counts.push_back(static_cast<std::size_t>(std::stoul(t.substr(eq + 1))));
    }
  }
  if (!in_data || counts.empty()) throw ParseError("arpa: missing \\data\\ section");
  const int order = static_cast<int>(counts.size());

  fst::SymbolTable vocab;
  vocab.add(kUnkSymbol);
  std::vector<NgramModel::Table> tables(static_cast<std::size_t>(order));

  // First pass over the 1-grams establishes the vocabulary; grams at higher
  // orders then resolve names.  We read sections in file order, which the
  // format guarantees to be 1..order.
  int current = 0;
  auto resolve = [&](const std::string& name) -> TokenId {
    if (name == kBosSymbol) return kBos;
    if (name == kEosSymbol) return kEos;
    TokenId id = vocab.find(name);
    if (id == fst::kNoState) {
      if (current == 1) return vocab.add(name);
      throw ParseError("arpa: token '" + name + "' not in unigram vocabulary");
    }
    return id;
  };
  while (std::getline(in, line)) {
    std::string t = trim(line);
    if (t.empty()) continue;
    if (t == "\\end\\") break;
    if (t.size() > 2 && t.front() == '\\' && t.find("-grams:") != std::string::npos) {
      current = std::stoi(t.substr(1));
      if (current < 1 || current > order) throw ParseError("arpa: bad section " + t);
      continue;
    }
    if (current == 0) throw ParseError("arpa: entry before any section: " + t);
    auto toks = split_ws(t);
    std::size_t expect = static_cast<std::size_t>(current) + 1;
    if (toks.size() != expect && toks.size() != expect + 1)
      throw ParseError("arpa: bad entry width: " + t);
    NgramModel::Entry entry;
    entry.logp = std::stod(toks[0]) * kLn10;
    Gram gram;
    for (int i = 0; i < current; ++i) gram.push_back(resolve(toks[static_cast<std::size_t>(i) + 1]));
    if (toks.size() == expect + 1) {
      entry.bow = std::stod(toks.back()) * kLn10;
      entry.has_bow = true;
    }
    tables[static_cast<std::size_t>(current - 1)][gram] = entry;
  }
  for (int k = 1; k <= order; ++k)
    if (tables[static_cast<std::size_t>(k - 1)].size() != counts[static_cast<std::size_t>(k - 1)])
      throw ParseError("arpa: section " + std::to_string(k) + " count mismatch");
  return NgramModel(order, std::move(vocab), std::move(tables));
}

NgramModel read_arpa_file(const std::string& path) {
  return read_arpa(read_file(path));
}

}  // namespace lm
}  // namespace latkit
