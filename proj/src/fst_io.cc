// latkit/fst_io.cc

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

#include "latkit/fst_io.h"

#include <algorithm>
#include <sstream>

#include "latkit/common.h"

namespace latkit {
namespace fst {

namespace {

long parse_long(const std::string& tok, const char* what) {
  try {
    std::size_t pos = 0;
    long v = std::stol(tok, &pos);
    if (pos != tok.size()) throw std::invalid_argument(tok);
    return v;
  } catch (const std::exception&) {
    throw ParseError(std::string("bad ") + what + ": '" + tok + "'");
  }
}

double parse_double(const std::string& tok, const char* what) {
  try {
    std::size_t pos = 0;
    double v = std::stod(tok, &pos);
    if (pos != tok.size()) throw std::invalid_argument(tok);
    return v;
  } catch (const std::exception&) {
    throw ParseError(std::string("bad ") + what + ": '" + tok + "'");
  }
}

}  // namespace

std::string write_fst_text(const WeightedFst& f) {
  std::ostringstream out;
  if (f.empty()) return out.str();
  auto arc_line = [&](const Arc& a) {
    out << a.src << ' ' << a.dst << ' ' << a.ilabel << ' ' << a.olabel << ' '
        << format_g9(-a.weight) << '\n';
  };
  for (const Arc& a : f.arcs)
    if (a.src == f.start) arc_line(a);
  for (const Arc& a : f.arcs)
    if (a.src != f.start) arc_line(a);
  bool start_has_arcs = std::any_of(f.arcs.begin(), f.arcs.end(),
                                    [&](const Arc& a) { return a.src == f.start; });
  if (!start_has_arcs) {
    if (!f.is_final(f.start))
      throw ContractError("write_fst_text: start state has no arc and no final weight; "
                          "the format cannot express it");
    out << f.start << ' ' << format_g9(-f.final_weight(f.start)) << '\n';
  }
  for (StateId s = 0; s < f.num_states; ++s) {
    if (!start_has_arcs && s == f.start) continue;
    if (f.is_final(s)) out << s << ' ' << format_g9(-f.final_weight(s)) << '\n';
  }
  return out.str();
}

void write_fst_file(const WeightedFst& f, const std::string& path) {
  write_file(path, write_fst_text(f));
}

WeightedFst read_fst_text(const std::string& text, const SymbolTable& isyms,
                          const SymbolTable& osyms) {
  WeightedFst f;
  f.isyms = isyms;
  f.osyms = osyms;
  std::istringstream in(text);
  std::string line;
  long max_state = -1;
  bool saw_first = false;
  std::vector<std::pair<long, double>> finals;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto toks = split_ws(line);
    if (toks.empty()) continue;
    if (toks.size() == 5) {
      Arc a;
      a.src = static_cast<StateId>(parse_long(toks[0], "state id"));
      a.dst = static_cast<StateId>(parse_long(toks[1], "state id"));
      a.ilabel = static_cast<Label>(parse_long(toks[2], "input label"));
      a.olabel = static_cast<Label>(parse_long(toks[3], "output label"));
      a.weight = -parse_double(toks[4], "cost");
      if (a.src < 0 || a.dst < 0 || a.ilabel < 0 || a.olabel < 0)
        throw ParseError("negative id at line " + std::to_string(lineno));
      max_state = std::max({max_state, static_cast<long>(a.src), static_cast<long>(a.dst)});
      if (!saw_first) {
        f.start = a.src;
        saw_first = true;
      }
      f.arcs.push_back(a);
    } else if (toks.size() == 2) {
      long s = parse_long(toks[0], "state id");
      double cost = parse_double(toks[1], "cost");
      if (s < 0) throw ParseError("negative id at line " + std::to_string(lineno));
      max_state = std::max(max_state, s);
      if (!saw_first) {
        f.start = static_cast<StateId>(s);
        saw_first = true;
      }
      finals.emplace_back(s, -cost);
    } else {
      throw ParseError("line " + std::to_string(lineno) +
                       ": expected 5 fields (arc) or 2 fields (final)");
    }
  }
  f.num_states = static_cast<StateId>(max_state + 1);
  f.finals.assign(static_cast<std::size_t>(f.num_states), kLogZero);
  for (const auto& [s, w] : finals) f.finals[static_cast<std::size_t>(s)] = w;
  return f;
}

WeightedFst read_fst_file(const std::string& path, const SymbolTable& isyms,
                          const SymbolTable& osyms) {
  return read_fst_text(read_file(path), isyms, osyms);
}

std::string write_symbols_text(const SymbolTable& syms) {
  std::ostringstream out;
  for (std::size_t i = 0; i < syms.size(); ++i)
    out << syms.symbols()[i] << '\t' << i << '\n';
  return out.str();
}

void write_symbols_file(const SymbolTable& syms, const std::string& path) {
  write_file(path, write_symbols_text(syms));
}

SymbolTable read_symbols_text(const std::string& text) {
  SymbolTable syms;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto toks = split_ws(line);
    if (toks.empty()) continue;
    if (toks.size() != 2)
      throw ParseError("symbol table line " + std::to_string(lineno) + ": expected 2 fields");
    long id = parse_long(toks[1], "symbol id");
    if (id == 0) {
      if (toks[0] != "<eps>")
        throw ParseError("symbol table must reserve id 0 for <eps>, got '" + toks[0] + "'");
      continue;
    }
    Label got = syms.add(toks[0]);
    if (got != id)
      throw ParseError("symbol table ids must be dense and increasing; '" + toks[0] +
                       "' wants " + std::to_string(id) + " but is entry " + std::to_string(got));
  }
  return syms;
}

SymbolTable read_symbols_file(const std::string& path) {
  return read_symbols_text(read_file(path));
}

}  // namespace fst
}  // namespace latkit
