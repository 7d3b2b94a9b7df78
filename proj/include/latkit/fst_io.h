// latkit/fst_io.h
// Text FST serialization: `src dst ilabel olabel cost` arc lines followed by
// `state cost` final lines; costs are negated log weights printed with 9
// significant digits.  Symbol tables serialize as `symbol<TAB>id` lines with
// epsilon at id 0.

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

#ifndef LATKIT_FST_IO_H_
#define LATKIT_FST_IO_H_

#include <iosfwd>
#include <string>

#include "latkit/fst.h"

namespace latkit {
namespace fst {

// The first line of a serialized machine names the start state, so arcs
// leaving the start are written first (stable within each group).  Parsing a
// written machine and writing it again is byte-identical.
std::string write_fst_text(const WeightedFst& f);
void write_fst_file(const WeightedFst& f, const std::string& path);

// Symbol tables are not part of the text format; pass them in (or leave the
// defaults and attach tables afterwards).
WeightedFst read_fst_text(const std::string& text,
                          const SymbolTable& isyms = SymbolTable(),
                          const SymbolTable& osyms = SymbolTable());
WeightedFst read_fst_file(const std::string& path,
                          const SymbolTable& isyms = SymbolTable(),
                          const SymbolTable& osyms = SymbolTable());

std::string write_symbols_text(const SymbolTable& syms);
void write_symbols_file(const SymbolTable& syms, const std::string& path);
SymbolTable read_symbols_text(const std::string& text);
SymbolTable read_symbols_file(const std::string& path);

}  // namespace fst
}  // namespace latkit

#endif  // LATKIT_FST_IO_H_
