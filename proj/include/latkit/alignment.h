// latkit/alignment.h
// Phone-aligned utterances shared between the aligner, pronunciation
// estimation, and numerator supervision building.  Frame indices are output
// frames (after acoustic-model subsampling).

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

#ifndef LATKIT_ALIGNMENT_H_
#define LATKIT_ALIGNMENT_H_

#include <string>
#include <vector>

#include "latkit/fst.h"

namespace latkit {

struct PhoneSpan {
  fst::Label phone = fst::kEpsilon;
  int begin = 0;  // inclusive
  int end = 0;    // exclusive
};

struct AlignedWord {
  fst::Label word = fst::kEpsilon;
  std::size_t pron_index = 0;
  bool silence_after = false;
};

struct UtteranceAlignment {
  std::string utt_id;
  int num_frames = 0;
  bool silence_before = false;
  std::vector<AlignedWord> words;
  std::vector<PhoneSpan> phones;  // tiles [0, num_frames), silence included
};

}  // namespace latkit

#endif  // LATKIT_ALIGNMENT_H_
