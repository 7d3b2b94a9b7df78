// latkit/features.h
// Binary archive of per-utterance T x dim row-major 32-bit-float feature
// matrices keyed by utterance id.

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

#ifndef LATKIT_FEATURES_H_
#define LATKIT_FEATURES_H_

#include <map>
#include <string>

#include "latkit/types.h"

namespace latkit {
namespace am {

// In memory the convention is (dim x T) with columns as frames, which shares
// its byte layout with the on-disk row-major T x dim records.
class FeatureArchive {
 public:
  void put(const std::string& utt_id, const MatrixF& feats);
  bool has(const std::string& utt_id) const { return feats_.count(utt_id) > 0; }
  const MatrixF& get(const std::string& utt_id) const;
  Matrix get_double(const std::string& utt_id) const;
  std::size_t size() const { return feats_.size(); }
  const std::map<std::string, MatrixF>& entries() const { return feats_; }

 private:
  std::map<std::string, MatrixF> feats_;
};

std::string write_feature_archive(const FeatureArchive& archive);
void write_feature_archive_file(const FeatureArchive& archive, const std::string& path);
FeatureArchive read_feature_archive(const std::string& bytes);
FeatureArchive read_feature_archive_file(const std::string& path);

}  // namespace am
}  // namespace latkit

#endif  // LATKIT_FEATURES_H_
