// latkit/features.cc

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

#include "latkit/features.h"

#include <cstring>

#include "latkit/common.h"

namespace latkit {
namespace am {

namespace {
const char kMagic[] = "latkit-feats-1\n";
}

void FeatureArchive::put(const std::string& utt_id, const MatrixF& feats) {
  if (utt_id.empty()) throw ContractError("feature archive: empty utterance id");
  feats_[utt_id] = feats;
}

const MatrixF& FeatureArchive::get(const std::string& utt_id) const {
  auto it = feats_.find(utt_id);
  if (it == feats_.end())
    throw ContractError("feature archive: no such utterance '" + utt_id + "'");
  return it->second;
}

Matrix FeatureArchive::get_double(const std::string& utt_id) const {
  return get(utt_id).cast<double>();
}

std::string write_feature_archive(const FeatureArchive& archive) {
  std::string out(kMagic);
  auto put_u64 = [&out](std::uint64_t v) {
    char buf[8];
    std::memcpy(buf, &v, 8);
    out.append(buf, 8);
  };
  for (const auto& [id, m] : archive.entries()) {
    put_u64(id.size());
    out.append(id);
    put_u64(static_cast<std::uint64_t>(m.cols()));  // rows on disk = frames
    put_u64(static_cast<std::uint64_t>(m.rows()));  // cols on disk = dim
    // Column-major (dim x T) in memory is byte-identical to row-major T x dim.
    out.append(reinterpret_cast<const char*>(m.data()),
               static_cast<std::size_t>(m.size()) * sizeof(float));
  }
  return out;
}

void write_feature_archive_file(const FeatureArchive& archive, const std::string& path) {
  write_file(path, write_feature_archive(archive));
}

FeatureArchive read_feature_archive(const std::string& bytes) {
  FeatureArchive archive;
  std::size_t pos = 0;
  const std::size_t magic_len = sizeof(kMagic) - 1;
  if (bytes.size() < magic_len || bytes.compare(0, magic_len, kMagic) != 0)
    throw ParseError("feature archive: bad magic");
  pos = magic_len;
  auto get_u64 = [&](std::uint64_t* v) {
    if (pos + 8 > bytes.size()) throw ParseError("feature archive: truncated");
    std::memcpy(v, bytes.data() + pos, 8);
    pos += 8;
  };
  while (pos < bytes.size()) {
    std::uint64_t name_len = 0, frames = 0, dim = 0;
    get_u64(&name_len);
    if (pos + name_len > bytes.size()) throw ParseError("feature archive: truncated name");
    std::string id = bytes.substr(pos, name_len);
    pos += name_len;
    get_u64(&frames);
    get_u64(&dim);
    std::size_t count = static_cast<std::size_t>(frames * dim);
    if (pos + count * sizeof(float) > bytes.size())
      throw ParseError("feature archive: truncated data for '" + id + "'");
    MatrixF m(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(frames));
    std::memcpy(m.data(), bytes.data() + pos, count * sizeof(float));
    pos += count * sizeof(float);
    archive.put(id, m);
  }
  return archive;
}

FeatureArchive read_feature_archive_file(const std::string& path) {
  return read_feature_archive(read_file(path));
}

}  // namespace am
}  // namespace latkit
