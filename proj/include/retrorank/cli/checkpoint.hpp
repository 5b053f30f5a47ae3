#pragma once

#include <filesystem>
#include <iosfwd>

#include "retrorank/numcore/errors.hpp"
#include "retrorank/scoring/model.hpp"
#include "retrorank/training/config.hpp"

namespace retrorank {

class CheckpointError : public Error {
 public:
  using Error::Error;
};

// Binary layout, all integers and floats little-endian:
//   "RRK1"
//   u8   model kind (0 lstm_de, 1 hre_de, 2 smn)
//   u64  init seed
//   str  config snapshot (key = value text)
//   str  context transforms, str response transforms, str flip scope
//   u64  vocabulary size, then one str per token in id order
//   u64  parameter count, then per parameter:
//          str name, u64 rank, u64 dims[rank], f64 values[prod(dims)]
// where str is a u64 byte length followed by UTF-8 bytes.
void save_checkpoint(std::ostream& out, const Scorer& scorer, const TrainingConfig& config);
void save_checkpoint(const std::filesystem::path& path, const Scorer& scorer, const TrainingConfig& config);

struct LoadedCheckpoint {
  TrainingConfig config;
  Scorer scorer;
};

// Throws CheckpointError on bad magic, truncation, or any mismatch between the
// stored tensors and the model the header describes.
LoadedCheckpoint load_checkpoint(std::istream& in);
LoadedCheckpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace retrorank
