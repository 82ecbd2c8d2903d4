// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>

#include "relhal/data/normalizer.hpp"
#include "relhal/diffusion/diffusion_model.hpp"
#include "relhal/nn/noise_net.hpp"

namespace relhal::diffusion {

// On-disk layout (all integers little-endian):
//   8 bytes   magic "RELHALCK"
//   uint32    format version
//   uint64    header length N
//   N bytes   JSON header (layer widths, activations, embedding dim,
//             schedule, normalizer stats, dataset name, seed, ...)
//   float32[] parameters, layer by layer: weight (column-major) then bias
struct Checkpoint {
  static constexpr std::uint32_t kFormatVersion = 1;

  nn::NoiseNet network;
  int schedule_steps = 1000;
  double beta_start = 1e-4;
  double beta_end = 1e-2;
  data::Normalizer normalizer;
  std::string dataset;
  std::uint64_t seed = 0;
  int best_epoch = -1;
  double best_val_loss = 0.0;

  DiffusionModel to_model() const;
};

void write_checkpoint(std::ostream& out, const Checkpoint& ckpt);
Checkpoint read_checkpoint(std::istream& in, const std::string& source = "<stream>");

// Writes to a sibling temporary file and renames it over `path`, so an
// interrupted write never clobbers an existing checkpoint.
void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace relhal::diffusion
