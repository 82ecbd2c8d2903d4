// SPDX-License-Identifier: Apache-2.0

#include "relhal/diffusion/checkpoint.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

#include <nlohmann/json.hpp>

#include "relhal/error.hpp"

namespace relhal::diffusion {

namespace {

constexpr std::array<char, 8> kMagic = {'R', 'E', 'L', 'H', 'A', 'L', 'C', 'K'};

template <typename U>
void put_le(std::ostream& out, U value) {
  std::array<char, sizeof(U)> bytes;
  for (std::size_t k = 0; k < sizeof(U); ++k) bytes[k] = static_cast<char>((value >> (8 * k)) & 0xFF);
  out.write(bytes.data(), bytes.size());
}

template <typename U>
U get_le(std::istream& in, const std::string& source) {
  std::array<unsigned char, sizeof(U)> bytes;
  if (!in.read(reinterpret_cast<char*>(bytes.data()), bytes.size())) {
    throw DataError(source + ": truncated checkpoint");
  }
  U value = 0;
  for (std::size_t k = 0; k < sizeof(U); ++k) value |= static_cast<U>(bytes[k]) << (8 * k);
  return value;
}

const char* activation_name(nn::Activation a) {
  return a == nn::Activation::kSiLU ? "silu" : "identity";
}

nn::Activation parse_activation(const std::string& s, const std::string& source) {
  if (s == "silu") return nn::Activation::kSiLU;
  if (s == "identity") return nn::Activation::kIdentity;
  throw DataError(source + ": unknown activation '" + s + "'");
}

}  // namespace

DiffusionModel Checkpoint::to_model() const {
  return DiffusionModel(VarianceSchedule::linear(schedule_steps, beta_start, beta_end), normalizer,
                        std::make_shared<MlpNoisePredictor>(network));
}

void write_checkpoint(std::ostream& out, const Checkpoint& ckpt) {
  const auto& mlp = ckpt.network.mlp();
  nlohmann::json header;
  header["format"] = "relhal-checkpoint";
  header["format_version"] = Checkpoint::kFormatVersion;
  header["layer_widths"] = mlp.widths();
  header["hidden_activation"] = activation_name(mlp.hidden_activation());
  header["output_activation"] = activation_name(mlp.output_activation());
  header["embedding_dim"] = ckpt.network.embedding_dim();
  header["parameter_count"] = mlp.parameter_count();
  header["schedule"] = {{"steps", ckpt.schedule_steps},
                        {"beta_start", ckpt.beta_start},
                        {"beta_end", ckpt.beta_end}};
  header["normalizer"] = {{"means", ckpt.normalizer.means()},
                          {"stds", ckpt.normalizer.stds()},
                          {"steps", ckpt.normalizer.steps()}};
  header["dataset"] = ckpt.dataset;
  header["seed"] = ckpt.seed;
  header["best_epoch"] = ckpt.best_epoch;
  header["best_val_loss"] = ckpt.best_val_loss;
  const std::string text = header.dump();

  out.write(kMagic.data(), kMagic.size());
  put_le<std::uint32_t>(out, Checkpoint::kFormatVersion);
  put_le<std::uint64_t>(out, text.size());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  for (float p : mlp.parameters()) put_le<std::uint32_t>(out, std::bit_cast<std::uint32_t>(p));
  if (!out) throw DataError("failed writing checkpoint");
}

Checkpoint read_checkpoint(std::istream& in, const std::string& source) {
  std::array<char, 8> magic{};
  if (!in.read(magic.data(), magic.size()) || magic != kMagic) {
    throw DataError(source + ": not a relhal checkpoint");
  }
  const auto version = get_le<std::uint32_t>(in, source);
  if (version != Checkpoint::kFormatVersion) {
    throw DataError(source + ": unsupported checkpoint version " + std::to_string(version));
  }
  const auto length = get_le<std::uint64_t>(in, source);
  if (length > (1ULL << 26)) throw DataError(source + ": implausible checkpoint header length");
  std::string text(length, '\0');
  if (!in.read(text.data(), static_cast<std::streamsize>(length))) {
    throw DataError(source + ": truncated checkpoint header");
  }

  Checkpoint ckpt;
  try {
    const auto header = nlohmann::json::parse(text);
    auto widths = header.at("layer_widths").get<std::vector<Eigen::Index>>();
    nn::Mlp mlp(std::move(widths),
                parse_activation(header.at("hidden_activation").get<std::string>(), source),
                parse_activation(header.at("output_activation").get<std::string>(), source));
    if (header.at("parameter_count").get<std::size_t>() != mlp.parameter_count()) {
      throw DataError(source + ": parameter count does not match layer widths");
    }
    for (float& p : mlp.parameters()) p = std::bit_cast<float>(get_le<std::uint32_t>(in, source));
    ckpt.network = nn::NoiseNet(std::move(mlp), header.at("embedding_dim").get<Eigen::Index>());
    const auto& sched = header.at("schedule");
    ckpt.schedule_steps = sched.at("steps").get<int>();
    ckpt.beta_start = sched.at("beta_start").get<double>();
    ckpt.beta_end = sched.at("beta_end").get<double>();
    const auto& norm = header.at("normalizer");
    ckpt.normalizer = data::Normalizer(norm.at("means").get<std::vector<double>>(),
                                       norm.at("stds").get<std::vector<double>>(),
                                       norm.at("steps").get<Eigen::Index>());
    ckpt.dataset = header.at("dataset").get<std::string>();
    ckpt.seed = header.at("seed").get<std::uint64_t>();
    ckpt.best_epoch = header.value("best_epoch", -1);
    ckpt.best_val_loss = header.value("best_val_loss", 0.0);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(source + ": malformed checkpoint header: " + e.what());
  }
  if (ckpt.network.data_dim() != ckpt.normalizer.dim()) {
    throw DataError(source + ": network and normalizer dimensions disagree");
  }
  return ckpt;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot open " + tmp.string() + " for writing");
    write_checkpoint(out, ckpt);
    out.flush();
    if (!out) throw DataError("failed writing " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open checkpoint " + path.string());
  return read_checkpoint(in, path.string());
}

}  // namespace relhal::diffusion
