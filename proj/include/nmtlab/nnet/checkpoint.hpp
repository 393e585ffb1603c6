#pragma once

#include "nmtlab/nnet/model.hpp"
#include "nmtlab/nnet/optim.hpp"
#include "nmtlab/rng.hpp"

#include <json.hpp>

#include <cstdint>
#include <string>
#include <string_view>

// Checkpoint file layout (all integers little-endian):
//   "NMTL" | u32 format version | u64 header length | JSON header | payload
// The header holds config, optimizer hyperparameters, step, seed, RNG state,
// vocabulary fingerprint, optional assets and a tensor index
// [{name, shape, dtype, offset}] whose offsets are relative to the payload.
// Tensors are row-major, stored in index order: parameters, then "adam.m/*"
// and "adam.v/*".
namespace nmtlab::nnet {

inline constexpr std::uint32_t kCheckpointVersion = 1;

enum class Dtype { f64, f32 };

struct Checkpoint {
    ModelConfig config;
    OptimizerHyper hyper;
    ParamStore params;
    AdamState optimizer;
    long step = 0;
    std::uint64_t seed = 0;
    Rng::State rng{};
    std::uint64_t vocab_fingerprint = 0;
    long epoch = 0;      // training cursor
    long position = 0;   // example offset inside the epoch
    nlohmann::json assets = nlohmann::json::object();  // e.g. vocab, merges
};

std::string serialize_checkpoint(const Checkpoint& ckpt, Dtype dtype = Dtype::f64);
Checkpoint parse_checkpoint(std::string_view bytes);

void save_checkpoint(const Checkpoint& ckpt, const std::string& path, Dtype dtype = Dtype::f64);
Checkpoint load_checkpoint(const std::string& path);

} // namespace nmtlab::nnet
