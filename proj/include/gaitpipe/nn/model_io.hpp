#pragma once

#include <filesystem>

#include "gaitpipe/imaging.hpp"
#include "gaitpipe/nn/network.hpp"

namespace gaitpipe::nn {

// A network plus what the online path needs to feed it.
struct TrainedModel {
  Network network;
  imaging::Normalizer normalizer;
  imaging::ChannelSet channels = imaging::ChannelSet::Both;
};

// Text format, first line `gaitpipe-model v1`, then the architecture
// fingerprint, normalizer, and every parameter at 17 significant digits.
void save_model(const std::filesystem::path& path, const TrainedModel& model);
TrainedModel load_model(const std::filesystem::path& path);

}  // namespace gaitpipe::nn
