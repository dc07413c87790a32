#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "chemclip/classifier.hpp"
#include "chemclip/training.hpp"

namespace chemclip::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;

struct DataConfig {
  std::string organic = "data/organic.csv";
  std::string inorganic = "data/inorganic.csv";
  std::string cell_map = "data/cell_map.csv";
  double subsample_ratio = 5.0;  // inactive organic compounds per active one, training split only
  std::uint64_t split_seed = 0;
};

struct RunConfig {
  DataConfig data;
  TrainConfig train;
  ClassifierConfig classifier;
  std::string output_directory = "run";
};

// Sections data, train, classifier, output. Unknown keys anywhere are
// rejected with Error(kInvalidArgument); missing keys take defaults.
RunConfig run_config_from_json(const std::string& json);
std::string run_config_to_json(const RunConfig& config);

// Entry point shared by the executable and the tests. args[0] is the
// program name.
int run(const std::vector<std::string>& args);

}  // namespace chemclip::cli
