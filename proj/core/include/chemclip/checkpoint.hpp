#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "chemclip/matrix.hpp"
#include "chemclip/model.hpp"
#include "chemclip/training.hpp"

namespace chemclip {

// Binary container: "CCLP", u32 version, then records of
// (u32 name length, UTF-8 name, u32 rows, u32 cols, rows*cols f64), all
// little-endian. A record with name length 0 ends the list and is followed by
// a u32 length and a UTF-8 JSON trailer.
inline constexpr std::uint32_t kCheckpointVersion = 1;

struct NamedMatrix {
  std::string name;
  Matrix value;
};

struct Container {
  std::vector<NamedMatrix> tensors;
  std::string json;
};

std::vector<std::uint8_t> encode_container(const Container& container);
Container decode_container(const std::vector<std::uint8_t>& bytes);  // FormatError / UnsupportedVersion
void write_container(const std::filesystem::path& path, const Container& container);
Container read_container(const std::filesystem::path& path);

std::vector<NamedMatrix> mlp_tensors(const Mlp& mlp, const std::string& prefix);
Mlp mlp_from_tensors(const std::vector<NamedMatrix>& tensors, const std::string& prefix, double dropout_rate);

struct Checkpoint {
  ChemClipModel model;
  TrainConfig config;
  std::size_t epoch = 0;
};

void save_checkpoint(const std::filesystem::path& path, const ChemClipModel& model, const TrainConfig& config,
                     std::size_t epoch);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace chemclip
