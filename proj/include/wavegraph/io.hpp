#pragma once

// JSON serialization of datasets (one example per line), checkpoints and netlists.

#include <cstdint>
#include <filesystem>
#include <istream>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "wavegraph/dataset.hpp"
#include "wavegraph/models.hpp"

namespace wavegraph {

using json = nlohmann::json;

json example_to_json(const Example& ex);
/// Throws DataError on missing or inconsistent fields.
Example example_from_json(const json& j);

void write_dataset(const std::filesystem::path& path, std::span<const Example> data);
/// Errors name the offending line.
std::vector<Example> read_dataset(std::istream& in);
std::vector<Example> read_dataset(const std::filesystem::path& path);

json netlist_to_json(const CircuitNetlist& net);
CircuitNetlist netlist_from_json(const json& j);
/// Parses and validates a netlist document; errors carry line numbers.
CircuitNetlist parse_netlist(const std::string& text);

json spec_to_json(const ModelSpec& spec);
ModelSpec spec_from_json(const json& j);

struct Checkpoint {
  ModelSpec spec;
  ParameterList parameters;
  std::string rng_state;
  std::uint64_t iteration = 0;
};

json checkpoint_to_json(const GraphModel& model, const std::string& rng_state, std::uint64_t iteration);
Checkpoint checkpoint_from_json(const json& j);
void save_checkpoint(const std::filesystem::path& path, const GraphModel& model, const std::string& rng_state,
                     std::uint64_t iteration);
Checkpoint read_checkpoint(const std::filesystem::path& path);
/// Builds the model described by a checkpoint and loads its parameters.
std::unique_ptr<GraphModel> load_model(const Checkpoint& ckpt);

/// Reads a whole file. Throws DataError if it cannot be opened.
std::string read_text_file(const std::filesystem::path& path);
/// Writes atomically via a temporary sibling file.
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace wavegraph
