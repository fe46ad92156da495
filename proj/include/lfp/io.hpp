#pragma once

// Text formats: dataset and table CSV, solution and checkpoint JSON.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"
#include "lfp/core.hpp"
#include "lfp/flow.hpp"
#include "lfp/nn.hpp"
#include "lfp/solver.hpp"

namespace lfp {

using Json = nlohmann::ordered_json;

/// Shortest text that reads back to the same double ("%.17g").
std::string format_double(double value);

/// Header x1..xd,y then one sample per row.
std::string dataset_to_csv(const Dataset& data);
Dataset dataset_from_csv(const std::string& text);
void write_dataset_csv(const std::filesystem::path& path, const Dataset& data);
Dataset read_dataset_csv(const std::filesystem::path& path);

/// 64-bit FNV-1a of arbitrary bytes, and of a dataset's CSV text (hex).
std::uint64_t fnv1a64(std::string_view bytes);
std::string dataset_hash(const Dataset& data);

Json lattice_to_json(const FrequencyLattice& lattice);
Json solution_to_json(const DualSolution& sol, const Dataset& data);

/// Full lattice in index order, the k = 0 row carrying the intercept:
/// k1..kd,re,im.
std::string spectrum_to_csv(const SpectralSolution& s);

Json net_to_json(const TwoLayerNet& net);
TwoLayerNet net_from_json(const Json& j);

std::string loss_history_csv(const std::vector<std::pair<std::size_t, double>>& history);

/// t,residual then |h(xi, t)| per tracked frequency (columns named by k).
std::string trajectory_csv(const SpectralFlowResult& run);

/// Writes text, creating parent directories; throws ErrorCode::io on failure.
void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

/// Simple CSV table builder; numbers are formatted with format_double.
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header);
  CsvTable& row();
  CsvTable& add(double value);
  CsvTable& add(std::size_t value);
  CsvTable& add(const std::string& text);
  std::string str() const;

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

}  // namespace lfp
