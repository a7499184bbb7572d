#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "trustnav/operator.hpp"
#include "trustnav/session.hpp"

namespace trustnav {

// Everything needed to reproduce a headless run.
struct RunManifest {
  std::uint64_t seed = 0;
  StudyCondition condition;
  OperatorModel op;
  int n_sessions = 1;
  std::vector<std::string> configs;  // files or directories
  SessionOptions session;
  LibraryOptions library;
  std::string out;  // JSONL log path

  static RunManifest from_json(const nlohmann::json& doc);
  nlohmann::json to_json() const;
};

// Loads every path; directories contribute their *.json and *.txt files in
// name order. Throws GridError when a path is missing or a file is invalid.
std::vector<GridConfig> load_configs(const std::vector<std::string>& paths);

// Runs manifest.n_sessions sessions through ProtocolSession with a simulated
// operator. Surveys are skipped. Session i uses seed derive_seed(seed, i).
std::vector<TaskRecord> run_headless(const TaskLibrary& library, const RunManifest& manifest,
                                     EventSink& sink);

}  // namespace trustnav
