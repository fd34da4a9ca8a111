#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "sog/config.hpp"

namespace sog {

inline constexpr const char* kVersion = "0.3.0";
inline constexpr int kManifestSchemaVersion = 1;

// Exit codes of run().
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;       // parameter, assumption and parse errors
inline constexpr int kExitDegenerate = 2;  // degenerate samples
inline constexpr int kExitMismatch = 3;    // replay digests differ

struct OutputFile {
  std::string path;  // relative to the output directory
  std::string sha256;
  std::uint64_t bytes = 0;
};

struct RunManifest {
  std::string command;
  ParamMap params;
  std::uint64_t seed = 0;
  std::string artifact_version = kVersion;
  std::string started;
  std::string finished;
  double wall_time_s = 0.0;
  std::vector<OutputFile> output_files;
};

nlohmann::json to_json(const RunManifest& m);
RunManifest manifest_from_json(const nlohmann::json& doc);

std::string sha256_hex(const std::string& bytes);

// Subcommand names accepted by run().
std::vector<std::string> command_names();

// args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, char** argv);

}  // namespace sog
