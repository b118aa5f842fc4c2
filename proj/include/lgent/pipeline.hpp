#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lgent/certify.hpp"
#include "lgent/config.hpp"

namespace lgent {

inline constexpr const char* kToolVersion = "0.1.0";

// What a pipeline run produced: inputs echoed back plus a content hash per
// output file, so reruns can be compared without byte-diffing everything.
struct RunManifest {
    std::string subcommand;
    std::uint64_t seed = 0;
    std::string config_json;  // canonical form
    std::vector<std::pair<std::string, std::string>> files;  // name, fnv1a64 hex
    double wall_ms = 0.0;
};

struct RunOptions {
    std::string subcommand;
    std::string out_dir;
    std::uint64_t seed = 1;
    int mub_limit = -1;              // --mubs: use only the first k MUBs
    std::string target_override;     // --target: "", "maximal" or "tilted"
    std::vector<std::string> bases;  // --bases: subset of record labels
};

// Execute one subcommand (simulate, certify, mub, cgh, sweep-gamma,
// phase-only, oracle), writing outputs plus manifest.json under
// opt.out_dir. All writes are atomic (temp file + rename).
RunManifest run_pipeline(const ConfigDocument& cfg, const RunOptions& opt);

// 64-bit FNV-1a over a file's bytes, as a fixed-width hex string.
std::string file_fingerprint(const std::string& path);

// Record IO shared by the pipeline and tests.
void write_record(const CoincidenceRecord& rec, const std::string& dir,
                  const std::string& label);
CoincidenceRecord read_record(const std::string& path);

}  // namespace lgent
