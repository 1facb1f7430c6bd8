#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace bls {

// Flat key=value experiment description. The (config, seed) pair determines
// every random draw of a run.
struct ExperimentConfig {
    std::string experiment;
    std::map<std::string, std::string> kv;
    uint64_t seed = 1;
    std::string out_dir;

    static std::map<std::string, std::string> parse_kv_file(const std::string& path);
    static std::map<std::string, std::string> parse_kv_text(const std::string& text);

    bool has(const std::string& key) const { return kv.count(key) > 0; }
    double get_double(const std::string& key, double fallback) const;
    long get_long(const std::string& key, long fallback) const;
    std::string get_string(const std::string& key, const std::string& fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;

    std::string canonical() const;  // sorted key=value lines plus name and seed
    uint64_t hash() const;          // FNV-1a of the canonical form
};

struct CriterionResult {
    std::string name;
    bool passed = false;
    double value = 0.0;     // the measured quantity
    double expected = 0.0;  // the target it is held against
    std::string detail;
};

struct ResultRecord {
    std::string experiment;
    uint64_t config_hash = 0;
    std::vector<std::string> csv_header;
    std::vector<std::vector<double>> csv_rows;
    std::string summary_json;
    std::vector<CriterionResult> criteria;

    bool all_passed() const;
};

// Dispatch to the named experiment (thermo | soup | conditioned | capacity |
// interlace | theorem1 | bigjump | hitting) and run it to completion.
ResultRecord run(const ExperimentConfig& config);

// <out_dir>/<experiment>_replicas.csv and <out_dir>/<experiment>_summary.json
void write_outputs(const ResultRecord& record, const std::string& out_dir);

}  // namespace bls
