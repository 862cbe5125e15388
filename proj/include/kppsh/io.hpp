#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "kppsh/pde_sim.hpp"

namespace kppsh::io {

using json = nlohmann::ordered_json;

// Shortest round-trip form is not used on purpose: every value is printed with 17 significant digits.
std::string format_double(double x);
std::string csv_escape(const std::string& s);

struct CsvColumn {
    std::string name;
    std::vector<double> values;
    std::vector<std::string> text;  // used instead of values when nonempty
};

void write_csv(const std::filesystem::path& path, const std::vector<CsvColumn>& columns);
std::string to_csv(const std::vector<CsvColumn>& columns);
void write_json(const std::filesystem::path& path, const json& j);
void write_text(const std::filesystem::path& path, const std::string& s);
std::string read_text(const std::filesystem::path& path);

// TOML or JSON, chosen by extension; TOML is converted to JSON.
json load_config(const std::filesystem::path& path);
json parse_toml(const std::string& text);

SystemParams params_from_json(const json& j);
json to_json(const SystemParams& p);
json to_json(const GateReport& g);
// Reads the [simulate] table, falling back to the shipped defaults.
SimConfig sim_config_from_json(const json& j);
json to_json(const SimConfig& c);

// Snapshot layout: u64 little-endian header length, UTF-8 JSON header, then little-endian f64 fields in
// the order listed by the header.
void write_snapshot(const std::filesystem::path& path, const StateField& s);
StateField read_snapshot(const std::filesystem::path& path);

std::string sha256_hex(const std::string& bytes);
std::string sha256_file(const std::filesystem::path& path);

struct RunManifest {
    json params;
    json config;
    std::string config_hash;
    std::string code_version;
    std::vector<std::uint64_t> seeds;
    std::string started, finished;
    std::vector<std::pair<std::string, std::string>> outputs;  // relative path, sha256

    void add_output(const std::filesystem::path& dir, const std::string& rel);
    json to_json() const;
};

std::string utc_timestamp();
std::string code_version();

}  // namespace kppsh::io
