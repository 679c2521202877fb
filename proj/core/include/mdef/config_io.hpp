#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "mdef/density_model.hpp"
#include "mdef/martingale.hpp"
#include "mdef/payoff.hpp"

namespace mdef {

// Model, payoff, and candidate files are JSON documents; reports are CSV
// with a fixed comment header so golden files stay byte-stable.

struct LoadedModel {
    DensityModel model;
    ObservationScheme scheme;   // default flow named in the file
    std::string config_hash;    // fnv-1a of the file bytes, 16 hex digits
    std::filesystem::path source;
};

LoadedModel load_model(const std::filesystem::path& file);
std::string serialize_model(const DensityModel& model,
                            const ObservationScheme& scheme);

Payoff load_payoff(const std::filesystem::path& file);
std::string serialize_payoff(const Payoff& payoff);

// Candidate files name one of the recipes understood by the martingale
// checks: a constructed candidate (with its input seed), the running value
// of a payoff, a constant, or a perturbation of any of these.
GMartingaleCandidate load_candidate(const std::filesystem::path& file,
                                    const DensityModel& model);

// Outcome-parametrized weights for the initial-enlargement check.
ParametrizedEvaluator load_initial_weights(const std::filesystem::path& file,
                                           const DensityModel& model);

struct ReportMeta {
    std::string config_hash;
    std::uint64_t seed = 0;
    double tol = 0.0;
};

// Header layout:
//   # mdef <version>
//   # config-hash=<hex>
//   # seed=<n>
//   # tol=<g>
//   <column names>
std::string csv_header(const ReportMeta& meta,
                       const std::vector<std::string>& columns);
void write_csv(const std::filesystem::path& file, const ReportMeta& meta,
               const std::vector<std::string>& columns,
               const std::vector<std::vector<std::string>>& rows);

// Resolves an output path against MDEF_OUT_DIR when it is relative.
std::filesystem::path resolve_out_path(const std::string& out);

// Writes every fixture model plus the example payoff and candidate files
// into `dir`; returns the file names written.
std::vector<std::string> write_fixture_files(const std::filesystem::path& dir);

struct RunConfig {
    std::string command;
    std::filesystem::path model_path;
    std::string scheme;
    std::filesystem::path payoff_path;
    std::vector<double> times;
    std::string method = "direct";
    double tolerance = 1e-10;
    std::uint64_t seed = 1;
    std::string out;
};

}  // namespace mdef
