// File formats and serialization: experiment configs, trace CSV export and
// ingest, plot-ready data series, evaluation reports, and run manifests.
#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "crit/eval.hpp"

namespace crit::io {

inline constexpr const char* kToolName = "critsim";
inline constexpr const char* kToolVersion = "0.1.0";

// Writes content to path via a temp file + rename.
void atomic_write(const std::filesystem::path& path, const std::string& content);

std::string fnv1a64_hex(const std::string& data);

// Shortest text that round-trips a double exactly (%.17g).
std::string format_double(double v);

// JSON config file; unknown keys are rejected with their key path. Absent
// keys fall back to the built-in defaults.
ExperimentConfig parse_config(const std::filesystem::path& path);
ExperimentConfig parse_config_text(const std::string& text,
                                   const std::string& origin = "<config>");

std::filesystem::path complexity_companion_path(const std::filesystem::path& path);

// Long-format CSV `run_id,t,agent_id,performance` plus the aggregate
// companion `run_id,t,complexity` next to it.
void export_traces_csv(const Ensemble& ensemble, const std::filesystem::path& path);

// Parses one or more runs from an exported (or hand-built) performance CSV.
// Complexity is recomputed with uniform weights; critical indices are left
// unset (ingested real traces carry no ground truth).
std::vector<SimulationTrace> ingest_trace_csv(const std::filesystem::path& path);

std::string config_to_json_text(const ExperimentConfig& config);
std::string report_to_json(const EvaluationReport& report);
void write_report(const EvaluationReport& report, const std::filesystem::path& path);

// Plot data for the aligned-ensemble figure family (per-run aligned C,
// cross-run variances, per-run S' with threshold marker).
void emit_aligned_plot_data(const AlignedEnsemble& aligned, SdStatistic statistic,
                            double theta_star, const std::filesystem::path& out_dir,
                            const std::string& suffix);

// Detection-time histograms, one file per benchmark configuration.
void emit_histogram_plot_data(const EvaluationReport& report,
                              const std::filesystem::path& out_dir);

void write_plot_schema(const std::filesystem::path& out_dir);

struct RunManifest {
    std::string command_line;
    std::uint64_t master_seed = 0;
    std::string config_echo; // JSON text
    std::vector<std::filesystem::path> files;
};

void write_manifest(const RunManifest& manifest, const std::filesystem::path& path);

} // namespace crit::io
