#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "scorecal/experiment.hpp"

namespace scorecal {

/// Deterministic number formatting used in every CSV artifact: %.12g, '.'
/// decimal point, no thousands separators.
std::string format_number(double value);

/// Parses the flat key-value run configuration format with one optional
/// [model] override section per model name. Throws std::invalid_argument with
/// the offending line/key on malformed input.
RunConfig parse_run_config(const std::string& text);
RunConfig load_run_config(const std::filesystem::path& file);

/// Inverse of parse_run_config; parse(serialize(cfg)) reproduces cfg.
std::string serialize_run_config(const RunConfig& cfg);

// --- artifact writers (CSV: UTF-8, LF line endings) ---

/// summary.csv: parameter,method,mse,bias,sd,coverage90
void write_summary_csv(const std::filesystem::path& file,
                       const std::vector<std::string>& param_names,
                       const std::vector<MethodSummary>& summary);

/// coverage.csv: parameter,rho,cc,m_count
void write_coverage_csv(const std::filesystem::path& file, const CoverageCurve& curve);

/// correlations.csv: parameter_a,parameter_b,method,mean_correlation
/// (written only for models with more than one parameter)
void write_correlations_csv(const std::filesystem::path& file,
                            const std::vector<std::string>& param_names,
                            const std::vector<MethodSummary>& summary);

/// draws_<k>.csv: one row per adjusted draw, one column per parameter,
/// constrained space.
void write_draws_csv(const std::filesystem::path& file,
                     const std::vector<std::string>& param_names,
                     const DrawMatrix& draws);

/// Datasets: one row per realization, one column per observed component.
void write_dataset_csv(const std::filesystem::path& file, const Dataset& data);
Dataset read_dataset_csv(const std::filesystem::path& file);

/// diag_<k>.csv: m,role,<params...> with one truth row and N draw rows per
/// calibration dataset.
void write_diagnostic_inputs_csv(const std::filesystem::path& file,
                                 const std::vector<std::string>& param_names,
                                 const Eigen::MatrixXd& thetas,
                                 const std::vector<DrawMatrix>& adjusted);

/// replicate_<k>.json: transform, optimizer report and the paths of the two
/// CSV companions.
void write_replicate_json(const std::filesystem::path& file,
                          const CalibrationResult& result,
                          const std::vector<std::string>& param_names,
                          const std::string& diagnostics_csv,
                          const std::string& adjusted_csv);

/// manifest.json: effective configuration echo, seed and version strings.
/// Contains nothing time- or host-dependent so reruns are byte-identical.
void write_manifest_json(const std::filesystem::path& file, const RunConfig& cfg);

/// One-line machine-readable error record for the CLI.
std::string error_record(int exit_code, const std::string& message,
                         const std::string& field = "", int replicate = -1);

// --- read-back used by the diagnose command ---

struct ReplicateArtifacts {
  MomentTransform transform;
  std::vector<std::string> param_names;
  std::filesystem::path diagnostics_csv;
  std::filesystem::path adjusted_csv;
};

ReplicateArtifacts read_replicate_json(const std::filesystem::path& file);

struct DiagnosticInputs {
  std::vector<std::string> param_names;
  Eigen::MatrixXd thetas;
  std::vector<DrawMatrix> adjusted;
};

DiagnosticInputs read_diagnostic_inputs_csv(const std::filesystem::path& file);

}  // namespace scorecal
