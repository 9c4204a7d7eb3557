#include "scorecal/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace scorecal {

namespace {

using nlohmann::json;

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

double parse_number(const std::string& key, const std::string& value) {
  std::size_t used = 0;
  double out = 0.0;
  try {
    out = std::stod(value, &used);
  } catch (const std::exception&) {
    throw std::invalid_argument("config: value for '" + key + "' is not a number: " + value);
  }
  if (used != value.size())
    throw std::invalid_argument("config: value for '" + key + "' is not a number: " + value);
  return out;
}

std::uint64_t parse_seed(const std::string& value) {
  try {
    return std::stoull(value);
  } catch (const std::exception&) {
    throw std::invalid_argument("config: value for 'seed' is not a nonnegative integer: " +
                                value);
  }
}

void write_text(const std::filesystem::path& file, const std::string& text) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + file.string());
  out << text;
  if (!out) throw std::runtime_error("write failed: " + file.string());
}

std::string read_text(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open: " + file.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.push_back("");
  return fields;
}

}  // namespace

std::string format_number(double value) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", value);
  return buf;
}

RunConfig parse_run_config(const std::string& text) {
  RunConfig cfg;
  std::istringstream stream(text);
  std::string line;
  std::string section;
  int line_no = 0;
  while (std::getline(stream, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    if (t.front() == '[') {
      if (t.back() != ']')
        throw std::invalid_argument("config: malformed section header on line " +
                                    std::to_string(line_no));
      section = trim(t.substr(1, t.size() - 2));
      if (section.empty())
        throw std::invalid_argument("config: empty section name on line " +
                                    std::to_string(line_no));
      continue;
    }
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config: expected 'key = value' on line " +
                                  std::to_string(line_no));
    const std::string key = trim(t.substr(0, eq));
    const std::string value = trim(t.substr(eq + 1));
    if (key.empty())
      throw std::invalid_argument("config: empty key on line " + std::to_string(line_no));

    if (!section.empty()) {
      cfg.sections[section][key] = parse_number(key, value);
      continue;
    }
    if (key == "model") {
      cfg.model = value;
    } else if (key == "m") {
      cfg.calibration_sets = static_cast<int>(parse_number(key, value));
    } else if (key == "n") {
      cfg.draws = static_cast<int>(parse_number(key, value));
    } else if (key == "alpha") {
      cfg.alpha = parse_number(key, value);
    } else if (key == "beta") {
      cfg.beta = parse_number(key, value);
    } else if (key == "inflate") {
      cfg.inflate = parse_number(key, value);
    } else if (key == "replicates") {
      cfg.replicates = static_cast<int>(parse_number(key, value));
    } else if (key == "seed") {
      cfg.seed = parse_seed(value);
    } else if (key == "workers") {
      cfg.workers = static_cast<int>(parse_number(key, value));
    } else if (key == "out") {
      cfg.out = value;
    } else {
      throw std::invalid_argument("config: unknown key '" + key + "' on line " +
                                  std::to_string(line_no));
    }
  }
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& file) {
  return parse_run_config(read_text(file));
}

std::string serialize_run_config(const RunConfig& cfg) {
  std::ostringstream out;
  out << "model = " << cfg.model << "\n";
  out << "m = " << cfg.calibration_sets << "\n";
  out << "n = " << cfg.draws << "\n";
  out << "alpha = " << format_number(cfg.alpha) << "\n";
  out << "beta = " << format_number(cfg.beta) << "\n";
  out << "inflate = " << format_number(cfg.inflate) << "\n";
  out << "replicates = " << cfg.replicates << "\n";
  out << "seed = " << cfg.seed << "\n";
  out << "workers = " << cfg.workers << "\n";
  out << "out = " << cfg.out << "\n";
  for (const auto& [section, values] : cfg.sections) {
    out << "\n[" << section << "]\n";
    for (const auto& [key, value] : values)
      out << key << " = " << format_number(value) << "\n";
  }
  return out.str();
}

void write_summary_csv(const std::filesystem::path& file,
                       const std::vector<std::string>& param_names,
                       const std::vector<MethodSummary>& summary) {
  std::ostringstream out;
  out << "parameter,method,mse,bias,sd,coverage90\n";
  for (std::size_t p = 0; p < param_names.size(); ++p) {
    for (const auto& method : summary) {
      const auto& row = method.metrics.parameters.at(p);
      out << param_names[p] << ',' << method.method << ',' << format_number(row.mse)
          << ',' << format_number(row.bias) << ',' << format_number(row.sd) << ','
          << format_number(row.coverage90) << '\n';
    }
  }
  write_text(file, out.str());
}

void write_coverage_csv(const std::filesystem::path& file, const CoverageCurve& curve) {
  std::ostringstream out;
  out << "parameter,rho,cc,m_count\n";
  for (const auto& param : curve.parameters) {
    for (std::size_t g = 0; g < param.levels.size(); ++g) {
      out << param.parameter << ',' << format_number(param.levels[g]) << ','
          << format_number(param.coverage[g]) << ',' << param.pair_count << '\n';
    }
  }
  write_text(file, out.str());
}

void write_correlations_csv(const std::filesystem::path& file,
                            const std::vector<std::string>& param_names,
                            const std::vector<MethodSummary>& summary) {
  std::ostringstream out;
  out << "parameter_a,parameter_b,method,mean_correlation\n";
  for (const auto& method : summary) {
    const auto& m = method.metrics;
    for (std::size_t k = 0; k < m.pair_indices.size(); ++k) {
      const auto [a, b] = m.pair_indices[k];
      out << param_names.at(static_cast<std::size_t>(a)) << ','
          << param_names.at(static_cast<std::size_t>(b)) << ',' << method.method << ','
          << format_number(m.pair_correlations[k]) << '\n';
    }
  }
  write_text(file, out.str());
}

void write_draws_csv(const std::filesystem::path& file,
                     const std::vector<std::string>& param_names,
                     const DrawMatrix& draws) {
  std::ostringstream out;
  for (std::size_t j = 0; j < param_names.size(); ++j)
    out << (j ? "," : "") << param_names[j];
  out << '\n';
  for (Eigen::Index i = 0; i < draws.rows(); ++i) {
    for (Eigen::Index j = 0; j < draws.cols(); ++j)
      out << (j ? "," : "") << format_number(draws(i, j));
    out << '\n';
  }
  write_text(file, out.str());
}

void write_dataset_csv(const std::filesystem::path& file, const Dataset& data) {
  std::ostringstream out;
  for (Eigen::Index i = 0; i < data.rows(); ++i) {
    for (Eigen::Index j = 0; j < data.cols(); ++j)
      out << (j ? "," : "") << format_number(data(i, j));
    out << '\n';
  }
  write_text(file, out.str());
}

Dataset read_dataset_csv(const std::filesystem::path& file) {
  std::istringstream stream(read_text(file));
  std::string line;
  std::vector<std::vector<double>> rows;
  while (std::getline(stream, line)) {
    const std::string t = trim(line);
    if (t.empty()) continue;
    const auto fields = split_csv_line(t);
    std::vector<double> row;
    row.reserve(fields.size());
    for (const auto& f : fields) row.push_back(std::stod(f));
    if (!rows.empty() && row.size() != rows.front().size())
      throw std::runtime_error("dataset csv: ragged rows in " + file.string());
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw std::runtime_error("dataset csv: empty file " + file.string());
  Dataset data(static_cast<Eigen::Index>(rows.size()),
               static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j)
      data(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  return data;
}

void write_diagnostic_inputs_csv(const std::filesystem::path& file,
                                 const std::vector<std::string>& param_names,
                                 const Eigen::MatrixXd& thetas,
                                 const std::vector<DrawMatrix>& adjusted) {
  std::ostringstream out;
  out << "m,role";
  for (const auto& name : param_names) out << ',' << name;
  out << '\n';
  for (Eigen::Index m = 0; m < thetas.rows(); ++m) {
    out << m << ",truth";
    for (Eigen::Index j = 0; j < thetas.cols(); ++j)
      out << ',' << format_number(thetas(m, j));
    out << '\n';
    const auto& draws = adjusted.at(static_cast<std::size_t>(m));
    for (Eigen::Index i = 0; i < draws.rows(); ++i) {
      out << m << ",draw";
      for (Eigen::Index j = 0; j < draws.cols(); ++j)
        out << ',' << format_number(draws(i, j));
      out << '\n';
    }
  }
  write_text(file, out.str());
}

void write_replicate_json(const std::filesystem::path& file,
                          const CalibrationResult& result,
                          const std::vector<std::string>& param_names,
                          const std::string& diagnostics_csv,
                          const std::string& adjusted_csv) {
  json doc;
  doc["transform"]["b"] = std::vector<double>(
      result.transform.shift.data(),
      result.transform.shift.data() + result.transform.shift.size());
  std::vector<std::vector<double>> scale_rows;
  for (Eigen::Index i = 0; i < result.transform.scale.rows(); ++i) {
    std::vector<double> row;
    for (Eigen::Index j = 0; j < result.transform.scale.cols(); ++j)
      row.push_back(result.transform.scale(i, j));
    scale_rows.push_back(std::move(row));
  }
  doc["transform"]["L"] = scale_rows;
  doc["optimizer"]["iterations"] = result.optimizer.iterations;
  doc["optimizer"]["objective"] = result.optimizer.objective;
  doc["optimizer"]["improved"] = result.optimizer.improved;
  doc["diagnostics_inputs"] = diagnostics_csv;
  doc["adjusted_draws"] = adjusted_csv;
  doc["parameters"] = param_names;
  doc["warnings"] = result.warnings;
  write_text(file, doc.dump(2) + "\n");
}

void write_manifest_json(const std::filesystem::path& file, const RunConfig& cfg) {
  // The echo covers exactly the fields that determine the numbers; execution
  // parameters (workers, out) are excluded so artifacts stay byte-identical
  // across worker counts and output locations.
  json doc;
  doc["config"]["model"] = cfg.model;
  doc["config"]["m"] = cfg.calibration_sets;
  doc["config"]["n"] = cfg.draws;
  doc["config"]["alpha"] = cfg.alpha;
  doc["config"]["beta"] = cfg.beta;
  doc["config"]["inflate"] = cfg.inflate;
  doc["config"]["replicates"] = cfg.replicates;
  for (const auto& [section, values] : cfg.sections) {
    for (const auto& [key, value] : values) doc["config"]["overrides"][section][key] = value;
  }
  doc["seed"] = cfg.seed;
  doc["versions"]["scorecal"] = kVersion;
  doc["versions"]["artifact_schema"] = 1;
  write_text(file, doc.dump(2) + "\n");
}

std::string error_record(int exit_code, const std::string& message,
                         const std::string& field, int replicate) {
  json doc;
  doc["error"]["exit_code"] = exit_code;
  doc["error"]["message"] = message;
  if (!field.empty()) doc["error"]["field"] = field;
  if (replicate >= 0) doc["error"]["replicate"] = replicate;
  return doc.dump();
}

ReplicateArtifacts read_replicate_json(const std::filesystem::path& file) {
  const json doc = json::parse(read_text(file));
  ReplicateArtifacts art;
  const auto& b = doc.at("transform").at("b");
  const auto& scale = doc.at("transform").at("L");
  art.transform.shift.resize(static_cast<Eigen::Index>(b.size()));
  for (std::size_t i = 0; i < b.size(); ++i)
    art.transform.shift(static_cast<Eigen::Index>(i)) = b[i].get<double>();
  art.transform.scale.resize(static_cast<Eigen::Index>(scale.size()),
                             static_cast<Eigen::Index>(scale.size()));
  for (std::size_t i = 0; i < scale.size(); ++i)
    for (std::size_t j = 0; j < scale[i].size(); ++j)
      art.transform.scale(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          scale[i][j].get<double>();
  art.param_names = doc.at("parameters").get<std::vector<std::string>>();
  const auto base = file.parent_path();
  art.diagnostics_csv = base / doc.at("diagnostics_inputs").get<std::string>();
  art.adjusted_csv = base / doc.at("adjusted_draws").get<std::string>();
  return art;
}

DiagnosticInputs read_diagnostic_inputs_csv(const std::filesystem::path& file) {
  std::istringstream stream(read_text(file));
  std::string line;
  if (!std::getline(stream, line))
    throw std::runtime_error("diagnostic inputs: empty file " + file.string());
  const auto header = split_csv_line(trim(line));
  if (header.size() < 3 || header[0] != "m" || header[1] != "role")
    throw std::runtime_error("diagnostic inputs: unexpected header in " + file.string());

  DiagnosticInputs inputs;
  inputs.param_names.assign(header.begin() + 2, header.end());
  const auto d = static_cast<Eigen::Index>(inputs.param_names.size());

  std::vector<Eigen::VectorXd> truths;
  std::vector<std::vector<Eigen::VectorXd>> draws;
  while (std::getline(stream, line)) {
    const std::string t = trim(line);
    if (t.empty()) continue;
    const auto fields = split_csv_line(t);
    if (static_cast<Eigen::Index>(fields.size()) != d + 2)
      throw std::runtime_error("diagnostic inputs: malformed row in " + file.string());
    const int m = std::stoi(fields[0]);
    Eigen::VectorXd values(d);
    for (Eigen::Index j = 0; j < d; ++j)
      values(j) = std::stod(fields[static_cast<std::size_t>(j) + 2]);
    if (static_cast<std::size_t>(m) >= truths.size()) {
      truths.resize(static_cast<std::size_t>(m) + 1);
      draws.resize(static_cast<std::size_t>(m) + 1);
    }
    if (fields[1] == "truth") {
      truths[static_cast<std::size_t>(m)] = values;
    } else if (fields[1] == "draw") {
      draws[static_cast<std::size_t>(m)].push_back(values);
    } else {
      throw std::runtime_error("diagnostic inputs: unknown role '" + fields[1] + "'");
    }
  }

  inputs.thetas.resize(static_cast<Eigen::Index>(truths.size()), d);
  for (std::size_t m = 0; m < truths.size(); ++m) {
    if (truths[m].size() != d)
      throw std::runtime_error("diagnostic inputs: missing truth row for dataset " +
                               std::to_string(m));
    inputs.thetas.row(static_cast<Eigen::Index>(m)) = truths[m];
    DrawMatrix dm(static_cast<Eigen::Index>(draws[m].size()), d);
    for (std::size_t i = 0; i < draws[m].size(); ++i)
      dm.row(static_cast<Eigen::Index>(i)) = draws[m][i];
    inputs.adjusted.push_back(std::move(dm));
  }
  return inputs;
}

}  // namespace scorecal
