#include "pdifmp/io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace pdifmp {

using nlohmann::json;

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

void append_theta_header(std::vector<std::string>& header, std::size_t dim) {
  for (const auto& n : Prior::parameter_names(dim)) header.push_back(n);
}

}  // namespace

std::size_t CsvTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return i;
  }
  throw ParseError("missing column '" + name + "'");
}

std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

CsvTable read_csv(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw std::runtime_error("cannot open " + file.string());
  CsvTable t;
  std::string line;
  std::size_t lineno = 0;
  const auto where = [&] { return file.string() + ":" + std::to_string(lineno) + ": "; };
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty()) continue;
    if (t.header.empty()) {
      for (auto& c : split(line)) t.header.push_back(trim(c));
      continue;
    }
    const auto cells = split(line);
    if (cells.size() != t.header.size()) {
      throw ParseError(where() + "expected " + std::to_string(t.header.size()) + " fields, got " +
                       std::to_string(cells.size()));
    }
    std::vector<double> row;
    row.reserve(cells.size());
    for (const auto& raw : cells) {
      const std::string c = trim(raw);
      double v = 0.0;
      const auto [ptr, ec] = std::from_chars(c.data(), c.data() + c.size(), v);
      if (c.empty() || ec != std::errc() || ptr != c.data() + c.size()) {
        throw ParseError(where() + "not a number: '" + c + "'");
      }
      row.push_back(v);
    }
    t.rows.push_back(std::move(row));
  }
  if (t.header.empty()) throw ParseError(file.string() + ": empty file (no header)");
  return t;
}

void write_csv(const std::filesystem::path& file, const CsvTable& table) {
  std::ofstream out(file);
  if (!out) throw std::runtime_error("cannot write " + file.string());
  for (std::size_t i = 0; i < table.header.size(); ++i) out << (i ? "," : "") << table.header[i];
  out << '\n';
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << format_number(row[i]);
    out << '\n';
  }
  if (!out) throw std::runtime_error("write failed for " + file.string());
}

void write_json(const std::filesystem::path& file, const json& j) {
  std::ofstream out(file);
  if (!out) throw std::runtime_error("cannot write " + file.string());
  out << j.dump(2) << '\n';
}

json read_json(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw std::runtime_error("cannot open " + file.string());
  return json::parse(in);
}

CsvTable path_table(const HybridPath& path) {
  CsvTable t;
  t.header = {"t", "x1"};
  if (path.dim == 2) t.header.push_back("x2");
  t.header.push_back("regime");
  t.rows.reserve(path.size());
  for (std::size_t i = 0; i < path.size(); ++i) {
    std::vector<double> row{path.times[i]};
    for (std::size_t c = 0; c < path.dim; ++c) row.push_back(path.state(i, c));
    row.push_back(path.regime_at(i));
    t.rows.push_back(std::move(row));
  }
  return t;
}

CsvTable jumps_table(const HybridPath& path) {
  CsvTable t;
  t.header = {"t", "regime"};
  for (std::size_t k = 0; k < path.jump_times.size(); ++k) {
    t.rows.push_back({path.jump_times[k], path.z_values[k + 1]});
  }
  return t;
}

ObservedDataset read_observed(const std::filesystem::path& path_csv,
                              const std::optional<std::filesystem::path>& jumps_csv, ObservationMode mode) {
  const CsvTable p = read_csv(path_csv);
  if (p.rows.empty()) throw ParseError(path_csv.string() + ": no data rows");
  const std::size_t ct = p.column("t");
  const std::size_t cx = p.column("x1");
  ObservedDataset d;
  for (const auto& row : p.rows) {
    d.times.push_back(row[ct]);
    d.x.push_back(row[cx]);
  }
  for (std::size_t i = 1; i < d.times.size(); ++i) {
    if (d.times[i] < d.times[i - 1]) {
      throw ParseError(path_csv.string() + ":" + std::to_string(i + 2) + ": times must be nondecreasing");
    }
  }
  if (jumps_csv) {
    const CsvTable j = read_csv(*jumps_csv);
    const std::size_t cj = j.column("t");
    std::vector<double> jt;
    for (const auto& row : j.rows) jt.push_back(row[cj]);
    d.n_jumps = jt.size();
    if (mode == ObservationMode::JumpTimes) d.jump_times = std::move(jt);
  } else {
    if (mode == ObservationMode::JumpTimes) {
      throw std::invalid_argument("jump-time observation needs a jumps file");
    }
    const std::size_t cr = p.column("regime");
    for (std::size_t i = 1; i < p.rows.size(); ++i) {
      if (p.rows[i][cr] != p.rows[i - 1][cr]) ++d.n_jumps;
    }
  }
  return d;
}

json summary_json(const SummaryVector& s) {
  json j{{"density", {{"grid", s.density.grid}, {"values", s.density.values}, {"bandwidth", s.density.bandwidth}}},
         {"spectrum", {{"frequencies", s.spectrum.frequencies}, {"values", s.spectrum.values}}},
         {"quad_var", s.quad_var},
         {"n_jumps", s.n_jumps}};
  if (s.slope) j["slope"] = s.slope->value ? json(*s.slope->value) : json(nullptr);
  return j;
}

json weights_json(const Weights& w, WeightRule rule, std::size_t n_pilot_used) {
  json j{{"w1", w.w1}, {"w2", w.w2}, {"w3", w.w3}, {"w4", w.w4},
         {"rule", rule == WeightRule::MedianRatio ? "median_ratio" : "reciprocal"},
         {"n_pilot_used", n_pilot_used}};
  j["w5"] = w.w5 ? json(*w.w5) : json(nullptr);
  return j;
}

CsvTable posterior_table(const Population& pop) {
  CsvTable t;
  append_theta_header(t.header, pop.dim());
  t.header.push_back("weight");
  t.header.push_back("distance");
  for (const auto& p : pop.particles) {
    std::vector<double> row = p.theta;
    row.push_back(p.weight);
    row.push_back(p.distance);
    t.rows.push_back(std::move(row));
  }
  return t;
}

CsvTable populations_table(const std::vector<Population>& history) {
  CsvTable t;
  t.header = {"generation", "particle"};
  append_theta_header(t.header, history.empty() ? 3 : history.front().dim());
  t.header.push_back("weight");
  t.header.push_back("distance");
  for (const auto& pop : history) {
    for (std::size_t i = 0; i < pop.particles.size(); ++i) {
      std::vector<double> row{static_cast<double>(pop.generation), static_cast<double>(i)};
      row.insert(row.end(), pop.particles[i].theta.begin(), pop.particles[i].theta.end());
      row.push_back(pop.particles[i].weight);
      row.push_back(pop.particles[i].distance);
      t.rows.push_back(std::move(row));
    }
  }
  return t;
}

CsvTable ci_trace_table(const CITrace& trace, std::size_t dim) {
  CsvTable t;
  t.header = {"generation", "budget", "threshold"};
  for (const auto& n : Prior::parameter_names(dim)) {
    t.header.push_back(n + "_p05");
    t.header.push_back(n + "_p50");
    t.header.push_back(n + "_p95");
  }
  for (const auto& cp : trace.checkpoints) {
    std::vector<double> row{static_cast<double>(cp.generation), static_cast<double>(cp.budget_used), cp.threshold};
    for (const auto& p : cp.params) {
      row.push_back(p.p05);
      row.push_back(p.p50);
      row.push_back(p.p95);
    }
    t.rows.push_back(std::move(row));
  }
  return t;
}

}  // namespace pdifmp
