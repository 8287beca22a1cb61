#include "biphoton/io.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace biphoton {

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double to_double(const std::string& s, const char* what) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw std::runtime_error(std::string("csv: bad ") + what + " '" + s + "'");
  }
}

std::string strip_cr(std::string s) {
  if (!s.empty() && s.back() == '\r') s.pop_back();
  return s;
}

void write_file(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p);
  if (!out) throw std::runtime_error("cannot write '" + p.string() + "'");
  out << text;
}

std::string theta_tag(double t) {
  std::string s = format_double(t);
  for (char& c : s)
    if (c == '.' || c == '-') c = (c == '.') ? 'p' : 'm';
  return s;
}

}  // namespace

void write_scan_csv(std::ostream& os, const ScanResult& scan) {
  os << kScanCsvHeader << '\n';
  for (const auto& p : scan.points) {
    os << p.setting_index << ',' << format_double(p.theta1_deg) << ',' << format_double(p.theta2_deg) << ','
       << format_double(p.analytic_p) << ',';
    if (p.counts) os << *p.counts;
    else os << format_double(p.mean_counts);
    os << ',' << format_double(p.sigma_counts()) << '\n';
  }
}

std::vector<ScanPoint> read_scan_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || strip_cr(line) != kScanCsvHeader)
    throw std::runtime_error("csv: missing or unexpected scan header");
  std::vector<ScanPoint> out;
  while (std::getline(is, line)) {
    line = strip_cr(line);
    if (line.empty()) continue;
    const auto cells = split_csv(line);
    if (cells.size() != 6) throw std::runtime_error("csv: expected 6 columns, got " + std::to_string(cells.size()));
    ScanPoint p;
    p.setting_index = int(to_double(cells[0], "setting_index"));
    p.theta1_deg = to_double(cells[1], "theta1_deg");
    p.theta2_deg = to_double(cells[2], "theta2_deg");
    p.analytic_p = to_double(cells[3], "analytic_p");
    const double c = to_double(cells[4], "counts");
    // Integers are sampled counts; anything else is an analytic mean.
    if (cells[4].find_first_of(".eE") == std::string::npos) p.counts = std::int64_t(c);
    p.mean_counts = c;
    out.push_back(p);
  }
  return out;
}

void write_chsh_csv(std::ostream& os, const ChshResult& r, const ChshSettings& settings) {
  static constexpr const char* kPair[4] = {"ab", "ab'", "a'b", "a'b'"};
  const auto& s = settings.hwp_deg;
  const std::array<std::pair<double, double>, 4> angles{{{s[0], s[2]}, {s[0], s[3]}, {s[1], s[2]}, {s[1], s[3]}}};
  os << "pair,hwp_a_deg,hwp_b_deg,n_pp,n_pm,n_mp,n_mm,E,sigma_E\n";
  for (int k = 0; k < 4; ++k) {
    os << kPair[k] << ',' << format_double(angles[k].first) << ',' << format_double(angles[k].second);
    for (int c = 0; c < 4; ++c) os << ',' << format_double(r.counts[4 * k + c]);
    os << ',' << format_double(r.correlations[k].value) << ',' << format_double(r.correlations[k].sigma) << '\n';
  }
  os << "S,,,,,,," << format_double(r.S) << ',' << format_double(r.sigma_S) << '\n';
}

ChshResult read_chsh_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || strip_cr(line) != "pair,hwp_a_deg,hwp_b_deg,n_pp,n_pm,n_mp,n_mm,E,sigma_E")
    throw std::runtime_error("csv: missing or unexpected chsh header");
  ChshResult r;
  for (int k = 0; k < 5; ++k) {
    if (!std::getline(is, line)) throw std::runtime_error("csv: chsh table is truncated");
    const auto cells = split_csv(strip_cr(line));
    if (cells.size() != 9) throw std::runtime_error("csv: chsh rows have 9 columns");
    if (k == 4) {
      r.S = to_double(cells[7], "S");
      r.sigma_S = to_double(cells[8], "sigma_S");
      break;
    }
    for (int c = 0; c < 4; ++c) r.counts[4 * k + c] = to_double(cells[3 + c], "count");
    r.correlations[k] = {to_double(cells[7], "E"), to_double(cells[8], "sigma_E")};
  }
  return r;
}

void write_chart_csv(std::ostream& os, const SortingChart& chart) {
  os << "port";
  for (int c = 0; c < chart.columns(); ++c) os << ",l=" << chart.first_l + c;
  os << '\n';
  static constexpr const char* kPort[2] = {"E", "O"};
  for (int r = 0; r < 2; ++r) {
    os << kPort[r];
    for (double v : chart.rows[r]) os << ',' << format_double(v);
    os << '\n';
  }
}

SortingChart read_chart_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw std::runtime_error("csv: empty chart");
  const auto head = split_csv(strip_cr(line));
  if (head.size() < 2 || head[0] != "port" || head[1].rfind("l=", 0) != 0)
    throw std::runtime_error("csv: unexpected chart header");
  SortingChart chart;
  chart.first_l = int(to_double(head[1].substr(2), "column"));
  for (int r = 0; r < 2; ++r) {
    if (!std::getline(is, line)) throw std::runtime_error("csv: chart needs E and O rows");
    const auto cells = split_csv(strip_cr(line));
    if (cells.size() != head.size()) throw std::runtime_error("csv: chart row width differs from header");
    for (std::size_t i = 1; i < cells.size(); ++i) chart.rows[r].push_back(to_double(cells[i], "chart cell"));
  }
  return chart;
}

nlohmann::json to_json(const ScanResult& scan) {
  return {{"theta1_deg", scan.theta1_deg},
          {"visibility", scan.fit.visibility},
          {"sigma", scan.fit.sigma},
          {"offset", scan.fit.offset},
          {"amplitude", scan.fit.amplitude},
          {"phase_rad", scan.fit.phase},
          {"points", scan.points.size()}};
}

nlohmann::json to_json(const ChshResult& r) {
  nlohmann::json e = nlohmann::json::array();
  for (const auto& c : r.correlations) e.push_back({{"value", c.value}, {"sigma", c.sigma}});
  return {{"S", r.S}, {"sigma_S", r.sigma_S}, {"correlations", e}, {"counts", r.counts}};
}

nlohmann::json summary_json(const ResultSet& r) {
  nlohmann::json j;
  j["experiment"] = r.name;
  j["config_hash"] = r.config_hash;
  j["seed"] = r.seed;
  j["mode"] = r.mode == Mode::kSampled ? "sampled" : "analytic";
  const auto basis = [](const BasisVisibility& b) {
    return nlohmann::json{{"visibility", b.value}, {"sigma", b.sigma}, {"curves", b.curves}};
  };
  if (!r.scans.empty()) {
    j["visibility"] = {{"HV", basis(r.hv)}, {"DA", basis(r.da)}};
    j["curves"] = nlohmann::json::array();
    for (const auto& s : r.scans) j["curves"].push_back(to_json(s));
  }
  if (r.chsh) j["chsh"] = to_json(*r.chsh);
  if (r.port_pairs)
    j["port_pairs"] = {
        {"both_even", r.port_pairs->both_even}, {"both_odd", r.port_pairs->both_odd}, {"split", r.port_pairs->split}};
  if (r.chart) j["chart"] = {{"first_l", r.chart->first_l}, {"E", r.chart->rows[0]}, {"O", r.chart->rows[1]}};
  return j;
}

std::vector<std::string> write_result_set(const std::string& dir, const ResultSet& r, const ExperimentConfig& cfg) {
  namespace fs = std::filesystem;
  const fs::path root(dir);
  fs::create_directories(root);
  std::vector<std::string> files;
  const auto emit = [&](const std::string& name, const std::string& text) {
    write_file(root / name, text);
    files.push_back(name);
  };
  emit("config.yaml", to_yaml(cfg));
  emit("summary.json", summary_json(r).dump(2) + "\n");
  for (const auto& s : r.scans) {
    std::ostringstream os;
    write_scan_csv(os, s);
    emit("curve_theta1_" + theta_tag(s.theta1_deg) + ".csv", os.str());
  }
  if (r.chsh) {
    std::ostringstream os;
    write_chsh_csv(os, *r.chsh, cfg.plan.chsh);
    emit("chsh.csv", os.str());
  }
  if (r.chart) {
    std::ostringstream os;
    write_chart_csv(os, *r.chart);
    emit("chart.csv", os.str());
  }
  return files;
}

}  // namespace biphoton
