#include "ffsim/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <system_error>

namespace ffsim {

using nlohmann::json;

namespace {

json complex_json(cplx z) { return json::array({z.real(), z.imag()}); }

cplx complex_from_json(const json& j) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
    throw InputError("complex entry must be [re, im]");
  }
  return {j[0].get<double>(), j[1].get<double>()};
}

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (true) {
    const auto comma = line.find(',', pos);
    out.push_back(trim(line.substr(pos, comma == std::string_view::npos ? std::string_view::npos : comma - pos)));
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  return out;
}

double csv_double(std::string_view v, const std::string& where, const char* column) {
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (v.empty() || ec != std::errc() || ptr != v.data() + v.size() || !std::isfinite(out)) {
    throw InputError(where + ": column " + column + ": expected a number, got '" + std::string(v) + "'");
  }
  return out;
}

std::uint64_t csv_count(std::string_view v, const std::string& where, const char* column) {
  std::uint64_t out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (v.empty() || ec != std::errc() || ptr != v.data() + v.size()) {
    throw InputError(where + ": column " + column + ": expected a non-negative integer, got '" +
                     std::string(v) + "'");
  }
  return out;
}

}  // namespace

json to_json(const DensityMatrix& rho) {
  json rows = json::array();
  for (int r = 0; r < rho.dim(); ++r) {
    json row = json::array();
    for (int c = 0; c < rho.dim(); ++c) row.push_back(complex_json(rho(r, c)));
    rows.push_back(std::move(row));
  }
  return {{"dim", rho.dim()}, {"entries", std::move(rows)}};
}

DensityMatrix density_from_json(const json& j) {
  if (!j.is_object() || !j.contains("dim") || !j.contains("entries")) {
    throw InputError("density matrix JSON needs 'dim' and 'entries'");
  }
  if (!j["dim"].is_number_integer()) throw InputError("density matrix 'dim' must be an integer");
  const int dim = j["dim"].get<int>();
  if (dim != 2 && dim != 4) throw InputError("density matrix 'dim' must be 2 or 4");
  const json& rows = j["entries"];
  if (!rows.is_array() || static_cast<int>(rows.size()) != dim) {
    throw InputError("density matrix 'entries' must have 'dim' rows");
  }
  Eigen::MatrixXcd m(dim, dim);
  for (int r = 0; r < dim; ++r) {
    if (!rows[r].is_array() || static_cast<int>(rows[r].size()) != dim) {
      throw InputError("density matrix row " + std::to_string(r) + " must have 'dim' entries");
    }
    for (int c = 0; c < dim; ++c) m(r, c) = complex_from_json(rows[r][c]);
  }
  try {
    return DensityMatrix(m);
  } catch (const std::invalid_argument& e) {
    throw InputError(std::string("density matrix: ") + e.what());
  }
}

json to_json(const PureState2& state) {
  const PureState2 c = state.canonical();
  return {{"h", complex_json(c.amp_h())}, {"v", complex_json(c.amp_v())}};
}

PureState2 state_from_json(const json& j) {
  if (!j.is_object() || !j.contains("h") || !j.contains("v")) {
    throw InputError("state JSON needs 'h' and 'v'");
  }
  try {
    return PureState2::normalized(complex_from_json(j["h"]), complex_from_json(j["v"]));
  } catch (const std::invalid_argument& e) {
    throw InputError(std::string("state: ") + e.what());
  }
}

std::string format_fixed(double x) {
  // Avoid "-0.000000" so identical results print identical bytes.
  if (std::abs(x) < 5e-7) x = 0.0;
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", x);
  return buf;
}

void write_counts_csv(std::ostream& out, const std::vector<CountRecord>& records, Arm single_arm) {
  out << kCountsHeader << '\n';
  for (std::size_t k = 0; k < records.size(); ++k) {
    const CountRecord& r = records[k];
    out << k << ',';
    if (r.setting.idler) {
      if (r.counts.size() != 4) throw std::invalid_argument("two-qubit record needs 4 counts");
      out << "both," << format_fixed(r.setting.signal.hwp_deg) << ',' << format_fixed(r.setting.signal.qwp_deg)
          << ',' << format_fixed(r.setting.idler->hwp_deg) << ',' << format_fixed(r.setting.idler->qwp_deg)
          << ',' << r.counts[0] << ',' << r.counts[1] << ',' << r.counts[2] << ',' << r.counts[3] << '\n';
    } else {
      if (r.counts.size() != 2) throw std::invalid_argument("single-qubit record needs 2 counts");
      out << to_string(single_arm) << ',' << format_fixed(r.setting.signal.hwp_deg) << ','
          << format_fixed(r.setting.signal.qwp_deg) << ",,," << r.counts[0] << ',' << r.counts[1] << ",,\n";
    }
  }
}

CountsFile read_counts_csv(std::istream& in, const std::string& origin) {
  CountsFile file;
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  std::optional<int> dim;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string where = origin + ":" + std::to_string(line_no);
    const std::string_view text = trim(line);
    if (text.empty()) continue;
    if (!header_seen) {
      std::string normalized;
      for (auto field : split_commas(text)) {
        if (!normalized.empty()) normalized += ',';
        normalized += field;
      }
      if (normalized != kCountsHeader) {
        throw InputError(where + ": expected header '" + std::string(kCountsHeader) + "'");
      }
      header_seen = true;
      continue;
    }
    const auto f = split_commas(text);
    if (f.size() != 10) {
      throw InputError(where + ": expected 10 columns, got " + std::to_string(f.size()));
    }
    csv_count(f[0], where, "setting_id");
    CountRecord rec;
    rec.setting.signal = {csv_double(f[2], where, "hwp_deg"), csv_double(f[3], where, "qwp_deg")};
    int row_dim = 0;
    if (f[1] == "both") {
      row_dim = 4;
      rec.setting.idler = StationAngles{csv_double(f[4], where, "idler_hwp_deg"),
                                        csv_double(f[5], where, "idler_qwp_deg")};
      rec.counts = {csv_count(f[6], where, "c_hh"), csv_count(f[7], where, "c_hv"),
                    csv_count(f[8], where, "c_vh"), csv_count(f[9], where, "c_vv")};
    } else if (f[1] == "signal" || f[1] == "idler") {
      row_dim = 2;
      if (!f[4].empty() || !f[5].empty() || !f[8].empty() || !f[9].empty()) {
        throw InputError(where + ": single-qubit row must leave idler columns and c_vh, c_vv empty");
      }
      rec.counts = {csv_count(f[6], where, "c_hh"), csv_count(f[7], where, "c_hv")};
    } else {
      throw InputError(where + ": column arm: expected signal, idler or both, got '" + std::string(f[1]) + "'");
    }
    if (dim && *dim != row_dim) throw InputError(where + ": single- and two-qubit rows are mixed");
    dim = row_dim;
    if (rec.total() == 0) throw InputError(where + ": row has zero total counts");
    file.records.push_back(std::move(rec));
  }
  if (!header_seen) throw InputError(origin + ": empty counts file");
  if (file.records.empty()) throw InputError(origin + ": no count rows");
  file.dim = *dim;
  return file;
}

CountsFile read_counts_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError(path.string() + ": cannot open file");
  return read_counts_csv(in, path.string());
}

void write_sweep_csv(std::ostream& out, const SweepResult& result) {
  out << "bloch_angle_deg,fid_mean,fid_sigma,purity_mean\n";
  for (const auto& p : result.points) {
    out << format_fixed(p.bloch_angle_deg) << ',' << format_fixed(p.fidelity_mean) << ','
        << format_fixed(p.fidelity_sigma) << ',' << format_fixed(p.purity_mean) << '\n';
  }
}

json sweep_to_json(const SweepResult& result, const SweepSpec& spec) {
  json points = json::array();
  for (const auto& p : result.points) {
    points.push_back({{"hwp_deg", p.hwp_deg},
                      {"bloch_angle_deg", p.bloch_angle_deg},
                      {"target", to_json(p.target)},
                      {"fid_mean", p.fidelity_mean},
                      {"fid_sigma", p.fidelity_sigma},
                      {"purity_mean", p.purity_mean},
                      {"reconstructed", to_json(p.reconstructed)},
                      {"simulated", to_json(p.simulated)}});
  }
  json sweep = {{"plane", std::string(to_string(spec.plane))},
                {"feedforward", spec.feedforward},
                {"n_points", spec.n_points},
                {"counts_per_setting", spec.counts_per_setting},
                {"angle_jitter_sigma_deg", spec.angle_jitter_sigma_deg},
                {"n_trials", spec.n_trials},
                {"seed", spec.seed},
                {"infinite_statistics", spec.infinite_statistics},
                {"noise", spec.noise == NoiseModel::multinomial ? "multinomial" : "poisson"}};
  if (spec.miscalibration_deg) sweep["miscalibration_deg"] = *spec.miscalibration_deg;
  json source = {{"mode", std::string(to_string(spec.source.mode))},
                 {"visibility", spec.source.visibility},
                 {"chi_signal", spec.source.chi_signal},
                 {"chi_idler", spec.source.chi_idler},
                 {"pdl_fraction", spec.source.pdl_fraction},
                 {"pdl_arm", std::string(to_string(spec.source.pdl_arm))}};
  RspOptions opts;
  opts.switch_model = spec.switch_model;
  opts.leak_probability = spec.source.leak_probability;
  return {{"sweep", std::move(sweep)},
          {"source", std::move(source)},
          {"leak_probability", opts.leak()},
          {"mean_fidelity", result.mean_fidelity()},
          {"fidelity_spread", result.fidelity_spread()},
          {"points", std::move(points)}};
}

std::string sweep_file_stem(Plane plane, bool feedforward) {
  return "sweep_" + std::string(to_string(plane)) + (feedforward ? "_ffon" : "_ffoff");
}

json tomography_to_json(const TomographyResult& result) {
  return {{"rho", to_json(result.rho)},
          {"residual", result.residual},
          {"iterations", result.iterations},
          {"converged", result.converged},
          {"condition_number", result.condition_number},
          {"ill_conditioned", result.ill_conditioned},
          {"purity", purity(result.rho)}};
}

std::string format_timing_table(const TimingBudget& budget, const TimingReport& report) {
  std::ostringstream out;
  auto row = [&](const char* name, double value, const char* unit) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "%-28s %14s %s\n", name, format_fixed(value).c_str(), unit);
    out << buf;
  };
  row("detector to TTM", budget.detector_to_ttm_ns, "ns");
  row("TTM processing", budget.ttm_processing_ns, "ns");
  row("signal propagation", budget.signal_propagation_ns, "ns");
  row("latency", report.latency_ns, "ns");
  row("delay fiber", budget.delay_fiber_m, "m");
  row("photon delay", report.photon_delay_ns, "ns");
  row("slack", report.slack_ns, "ns");
  row("switch settled at", report.switch_settled_ns, "ns");
  row("gate closes at", report.gate_closes_ns, "ns");
  row("max herald rate", report.max_herald_rate_hz, "Hz");
  out << "arrival within gate: " << (report.arrival_within_gate ? "yes" : "no") << '\n';
  out << (report.feasible ? "FEASIBLE" : "INFEASIBLE") << '\n';
  return out.str();
}

std::string format_loss_table(const std::vector<LossComponent>& losses) {
  std::ostringstream out;
  char buf[128];
  for (const auto& c : losses) {
    std::snprintf(buf, sizeof buf, "%-28s %14s dB\n", c.name.c_str(), format_fixed(c.loss_db).c_str());
    out << buf;
  }
  const double total = loss_budget(losses);
  std::snprintf(buf, sizeof buf, "%-28s %14s dB (transmission %s)\n", "total", format_fixed(total).c_str(),
                format_fixed(db_to_transmission(total)).c_str());
  out << buf;
  return out.str();
}

json timing_to_json(const TimingBudget& budget, const TimingReport& report,
                    const std::vector<LossComponent>& losses) {
  json comps = json::array();
  for (const auto& c : losses) comps.push_back({{"name", c.name}, {"loss_db", c.loss_db}});
  return {{"budget",
           {{"detector_to_ttm_ns", budget.detector_to_ttm_ns},
            {"ttm_processing_ns", budget.ttm_processing_ns},
            {"signal_propagation_ns", budget.signal_propagation_ns},
            {"delay_fiber_m", budget.delay_fiber_m},
            {"fiber_index", budget.fiber_index},
            {"gate_duration_ns", budget.gate_duration_ns},
            {"detector_deadtime_ns", budget.detector_deadtime_ns}}},
          {"report",
           {{"latency_ns", report.latency_ns},
            {"photon_delay_ns", report.photon_delay_ns},
            {"slack_ns", report.slack_ns},
            {"switch_settled_ns", report.switch_settled_ns},
            {"gate_closes_ns", report.gate_closes_ns},
            {"arrival_within_gate", report.arrival_within_gate},
            {"feasible", report.feasible},
            {"max_herald_rate_hz", report.max_herald_rate_hz}}},
          {"losses", {{"components", std::move(comps)}, {"total_db", loss_budget(losses)}}}};
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error(tmp.string() + ": cannot open for writing");
    out << content;
    out.flush();
    if (!out) throw std::runtime_error(tmp.string() + ": write failed");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw std::runtime_error(path.string() + ": rename failed");
  }
}

}  // namespace ffsim
