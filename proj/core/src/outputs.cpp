#include "ascsense/outputs.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "ascsense/metrics.hpp"

namespace ascsense {

namespace {

std::string num(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string clean(std::string s) {
  for (char& c : s)
    if (c == ',' || c == '"' || c == '\n' || c == '\r') c = ' ';
  return s;
}

std::ofstream open_out(const std::filesystem::path& p) {
  std::ofstream f(p, std::ios::binary | std::ios::trunc);
  if (!f) throw Error(Errc::io, p.string() + ": cannot open for writing");
  return f;
}

void finish(std::ofstream& f, const std::filesystem::path& p) {
  f.flush();
  if (!f) throw Error(Errc::io, p.string() + ": write failed");
}

template <class F>
std::vector<double> pick(const std::vector<const MetricRecord*>& rows, F f) {
  std::vector<double> v;
  v.reserve(rows.size());
  for (const auto* r : rows) v.push_back(f(*r));
  return v;
}

}  // namespace

std::vector<AggregateRow> aggregate(const SweepTable& table) {
  std::map<std::pair<int, int>, std::vector<const MetricRecord*>> groups;
  for (const auto& r : table.trials) groups[{r.point, static_cast<int>(r.method)}].push_back(&r);
  std::map<std::pair<int, int>, std::vector<double>> gammas;
  for (const auto& t : table.targets)
    gammas[{t.point, static_cast<int>(t.method)}].push_back(t.gamma_db);

  std::vector<AggregateRow> out;
  for (const auto& [key, rows] : groups) {
    AggregateRow a;
    const MetricRecord& first = *rows.front();
    a.point = key.first;
    a.method = first.method;
    a.snr_db = first.snr_db;
    a.dyn_prop = first.dyn_prop;
    a.tau_sep = first.tau_sep;
    a.trials = static_cast<int>(rows.size());
    std::vector<bool> ok;
    for (const auto* r : rows) {
      if (r->flags.find("error:") != std::string::npos) ++a.failed;
      ok.push_back(r->resolved);
    }
    const auto rel = pick(rows, [](const MetricRecord& r) { return r.rel_to_error; });
    const auto abs = pick(rows, [](const MetricRecord& r) { return r.abs_to_error; });
    const auto del = pick(rows, [](const MetricRecord& r) { return r.delay_abs_error; });
    const auto drel = pick(rows, [](const MetricRecord& r) { return r.delay_rel_error; });
    const auto gid = pick(rows, [](const MetricRecord& r) { return r.gamma_ideal_db; });
    a.rel_to_q1 = quantile(rel, 0.25);
    a.rel_to_median = quantile(rel, 0.5);
    a.rel_to_q3 = quantile(rel, 0.75);
    a.abs_to_q1 = quantile(abs, 0.25);
    a.abs_to_median = quantile(abs, 0.5);
    a.abs_to_q3 = quantile(abs, 0.75);
    a.delay_q1 = quantile(del, 0.25);
    a.delay_median = quantile(del, 0.5);
    a.delay_q3 = quantile(del, 0.75);
    a.delay_rel_median = median(drel);
    const auto& g = gammas[key];
    a.gamma_q1 = quantile(g, 0.25);
    a.gamma_median = quantile(g, 0.5);
    a.gamma_q3 = quantile(g, 0.75);
    a.gamma_ideal_median = median(gid);
    a.resolution = resolution_probability(ok);
    out.push_back(a);
  }
  return out;
}

void emit_outputs(const SweepTable& table, const std::string& dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(Errc::io, dir + ": " + ec.message());
  const fs::path base(dir);

  {
    const auto p = base / "trials.csv";
    auto f = open_out(p);
    f << "point,trial,method,snr_db,dyn_prop,tau_sep_m,rel_to_error_m,abs_to_error_m,"
         "delay_rel_error_m,delay_abs_error_m,resolved,gamma_db,gamma_ideal_db,n_peaks,flags\n";
    for (const auto& r : table.trials)
      f << r.point << ',' << r.trial << ',' << to_string(r.method) << ',' << num(r.snr_db) << ','
        << num(r.dyn_prop) << ',' << num(r.tau_sep) << ',' << num(r.rel_to_error) << ','
        << num(r.abs_to_error) << ',' << num(r.delay_rel_error) << ',' << num(r.delay_abs_error)
        << ',' << (r.resolved ? 1 : 0) << ',' << num(r.gamma_db) << ',' << num(r.gamma_ideal_db)
        << ',' << r.n_peaks << ',' << clean(r.flags) << '\n';
    finish(f, p);
  }
  {
    const auto p = base / "targets.csv";
    auto f = open_out(p);
    f << "point,trial,method,target,true_range_m,est_range_m,delay_rel_error_m,"
         "delay_abs_error_m,true_aoa_deg,est_aoa_deg,aoa_error_deg,gamma_db,gamma_ideal_db\n";
    for (const auto& t : table.targets)
      f << t.point << ',' << t.trial << ',' << to_string(t.method) << ',' << t.target << ','
        << num(t.true_range) << ',' << num(t.est_range) << ',' << num(t.delay_rel_error) << ','
        << num(t.delay_abs_error) << ',' << num(t.true_aoa_deg) << ',' << num(t.est_aoa_deg)
        << ',' << num(t.aoa_error_deg) << ',' << num(t.gamma_db) << ',' << num(t.gamma_ideal_db)
        << '\n';
    finish(f, p);
  }
  {
    const auto p = base / "aggregates.csv";
    auto f = open_out(p);
    f << "point,method,snr_db,dyn_prop,tau_sep_m,trials,failed,rel_to_q1_m,rel_to_median_m,"
         "rel_to_q3_m,abs_to_q1_m,abs_to_median_m,abs_to_q3_m,delay_q1_m,delay_median_m,"
         "delay_q3_m,delay_rel_median_m,gamma_q1_db,gamma_median_db,gamma_q3_db,"
         "gamma_ideal_median_db,resolution\n";
    for (const auto& a : aggregate(table))
      f << a.point << ',' << to_string(a.method) << ',' << num(a.snr_db) << ',' << num(a.dyn_prop)
        << ',' << num(a.tau_sep) << ',' << a.trials << ',' << a.failed << ',' << num(a.rel_to_q1)
        << ',' << num(a.rel_to_median) << ',' << num(a.rel_to_q3) << ',' << num(a.abs_to_q1)
        << ',' << num(a.abs_to_median) << ',' << num(a.abs_to_q3) << ',' << num(a.delay_q1)
        << ',' << num(a.delay_median) << ',' << num(a.delay_q3) << ','
        << num(a.delay_rel_median) << ',' << num(a.gamma_q1) << ',' << num(a.gamma_median)
        << ',' << num(a.gamma_q3) << ',' << num(a.gamma_ideal_median) << ','
        << num(a.resolution) << '\n';
    finish(f, p);
  }
  {
    const auto p = base / "timings.csv";
    auto f = open_out(p);
    f << "point,trial,method,runtime_s\n";
    for (const auto& r : table.trials)
      f << r.point << ',' << r.trial << ',' << to_string(r.method) << ',' << num(r.runtime) << '\n';
    finish(f, p);
  }
}

std::vector<MetricRecord> read_trials_csv(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw Error(Errc::io, path + ": cannot open");
  std::string line;
  if (!std::getline(f, line)) throw Error(Errc::format, path + ": missing header");
  std::vector<MetricRecord> out;
  int lineno = 1;
  while (std::getline(f, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> c;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) c.push_back(cell);
    if (!line.empty() && line.back() == ',') c.emplace_back();
    if (c.size() != 15) throw Error(Errc::format, path + ":" + std::to_string(lineno) + ": expected 15 fields");
    try {
      MetricRecord r;
      r.point = std::stoi(c[0]);
      r.trial = std::stoi(c[1]);
      r.method = parse_method(c[2]);
      r.snr_db = std::stod(c[3]);
      r.dyn_prop = std::stod(c[4]);
      r.tau_sep = std::stod(c[5]);
      r.rel_to_error = std::stod(c[6]);
      r.abs_to_error = std::stod(c[7]);
      r.delay_rel_error = std::stod(c[8]);
      r.delay_abs_error = std::stod(c[9]);
      r.resolved = c[10] == "1";
      r.gamma_db = std::stod(c[11]);
      r.gamma_ideal_db = std::stod(c[12]);
      r.n_peaks = std::stoi(c[13]);
      r.flags = c[14];
      out.push_back(r);
    } catch (const std::logic_error&) {
      throw Error(Errc::format, path + ":" + std::to_string(lineno) + ": malformed field");
    }
  }
  return out;
}

}  // namespace ascsense
