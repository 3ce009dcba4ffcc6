#include "braidopt/protocol_io.hpp"

#include <json.hpp>

#include <cstdio>
#include <ctime>
#include <fstream>
#include <sstream>

namespace braidopt {

namespace {

using nlohmann::json;

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  return out;
}

std::string timestamp_line() {
  std::time_t now = std::time(nullptr);
  char buf[64];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  return std::string("# generated ") + buf + "\n";
}

// RFC-4180-style quoting for text fields.
std::string csv_quote(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) {
    if (c == '"') q += '"';
    q += c;
  }
  q += '"';
  return q;
}

}  // namespace

std::string format_full(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string protocol_to_json(const Protocol& protocol) {
  json doc;
  doc["total_time"] = protocol.total_time;
  json segs = json::array();
  for (const Segment& s : protocol.segments) {
    segs.push_back({{"duration", s.duration},
                    {"delta", {s.control.d1, s.control.d2, s.control.d3}}});
  }
  doc["segments"] = std::move(segs);
  doc["endpoint"] = protocol.endpoint;
  doc["metadata"] = protocol.metadata;
  return doc.dump(2) + "\n";
}

Protocol protocol_from_json(const std::string& text,
                            const std::string& origin) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(origin + ": " + e.what());
  }
  try {
    Protocol p;
    p.total_time = doc.at("total_time").get<double>();
    std::size_t idx = 0;
    for (const json& s : doc.at("segments")) {
      Segment seg;
      seg.duration = s.at("duration").get<double>();
      const json& d = s.at("delta");
      if (!d.is_array() || d.size() != 3)
        throw ParseError(origin + ": segments[" + std::to_string(idx) +
                         "].delta must be a 3-element array");
      seg.control.d1 = d[0].get<double>();
      seg.control.d2 = d[1].get<double>();
      seg.control.d3 = d[2].get<double>();
      p.segments.push_back(seg);
      ++idx;
    }
    if (doc.contains("endpoint")) {
      const json& e = doc.at("endpoint");
      if (!e.is_array() || e.size() != 3)
        throw ParseError(origin + ": endpoint must be a 3-element array");
      for (int j = 0; j < 3; ++j) p.endpoint[j] = e[j].get<double>();
    }
    if (doc.contains("metadata"))
      for (const auto& [k, v] : doc.at("metadata").items())
        p.metadata[k] = v.is_string() ? v.get<std::string>() : v.dump();
    p.validate();
    return p;
  } catch (const ParseError&) {
    throw;
  } catch (const std::exception& e) {
    throw ParseError(origin + ": " + e.what());
  }
}

void save_protocol(const Protocol& protocol, const std::string& path) {
  open_out(path) << protocol_to_json(protocol);
}

Protocol load_protocol(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path + ": cannot open");
  std::ostringstream buf;
  buf << in.rdbuf();
  return protocol_from_json(buf.str(), path);
}

void write_trajectory_csv(const Trajectory& trajectory,
                          const std::string& path, int stride) {
  if (stride < 1) throw std::invalid_argument("trajectory csv: stride >= 1");
  std::ofstream out = open_out(path);
  out << timestamp_line() << "t";
  for (int k = 0; k < 16; ++k) out << ",re" << k;
  for (int k = 0; k < 16; ++k) out << ",im" << k;
  out << "\n";
  const std::size_t n = trajectory.states.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (i % stride != 0 && i + 1 != n) continue;
    out << format_full(trajectory.times[i]);
    const Eigen::Matrix4cd& m = trajectory.states[i];
    for (int k = 0; k < 16; ++k) out << "," << format_full(m.data()[k].real());
    for (int k = 0; k < 16; ++k) out << "," << format_full(m.data()[k].imag());
    out << "\n";
  }
}

void write_switching_csv(const SwitchingRecord& record,
                         const std::string& path) {
  std::ofstream out = open_out(path);
  out << timestamp_line()
      << "t,F1,F2,F3,G1,G2,G3,d1,d2,d3,branch1,branch2,branch3\n";
  for (const SwitchingSample& s : record.samples) {
    out << format_full(s.t);
    for (int j = 0; j < 3; ++j) out << "," << format_full(s.f[j]);
    for (int j = 0; j < 3; ++j) out << "," << format_full(s.g[j]);
    for (int j = 0; j < 3; ++j) out << "," << format_full(s.delta_d[j]);
    for (int j = 0; j < 3; ++j) out << "," << branch_name(s.branch[j]);
    out << "\n";
  }
}

void write_sweep_csv(const SweepResult& sweep, const std::string& path) {
  std::ofstream out = open_out(path);
  out << timestamp_line();
  for (const RegimeAnnotation& r : sweep.regimes) {
    out << "# regimes w=" << format_full(r.w) << " tau_c=" << format_full(r.tau_c)
        << (r.tau_c_below_grid ? " (below grid)" : "");
    if (r.regime2_found)
      out << " regime2_end=" << format_full(r.regime2_end);
    out << "\n";
  }
  out << "tau,w,c_min,method,protocol_file\n";
  for (const SweepRow& r : sweep.rows) {
    out << format_full(r.tau) << "," << format_full(r.w) << ","
        << format_full(r.c_min) << "," << csv_quote(r.method) << ","
        << csv_quote(r.protocol_file) << "\n";
  }
}

SweepResult read_sweep_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path + ": cannot open");
  SweepResult out;
  std::string line;
  std::size_t lineno = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    if (!header_seen) {
      header_seen = true;  // column header
      continue;
    }
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
      const char c = line[i];
      if (quoted) {
        if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          ++i;
        } else if (c == '"') {
          quoted = false;
        } else {
          cur += c;
        }
      } else if (c == '"') {
        quoted = true;
      } else if (c == ',') {
        fields.push_back(cur);
        cur.clear();
      } else {
        cur += c;
      }
    }
    fields.push_back(cur);
    if (fields.size() != 5)
      throw ParseError(path + ":" + std::to_string(lineno) +
                       ": expected 5 fields (tau,w,c_min,method,protocol_file)");
    SweepRow row;
    try {
      row.tau = std::stod(fields[0]);
      row.w = std::stod(fields[1]);
      row.c_min = std::stod(fields[2]);
    } catch (const std::exception&) {
      throw ParseError(path + ":" + std::to_string(lineno) +
                       ": numeric field is not parseable");
    }
    row.method = fields[3];
    row.protocol_file = fields[4];
    out.rows.push_back(std::move(row));
  }
  if (!header_seen) throw ParseError(path + ": no header row found");
  return out;
}

void write_baseline_csv(const std::vector<BaselineRow>& rows,
                        const std::string& path) {
  std::ofstream out = open_out(path);
  out << timestamp_line() << "tau,w,cost\n";
  for (const BaselineRow& r : rows)
    out << format_full(r.tau) << "," << format_full(r.w) << ","
        << format_full(r.cost) << "\n";
}

void write_histogram_csv(const HistogramResult& hist,
                         const std::string& path) {
  std::ofstream out = open_out(path);
  out << timestamp_line() << "tau,bin_lo,bin_hi,count\n";
  for (std::size_t ti = 0; ti < hist.taus.size(); ++ti)
    for (std::size_t b = 0; b + 1 < hist.bin_edges.size(); ++b)
      out << format_full(hist.taus[ti]) << ","
          << format_full(hist.bin_edges[b]) << ","
          << format_full(hist.bin_edges[b + 1]) << "," << hist.counts[ti][b]
          << "\n";
}

void write_histogram_minima_csv(const HistogramResult& hist,
                                const std::string& path) {
  std::ofstream out = open_out(path);
  out << timestamp_line() << "tau,min_cost,samples,reference_cost\n";
  for (std::size_t ti = 0; ti < hist.taus.size(); ++ti)
    out << format_full(hist.taus[ti]) << ","
        << format_full(hist.per_tau_min[ti]) << "," << hist.samples_per_tau
        << "," << format_full(hist.reference_cost) << "\n";
}

void write_extrapolation_csv(const ExtrapolationResult& fit,
                             const std::string& path) {
  std::ofstream out = open_out(path);
  out << timestamp_line()
      << "w,degree,intercept,intercept_stderr,residual_rms,condition_number,"
         "ill_conditioned,points_used,bootstrap_n";
  for (int k = 0; k <= fit.degree; ++k) out << ",c" << k;
  out << "\n"
      << format_full(fit.w) << "," << fit.degree << ","
      << format_full(fit.intercept) << "," << format_full(fit.intercept_stderr)
      << "," << format_full(fit.residual_rms) << ","
      << format_full(fit.condition_number) << ","
      << (fit.ill_conditioned ? 1 : 0) << "," << fit.points_used << ","
      << fit.bootstrap_n;
  for (double c : fit.coefficients) out << "," << format_full(c);
  out << "\n";
}

void append_anneal_result_csv(const std::string& path, double tau, double w,
                              std::uint64_t seed, double best_cost,
                              const std::string& protocol_file) {
  const bool fresh = !std::ifstream(path).good();
  std::ofstream out(path, std::ios::app);
  if (!out) throw std::runtime_error("cannot open for appending: " + path);
  if (fresh) out << "tau,w,seed,best_cost,protocol_file\n";
  out << format_full(tau) << "," << format_full(w) << "," << seed << ","
      << format_full(best_cost) << "," << csv_quote(protocol_file) << "\n";
}

}  // namespace braidopt
