#include "etlp/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace etlp {

namespace {

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

double parse_double(const std::string& s) {
  try {
    return std::stod(s);
  } catch (const std::exception&) {
    throw IoError("cannot parse number: " + s);
  }
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  bool quoted = false;
  for (char ch : line) {
    if (ch == '"') {
      quoted = !quoted;
    } else if (ch == ',' && !quoted) {
      fields.push_back(field);
      field.clear();
    } else {
      field += ch;
    }
  }
  fields.push_back(field);
  return fields;
}

}  // namespace

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out << content;
  if (!out) throw IoError("short write to " + path);
}

std::string problem_to_json(const StandardLp& lp) {
  nlohmann::json doc;
  doc["n"] = lp.n();
  doc["m"] = lp.m();
  doc["c"] = std::vector<double>(lp.c.data(), lp.c.data() + lp.n());
  doc["b"] = std::vector<double>(lp.b.data(), lp.b.data() + lp.m());
  nlohmann::json entries = nlohmann::json::array();
  for (int row = 0; row < lp.m(); ++row)
    for (SparseRowMatrix::InnerIterator it(lp.A, row); it; ++it)
      entries.push_back({{"row", row}, {"col", it.col()}, {"value", it.value()}});
  doc["A"] = std::move(entries);
  return doc.dump(2) + "\n";
}

StandardLp problem_from_json(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("problem document is not valid JSON: ") + e.what());
  }
  try {
    const int n = doc.at("n").get<int>();
    const int m = doc.at("m").get<int>();
    const auto c_vals = doc.at("c").get<std::vector<double>>();
    const auto b_vals = doc.at("b").get<std::vector<double>>();
    if (static_cast<int>(c_vals.size()) != n) throw IoError("field c has wrong length");
    if (static_cast<int>(b_vals.size()) != m) throw IoError("field b has wrong length");
    std::vector<MatrixEntry> entries;
    for (const auto& e : doc.at("A")) {
      entries.push_back(
          {e.at("row").get<int>(), e.at("col").get<int>(), e.at("value").get<double>()});
    }
    Eigen::VectorXd c = Eigen::Map<const Eigen::VectorXd>(c_vals.data(), n);
    Eigen::VectorXd b = Eigen::Map<const Eigen::VectorXd>(b_vals.data(), m);
    return StandardLp::from_entries(n, m, c, b, entries);
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("malformed problem document: ") + e.what());
  }
}

StandardLp load_problem(const std::string& path) {
  return problem_from_json(read_text_file(path));
}

void save_problem(const StandardLp& lp, const std::string& path) {
  write_text_file(path, problem_to_json(lp));
}

void write_trajectory_csv(const HybridTrajectory& traj, int n, int m, const std::string& path) {
  std::ostringstream out;
  out << "t,j";
  for (int i = 0; i < n; ++i) out << ",x" << i;
  for (int l = 0; l < m; ++l) out << ",z" << l;
  for (int i = 0; i < n; ++i) out << ",xhat" << i;
  for (int l = 0; l < m; ++l) out << ",zhat" << l;
  out << ",V,V1,V2,sigma\n";
  for (const Sample& s : traj.samples) {
    out << fmt_double(s.t) << ',' << s.j;
    for (int i = 0; i < n; ++i) out << ',' << fmt_double(s.x[i]);
    for (int l = 0; l < m; ++l) out << ',' << fmt_double(s.z[l]);
    for (int i = 0; i < n; ++i) out << ',' << fmt_double(s.x_hat[i]);
    for (int l = 0; l < m; ++l) out << ',' << fmt_double(s.z_hat[l]);
    out << ',' << fmt_double(s.v) << ',' << fmt_double(s.v1) << ',' << fmt_double(s.v2) << ','
        << s.sigma_mask << '\n';
  }
  write_text_file(path, out.str());
}

std::vector<Sample> read_trajectory_csv(const std::string& path) {
  std::istringstream in(read_text_file(path));
  std::string line;
  if (!std::getline(in, line)) throw IoError("empty trajectory file: " + path);
  const auto header = split_csv_line(line);
  int n = 0, m = 0;
  for (const auto& h : header) {
    if (h.rfind("xhat", 0) == 0 || h.rfind("zhat", 0) == 0) continue;
    if (h.rfind('x', 0) == 0) ++n;
    if (h.rfind('z', 0) == 0) ++m;
  }
  const size_t expected = 2 + 2 * static_cast<size_t>(n + m) + 4;
  if (header.size() != expected) throw IoError("unexpected trajectory header in " + path);

  std::vector<Sample> samples;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != expected) throw IoError("bad trajectory row in " + path);
    Sample s;
    size_t k = 0;
    s.t = parse_double(fields[k++]);
    s.j = std::stol(fields[k++]);
    s.x.resize(n);
    s.z.resize(m);
    s.x_hat.resize(n);
    s.z_hat.resize(m);
    for (int i = 0; i < n; ++i) s.x[i] = parse_double(fields[k++]);
    for (int l = 0; l < m; ++l) s.z[l] = parse_double(fields[k++]);
    for (int i = 0; i < n; ++i) s.x_hat[i] = parse_double(fields[k++]);
    for (int l = 0; l < m; ++l) s.z_hat[l] = parse_double(fields[k++]);
    s.v = parse_double(fields[k++]);
    s.v1 = parse_double(fields[k++]);
    s.v2 = parse_double(fields[k++]);
    s.sigma_mask = std::stoull(fields[k++]);
    samples.push_back(std::move(s));
  }
  return samples;
}

void write_events_csv(const HybridTrajectory& traj, const std::string& path) {
  std::ostringstream out;
  out << "t,j,agent,causes\n";
  for (const BroadcastEvent& e : traj.events) {
    out << fmt_double(e.t) << ',' << e.j << ',' << e.agent << ",\"" << causes_to_string(e.causes)
        << "\"\n";
  }
  write_text_file(path, out.str());
}

std::vector<BroadcastEvent> read_events_csv(const std::string& path) {
  std::istringstream in(read_text_file(path));
  std::string line;
  if (!std::getline(in, line)) throw IoError("empty event log: " + path);
  std::vector<BroadcastEvent> events;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != 4) throw IoError("bad event row in " + path);
    BroadcastEvent e;
    e.t = parse_double(fields[0]);
    e.j = std::stol(fields[1]);
    e.agent = std::stoi(fields[2]);
    e.causes = causes_from_string(fields[3]);
    events.push_back(e);
  }
  return events;
}

void Metrics::put(const std::string& key, const std::string& value) {
  entries.emplace_back(key, value);
}
void Metrics::put(const std::string& key, double value) { entries.emplace_back(key, fmt_double(value)); }
void Metrics::put(const std::string& key, long value) {
  entries.emplace_back(key, std::to_string(value));
}

std::string Metrics::get(const std::string& key) const {
  for (const auto& [k, v] : entries)
    if (k == key) return v;
  throw IoError("missing metric: " + key);
}

bool Metrics::has(const std::string& key) const {
  for (const auto& [k, v] : entries)
    if (k == key) return true;
  return false;
}

void write_metrics(const Metrics& metrics, const std::string& path) {
  std::ostringstream out;
  for (const auto& [k, v] : metrics.entries) out << k << " = " << v << '\n';
  write_text_file(path, out.str());
}

Metrics read_metrics(const std::string& path) {
  std::istringstream in(read_text_file(path));
  Metrics metrics;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const size_t sep = line.find(" = ");
    if (sep == std::string::npos) throw IoError("bad metrics line: " + line);
    metrics.entries.emplace_back(line.substr(0, sep), line.substr(sep + 3));
  }
  return metrics;
}

}  // namespace etlp
