#include "focus/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <system_error>

#include "focus/errors.hpp"

namespace focus {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && (std::isspace(static_cast<unsigned char>(s[b])) != 0)) ++b;
  while (e > b && (std::isspace(static_cast<unsigned char>(s[e - 1])) != 0)) --e;
  std::string out = s.substr(b, e - b);
  if (out.size() >= 2 && out.front() == '"' && out.back() == '"') out = out.substr(1, out.size() - 2);
  return out;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  bool quoted = false;
  for (char c : line) {
    if (c == '"') {
      quoted = !quoted;
    } else if (c == ',' && !quoted) {
      cells.push_back(trim(cell));
      cell.clear();
    } else {
      cell.push_back(c);
    }
  }
  cells.push_back(trim(cell));
  return cells;
}

std::vector<std::vector<std::string>> read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open '" + path.string() + "'");
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    rows.push_back(split_csv_line(line));
  }
  if (in.bad()) throw Error(ErrorCode::kIo, "error reading '" + path.string() + "'");
  return rows;
}

bool is_missing_token(const std::string& s) {
  return s.empty() || s == "NaN" || s == "nan" || s == "NA" || s == "na" || s == "null";
}

double parse_number(const std::string& s, const std::filesystem::path& path, std::size_t line) {
  double v = 0.0;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  if (!s.empty() && *first == '+') ++first;
  const auto res = std::from_chars(first, last, v);
  if (res.ec != std::errc() || res.ptr != last) {
    throw Error(ErrorCode::kIo, path.string() + ":" + std::to_string(line) +
                                    ": cannot parse number '" + s + "'");
  }
  return v;
}

std::ofstream open_out(const std::filesystem::path& path) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
    if (ec) throw Error(ErrorCode::kIo, "cannot create directory for '" + path.string() + "'");
  }
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIo, "cannot write '" + path.string() + "'");
  return out;
}

void finish(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) throw Error(ErrorCode::kIo, "error writing '" + path.string() + "'");
}

std::string join(const std::vector<std::string>& cells) {
  std::string s;
  for (std::size_t k = 0; k < cells.size(); ++k) {
    if (k > 0) s += ',';
    s += cells[k];
  }
  return s;
}

std::string cell(double v) { return std::isnan(v) ? std::string() : format_double(v); }

}  // namespace

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

LabeledPanel read_wide_csv(const std::filesystem::path& path,
                           const std::optional<std::filesystem::path>& mask_path) {
  const auto rows = read_csv(path);
  if (rows.size() < 2) throw Error(ErrorCode::kIo, path.string() + ": needs a header and data");
  const std::size_t width = rows.front().size();
  if (width < 3) throw Error(ErrorCode::kIo, path.string() + ": needs at least two time columns");
  const auto n = static_cast<Eigen::Index>(rows.size() - 1);
  const auto t_len = static_cast<Eigen::Index>(width - 1);

  std::vector<std::string> time_labels(rows.front().begin() + 1, rows.front().end());
  std::vector<std::string> unit_labels;
  Eigen::MatrixXd values = Eigen::MatrixXd::Zero(n, t_len);
  Mask mask = Mask::Zero(n, t_len);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& row = rows[static_cast<std::size_t>(i) + 1];
    if (row.size() != width) {
      throw Error(ErrorCode::kIo, path.string() + ":" + std::to_string(i + 2) + ": expected " +
                                      std::to_string(width) + " cells, got " +
                                      std::to_string(row.size()));
    }
    unit_labels.push_back(row.front());
    for (Eigen::Index t = 0; t < t_len; ++t) {
      const std::string& s = row[static_cast<std::size_t>(t) + 1];
      if (is_missing_token(s)) continue;
      const double v = parse_number(s, path, static_cast<std::size_t>(i) + 2);
      if (std::isnan(v)) continue;
      values(i, t) = v;
      mask(i, t) = 1;
    }
  }

  if (mask_path) {
    const auto mrows = read_csv(*mask_path);
    if (mrows.size() != rows.size() || mrows.front().size() != width) {
      throw Error(ErrorCode::kIo, mask_path->string() + ": shape does not match the panel");
    }
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto& row = mrows[static_cast<std::size_t>(i) + 1];
      if (row.size() != width) {
        throw Error(ErrorCode::kIo, mask_path->string() + ": ragged row " + std::to_string(i + 2));
      }
      for (Eigen::Index t = 0; t < t_len; ++t) {
        const std::string& s = row[static_cast<std::size_t>(t) + 1];
        if (s == "1") {
          if (mask(i, t) == 0) {
            throw Error(ErrorCode::kIo, mask_path->string() + ": entry (" + std::to_string(i + 1) +
                                            ", " + std::to_string(t + 1) +
                                            ") is marked observed but has no value");
          }
        } else if (s == "0") {
          mask(i, t) = 0;
        } else {
          throw Error(ErrorCode::kIo, mask_path->string() + ": mask cells must be 0 or 1");
        }
      }
    }
  }
  return LabeledPanel{Panel(std::move(values), std::move(mask)), std::move(unit_labels),
                      std::move(time_labels)};
}

LabeledPanel read_long_csv(const std::filesystem::path& path) {
  const auto rows = read_csv(path);
  if (rows.empty()) throw Error(ErrorCode::kIo, path.string() + ": empty file");
  const auto& header = rows.front();
  std::map<std::string, std::size_t> col;
  for (std::size_t k = 0; k < header.size(); ++k) col[header[k]] = k;
  for (const char* name : {"unit", "time", "value"}) {
    if (!col.count(name)) {
      throw Error(ErrorCode::kIo, path.string() + ": missing column '" + std::string(name) + "'");
    }
  }
  const bool has_observed = col.count("observed") > 0;

  std::vector<std::string> units;
  std::vector<std::string> times;
  std::map<std::string, Eigen::Index> unit_index;
  std::map<std::string, Eigen::Index> time_index;
  struct Entry {
    Eigen::Index i, t;
    double v;
    bool obs;
  };
  std::vector<Entry> entries;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    if (row.size() != header.size()) {
      throw Error(ErrorCode::kIo, path.string() + ":" + std::to_string(r + 1) + ": ragged row");
    }
    const std::string& u = row[col["unit"]];
    const std::string& t = row[col["time"]];
    if (!unit_index.count(u)) {
      unit_index[u] = static_cast<Eigen::Index>(units.size());
      units.push_back(u);
    }
    if (!time_index.count(t)) {
      time_index[t] = static_cast<Eigen::Index>(times.size());
      times.push_back(t);
    }
    const std::string& vs = row[col["value"]];
    bool obs = !is_missing_token(vs);
    if (has_observed) {
      const std::string& os = row[col["observed"]];
      if (os != "0" && os != "1") {
        throw Error(ErrorCode::kIo, path.string() + ":" + std::to_string(r + 1) +
                                        ": observed must be 0 or 1");
      }
      obs = obs && os == "1";
    }
    const double v = obs ? parse_number(vs, path, r + 1) : 0.0;
    entries.push_back({unit_index[u], time_index[t], v, obs && !std::isnan(v)});
  }
  const auto n = static_cast<Eigen::Index>(units.size());
  const auto t_len = static_cast<Eigen::Index>(times.size());
  if (n < 1 || t_len < 2) throw Error(ErrorCode::kIo, path.string() + ": too few units or times");
  Eigen::MatrixXd values = Eigen::MatrixXd::Zero(n, t_len);
  Mask mask = Mask::Zero(n, t_len);
  for (const auto& e : entries) {
    if (!e.obs) continue;
    if (mask(e.i, e.t) != 0) {
      throw Error(ErrorCode::kIo, path.string() + ": duplicate observation for unit '" +
                                      units[static_cast<std::size_t>(e.i)] + "' at time '" +
                                      times[static_cast<std::size_t>(e.t)] + "'");
    }
    values(e.i, e.t) = e.v;
    mask(e.i, e.t) = 1;
  }
  return LabeledPanel{Panel(std::move(values), std::move(mask)), std::move(units),
                      std::move(times)};
}

void write_wide_csv(const std::filesystem::path& path, const LabeledPanel& data) {
  auto out = open_out(path);
  const Panel& p = data.panel;
  out << "unit";
  for (Eigen::Index t = 0; t < p.n_times(); ++t) {
    out << ',' << (static_cast<std::size_t>(t) < data.time_labels.size()
                       ? data.time_labels[static_cast<std::size_t>(t)]
                       : std::to_string(t + 1));
  }
  out << '\n';
  for (Eigen::Index i = 0; i < p.n_units(); ++i) {
    out << (static_cast<std::size_t>(i) < data.unit_labels.size()
                ? data.unit_labels[static_cast<std::size_t>(i)]
                : std::to_string(i + 1));
    for (Eigen::Index t = 0; t < p.n_times(); ++t) {
      out << ',';
      if (p.observed(i, t)) out << format_double(p.values()(i, t));
    }
    out << '\n';
  }
  finish(out, path);
}

void write_matrix_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
                      const Eigen::MatrixXd& values, const std::vector<std::string>& row_labels) {
  auto out = open_out(path);
  out << join(header) << '\n';
  for (Eigen::Index i = 0; i < values.rows(); ++i) {
    std::vector<std::string> cells;
    if (!row_labels.empty()) cells.push_back(row_labels[static_cast<std::size_t>(i)]);
    for (Eigen::Index j = 0; j < values.cols(); ++j) cells.push_back(cell(values(i, j)));
    out << join(cells) << '\n';
  }
  finish(out, path);
}

void write_factors_csv(const std::filesystem::path& path, const FactorModelFit& fit,
                       const std::vector<std::string>& time_labels) {
  std::vector<std::string> header{"time"};
  for (Eigen::Index k = 0; k < fit.rank; ++k) header.push_back("f" + std::to_string(k + 1));
  write_matrix_csv(path, header, fit.factors, time_labels);
}

void write_loadings_csv(const std::filesystem::path& path, const FactorModelFit& fit,
                        const std::vector<std::string>& unit_labels) {
  auto out = open_out(path);
  out << "unit";
  for (Eigen::Index k = 0; k < fit.rank; ++k) out << ",lambda" << k + 1;
  out << ",ok\n";
  for (Eigen::Index i = 0; i < fit.n_units(); ++i) {
    out << unit_labels[static_cast<std::size_t>(i)];
    for (Eigen::Index k = 0; k < fit.rank; ++k) out << ',' << cell(fit.loadings(i, k));
    out << ',' << (fit.loading_ok[static_cast<std::size_t>(i)] ? 1 : 0) << '\n';
  }
  finish(out, path);
}

void write_eigenvalues_csv(const std::filesystem::path& path, const FactorModelFit& fit) {
  auto out = open_out(path);
  out << "index,eigenvalue\n";
  for (Eigen::Index k = 0; k < fit.eigenvalues.size(); ++k) {
    out << k + 1 << ',' << format_double(fit.eigenvalues(k)) << '\n';
  }
  finish(out, path);
}

void write_dynamics_csv(const std::filesystem::path& path, const VarDynamics& dyn) {
  auto out = open_out(path);
  out << "block,row,col,value\n";
  for (std::size_t k = 0; k < dyn.coef.size(); ++k) {
    const auto& a = dyn.coef[k];
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
      for (Eigen::Index j = 0; j < a.cols(); ++j) {
        out << 'A' << k + 1 << ',' << i + 1 << ',' << j + 1 << ',' << format_double(a(i, j))
            << '\n';
      }
    }
  }
  for (Eigen::Index i = 0; i < dyn.innovation_cov.rows(); ++i) {
    for (Eigen::Index j = 0; j < dyn.innovation_cov.cols(); ++j) {
      out << "sigma_eta," << i + 1 << ',' << j + 1 << ','
          << format_double(dyn.innovation_cov(i, j)) << '\n';
    }
  }
  out << "order,0,0," << dyn.order << '\n';
  out << "spectral_radius,0,0," << format_double(dyn.spectral_radius) << '\n';
  finish(out, path);
}

void write_forecasts_csv(const std::filesystem::path& path,
                         const std::vector<ForecastResult>& rows,
                         const std::vector<std::string>& unit_labels) {
  auto out = open_out(path);
  out << "unit,horizon,point,std_error,ci_lower,ci_upper,flags\n";
  for (const auto& r : rows) {
    std::string flags;
    for (std::size_t k = 0; k < r.flags.size(); ++k) {
      if (k > 0) flags += '|';
      flags += r.flags[k];
    }
    out << unit_labels[static_cast<std::size_t>(r.unit)] << ',' << r.horizon << ','
        << cell(r.point) << ',' << cell(r.std_error) << ',' << cell(r.ci_lower) << ','
        << cell(r.ci_upper) << ',' << flags << '\n';
  }
  finish(out, path);
}

void write_variance_pieces_csv(const std::filesystem::path& path,
                               const std::vector<std::pair<std::string, Eigen::MatrixXd>>& pieces) {
  auto out = open_out(path);
  out << "piece,rows,cols,values\n";
  for (const auto& [name, m] : pieces) {
    std::string vals;
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      for (Eigen::Index j = 0; j < m.cols(); ++j) {
        if (!vals.empty()) vals += ' ';
        vals += format_double(m(i, j));
      }
    }
    out << name << ',' << m.rows() << ',' << m.cols() << ',' << vals << '\n';
  }
  finish(out, path);
}

void write_experiment_csv(const std::filesystem::path& path, const ExperimentResult& result) {
  auto out = open_out(path);
  out << "dgp,T,trial,method,seed,msfe,coverage,failed,error\n";
  for (const auto& r : result.rows) {
    std::string err = r.error;
    for (char& c : err) {
      if (c == ',' || c == '\n') c = ';';
    }
    out << r.dgp << ',' << r.n_times << ',' << r.trial << ',' << r.method << ',' << r.seed << ','
        << cell(r.msfe) << ',' << cell(r.coverage) << ',' << (r.failed ? 1 : 0) << ',' << err
        << '\n';
  }
  finish(out, path);
}

void write_experiment_summary_csv(const std::filesystem::path& path,
                                  const ExperimentResult& result) {
  auto out = open_out(path);
  out << "dgp,T,method,mean_msfe,coverage,failed,wilcoxon_p\n";
  for (const auto& c : result.cells) {
    out << c.dgp << ',' << c.n_times << ',' << c.method << ',' << cell(c.mean_msfe) << ','
        << cell(c.coverage) << ',' << c.failed << ',' << cell(c.wilcoxon_p) << '\n';
  }
  finish(out, path);
}

void write_experiment_slopes_csv(const std::filesystem::path& path,
                                 const ExperimentResult& result) {
  auto out = open_out(path);
  out << "dgp,method,log_log_slope\n";
  for (const auto& s : result.slopes) {
    out << s.dgp << ',' << s.method << ',' << cell(s.slope) << '\n';
  }
  finish(out, path);
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  auto out = open_out(path);
  out << text;
  finish(out, path);
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace focus
