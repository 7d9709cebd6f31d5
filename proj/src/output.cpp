#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "tvgames/error.hpp"
#include "tvgames/experiment.hpp"

namespace tvgames {

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::InvalidArgument, "cannot write " + path.string());
  return out;
}

double parse_cell(const std::string& s) {
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  if (s == "nan" || s.empty()) return std::numeric_limits<double>::quiet_NaN();
  return std::strtod(s.c_str(), nullptr);
}

}  // namespace

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

Round default_stride(Round rounds) { return std::max<Round>(1, rounds / 10'000); }

std::vector<Round> sampled_rounds(Round completed, Round stride) {
  if (stride < 1) throw Error(ErrorKind::InvalidArgument, "stride must be positive");
  std::vector<Round> out;
  for (Round t = stride; t <= completed; t += stride) out.push_back(t);
  if (completed > 0 && (out.empty() || out.back() != completed)) out.push_back(completed);
  return out;
}

void write_trajectory_csv(const std::filesystem::path& path, const Trajectory& traj, Round stride) {
  auto out = open_out(path);
  out << "t";
  for (const auto& m : traj.measures) out << ',' << m.id();
  out << ",norm_x,norm_y,status\n";
  const auto rounds = sampled_rounds(traj.rounds_completed(), stride);
  for (std::size_t j = 0; j < rounds.size(); ++j) {
    const auto r = static_cast<std::size_t>(rounds[j] - 1);
    out << rounds[j];
    for (const auto& d : traj.deltas) out << ',' << format_double(d[r]);
    out << ',' << format_double(traj.norm_x[r]) << ',' << format_double(traj.norm_y[r]) << ','
        << (j + 1 == rounds.size() ? to_string(traj.status) : std::string_view("running")) << '\n';
  }
}

std::vector<double> CsvTable::column(std::string_view name) const {
  const auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) {
    throw Error(ErrorKind::InvalidArgument, "no column '" + std::string(name) + "'");
  }
  const auto k = static_cast<std::size_t>(it - header.begin());
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& row : rows) out.push_back(parse_cell(row.at(k)));
  return out;
}

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::InvalidArgument, "cannot read " + path.string());
  auto split_line = [](const std::string& line) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
  };
  CsvTable table;
  std::string line;
  if (std::getline(in, line)) table.header = split_line(line);
  while (std::getline(in, line)) {
    if (!line.empty()) table.rows.push_back(split_line(line));
  }
  return table;
}

void write_spectrum_csv(const std::filesystem::path& path, const AnalysisResult& a) {
  auto out = open_out(path);
  out << "index,re,im,modulus,floquet_exponent\n";
  const auto& ev = a.report.spectrum.eigenvalues;
  for (std::size_t i = 0; i < ev.size(); ++i) {
    out << i << ',' << format_double(ev[i].real()) << ',' << format_double(ev[i].imag()) << ','
        << format_double(std::abs(ev[i])) << ',' << format_double(a.report.floquet_exponents[i])
        << '\n';
  }
}

void write_summary_csv(const std::filesystem::path& path, const AnalysisResult& a) {
  auto out = open_out(path);
  double family_max = 0.0;
  for (const auto& z : a.family.all()) family_max = std::max(family_max, std::abs(z));
  out << "key,value\n"
      << "label," << a.label << '\n'
      << "period," << a.period << '\n'
      << "matrix_dim," << a.report.matrix_dim << '\n'
      << "spectral_radius," << format_double(a.spectral_radius) << '\n'
      << "lambda_star," << format_double(a.report.lambda_star) << '\n'
      << "unit_eigen_count," << a.report.unit_eigen_count << '\n'
      << "is_normal," << (a.report.is_normal ? "true" : "false") << '\n'
      << "normality_defect," << format_double(a.report.normality_defect) << '\n'
      << "diag_residual," << format_double(a.report.diag_residual) << '\n'
      << "static_family_max_modulus," << format_double(family_max) << '\n'
      << "step," << format_double(a.configured_step) << '\n'
      << "step_threshold," << format_double(a.threshold) << '\n'
      << "verdict," << a.verdict << '\n';
}

void write_sweep_csv(const std::filesystem::path& path, const std::vector<GridAxis>& axes,
                     const std::vector<SweepRow>& rows) {
  auto out = open_out(path);
  for (const auto& a : axes) out << to_string(a.param) << ',';
  out << "fitted_rate,theoretical_rate,relative_gap,final_delta,status\n";
  for (const auto& row : rows) {
    for (double p : row.params) out << format_double(p) << ',';
    out << format_double(row.fitted_rate) << ','
        << (row.theoretical_rate ? format_double(*row.theoretical_rate) : std::string()) << ','
        << format_double(row.relative_gap) << ',' << format_double(row.final_delta) << ','
        << to_string(row.status) << '\n';
  }
}

void write_svg(const std::filesystem::path& path, const std::string& title,
               const std::vector<SvgLine>& lines) {
  constexpr double kWidth = 800, kHeight = 480, kLeft = 70, kRight = 180, kTop = 40, kBottom = 50;
  constexpr std::size_t kMaxPoints = 2000;
  static const char* const kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                        "#9467bd", "#8c564b", "#e377c2", "#17becf"};

  double t_max = 1.0, y_min = std::numeric_limits<double>::infinity(), y_max = -y_min;
  for (const auto& line : lines) {
    for (std::size_t j = 0; j < line.t.size(); ++j) {
      t_max = std::max(t_max, static_cast<double>(line.t[j]));
      const double v = line.values[j];
      if (v > 0.0 && std::isfinite(v)) {
        y_min = std::min(y_min, std::log(v));
        y_max = std::max(y_max, std::log(v));
      }
    }
  }
  if (!std::isfinite(y_min)) y_min = -1.0, y_max = 1.0;
  if (y_max - y_min < 1e-12) y_min -= 1.0, y_max += 1.0;
  const double pw = kWidth - kLeft - kRight, ph = kHeight - kTop - kBottom;
  auto px = [&](double t) { return kLeft + pw * t / t_max; };
  auto py = [&](double y) { return kTop + ph * (y_max - y) / (y_max - y_min); };

  auto out = open_out(path);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
      << kHeight << "\" font-family=\"sans-serif\" font-size=\"12\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      << "<text x=\"" << kLeft << "\" y=\"24\" font-size=\"15\">" << title << "</text>\n"
      << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << pw << "\" height=\"" << ph
      << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int k = 0; k <= 4; ++k) {
    const double y = y_min + (y_max - y_min) * k / 4.0;
    const double t = t_max * k / 4.0;
    char ybuf[32], tbuf[32];
    std::snprintf(ybuf, sizeof ybuf, "%.3g", y);
    std::snprintf(tbuf, sizeof tbuf, "%.3g", t);
    out << "<text x=\"" << kLeft - 6 << "\" y=\"" << py(y) + 4 << "\" text-anchor=\"end\">"
        << ybuf << "</text>\n"
        << "<text x=\"" << px(t) << "\" y=\"" << kTop + ph + 18 << "\" text-anchor=\"middle\">"
        << tbuf << "</text>\n";
  }
  out << "<text x=\"" << kLeft + pw / 2 << "\" y=\"" << kHeight - 10
      << "\" text-anchor=\"middle\">t</text>\n"
      << "<text x=\"16\" y=\"" << kTop + ph / 2 << "\" transform=\"rotate(-90 16 " << kTop + ph / 2
      << ")\" text-anchor=\"middle\">ln delta</text>\n";

  for (std::size_t i = 0; i < lines.size(); ++i) {
    const auto& line = lines[i];
    const char* color = kColors[i % std::size(kColors)];
    const std::size_t step = std::max<std::size_t>(1, line.t.size() / kMaxPoints);
    out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.2\" points=\"";
    for (std::size_t j = 0; j < line.t.size(); j += step) {
      const double v = line.values[j];
      if (!(v > 0.0) || !std::isfinite(v)) continue;
      out << px(static_cast<double>(line.t[j])) << ',' << py(std::log(v)) << ' ';
    }
    out << "\"/>\n"
        << "<text x=\"" << kLeft + pw + 10 << "\" y=\"" << kTop + 14 + 16.0 * i << "\" fill=\""
        << color << "\">" << line.label << "</text>\n";
  }
  out << "</svg>\n";
}

}  // namespace tvgames
